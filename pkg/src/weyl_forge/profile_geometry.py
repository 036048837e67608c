"""Profile curves sigma(theta) = (r(theta), z(theta)) and induced boundary data.

A profile runs from the north pole (theta = 0) to the south pole
(theta = pi) and generates a sphere of revolution about the z-axis.  The
Euclidean unit normal pointing into the exterior is (-z', r') / |sigma'|.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import spectral
from .errors import DegenerateArea, InvalidCurve

POLE_TOL = 1e-7
SIMPLICITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    theta: np.ndarray
    r: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        r = np.asarray(self.r, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if not (theta.shape == r.shape == z.shape and theta.ndim == 1):
            raise InvalidCurve("theta, r, z must be 1-d arrays of equal length")
        if not np.allclose(theta, spectral.lobatto_theta(theta.size), atol=1e-9, rtol=0):
            raise InvalidCurve("theta must be the Chebyshev-Lobatto grid on [0, pi]")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(z))):
            raise InvalidCurve("curve samples must be finite")
        for name, arr in (("theta", theta), ("r", r), ("z", z)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_functions(cls, r_fn, z_fn, n=65, validate=True):
        theta = spectral.lobatto_theta(n)
        r = np.asarray(r_fn(theta), dtype=float)
        r[0] = r[-1] = 0.0
        curve = cls(theta, r, np.asarray(z_fn(theta), dtype=float))
        if validate:
            curve.validate()
        return curve

    @classmethod
    def sphere(cls, radius=1.0, n=65, center=0.0):
        return cls.from_functions(
            lambda t: radius * np.sin(t), lambda t: center + radius * np.cos(t), n
        )

    @property
    def n(self):
        return self.theta.size

    @property
    def scale(self):
        return max(float(np.max(np.abs(self.r))), float(np.ptp(self.z)), 1e-300)

    def with_z(self, z):
        return ProfileCurve(self.theta, self.r, z)

    def shifted(self, dz):
        return ProfileCurve(self.theta, self.r, self.z + dz)

    def scaled(self, s):
        return ProfileCurve(self.theta, s * self.r, s * self.z)

    def reflected(self):
        """Mirror image under z -> -z (keeps the theta parametrization)."""
        return ProfileCurve(self.theta, self.r, -self.z)

    def resampled(self, n):
        theta = spectral.lobatto_theta(n)
        r = spectral.interpolate(self.r, theta)
        r[0] = r[-1] = 0.0
        return ProfileCurve(theta, r, spectral.interpolate(self.z, theta))

    def point_at(self, theta):
        theta = np.asarray(theta, dtype=float)
        return spectral.interpolate(self.r, theta), spectral.interpolate(self.z, theta)

    # -- derivatives --------------------------------------------------------
    @cached_property
    def r1(self):
        return spectral.deriv(self.r)

    @cached_property
    def z1(self):
        return spectral.deriv(self.z)

    @cached_property
    def r2(self):
        return spectral.deriv(self.r, 2)

    @cached_property
    def z2(self):
        return spectral.deriv(self.z, 2)

    @cached_property
    def speed(self):
        return np.hypot(self.r1, self.z1)

    @cached_property
    def normal(self):
        """Euclidean unit normal (n_r, n_z) into the exterior region."""
        return -self.z1 / self.speed, self.r1 / self.speed

    @cached_property
    def curvature(self):
        """Geodesic curvature kappa_E = <grad_T N, T> of the profile."""
        return (self.z1 * self.r2 - self.r1 * self.z2) / self.speed**3

    # -- validation -----------------------------------------------------------
    def validate(self, check_simple=True):
        scale = self.scale
        if abs(self.r[0]) > POLE_TOL * scale or abs(self.r[-1]) > POLE_TOL * scale:
            raise InvalidCurve("profile must meet the axis at both poles (r(0) = r(pi) = 0)")
        if np.any(self.r[1:-1] <= 0.0):
            k = int(np.argmin(self.r[1:-1])) + 1
            raise InvalidCurve(f"r must be positive on (0, pi); r={self.r[k]:.3e} at theta={self.theta[k]:.6f}")
        if abs(self.z1[0]) > POLE_TOL * scale or abs(self.z1[-1]) > POLE_TOL * scale:
            raise InvalidCurve("profile must meet the axis orthogonally (z'(0) = z'(pi) = 0)")
        if self.r1[0] <= 0.0 or self.r1[-1] >= 0.0:
            raise InvalidCurve("profile must leave and re-enter the axis transversally")
        if np.any(self.speed <= 1e-12 * scale):
            raise InvalidCurve("profile is not an immersion (sigma' = 0)")
        if self.signed_area() >= 0.0:
            raise InvalidCurve("profile orientation reversed: theta = 0 must be the north pole")
        if check_simple and not self.is_simple():
            raise InvalidCurve("profile curve self-intersects")
        return self

    def signed_area(self):
        """Shoelace area of the loop sigma followed by the axis segment back up."""
        # trapezoid on the fine interpolant is plenty for a sign test
        t = spectral.lobatto_theta(4 * self.n)
        rr, zz = self.point_at(t)
        return 0.5 * float(np.sum(rr[:-1] * zz[1:] - rr[1:] * zz[:-1]))

    def is_simple(self, refine=4):
        t = spectral.lobatto_theta(refine * self.n)
        rr, zz = self.point_at(t)
        rr[0] = rr[-1] = 0.0
        return _polyline_is_simple(rr, zz, SIMPLICITY_TOL * self.scale)

    # -- I/O --------------------------------------------------------------------
    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "r", "z"])
        for row in zip(self.theta, self.r, self.z):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, validate=True):
        cols = _read_columns(text, ("theta", "r", "z"))
        curve = cls(cols["theta"], cols["r"], cols["z"])
        if validate:
            curve.validate()
        return curve


def _polyline_is_simple(r, z, tol):
    """Segment-intersection test; adjacent segments share an endpoint and are skipped."""
    p = np.stack([r[:-1], z[:-1]], axis=1)
    q = np.stack([r[1:], z[1:]], axis=1)
    m = len(p)
    d = q - p

    def cross(a, b):
        return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]

    i, j = np.triu_indices(m, k=2)
    # first and last segments both touch the axis; they only meet if the poles coincide
    keep = ~((i == 0) & (j == m - 1))
    i, j = i[keep], j[keep]
    di, dj = d[i], d[j]
    denom = cross(di, dj)
    w = p[j] - p[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = cross(w, dj) / denom
        u = cross(w, di) / denom
    hit = (np.abs(denom) > 0) & (s > tol) & (s < 1 - tol) & (u > tol) & (u < 1 - tol)
    return not bool(np.any(hit))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Bartnik data: metric alpha^2 dtheta^2 + beta^2 dphi^2 and mean curvature H."""

    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        for name in ("theta", "alpha", "beta", "H"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.theta.size

    def pole_defect(self):
        """max over poles of | |beta'| - alpha |."""
        b1 = spectral.deriv(self.beta)
        return max(abs(abs(b1[0]) - self.alpha[0]), abs(abs(b1[-1]) - self.alpha[-1]))

    def validate(self, tol=1e-6):
        if np.any(self.alpha <= 0):
            raise InvalidCurve("alpha must be positive")
        if np.any(self.beta[1:-1] < 0):
            raise InvalidCurve("beta must be non-negative")
        if abs(self.beta[0]) > tol or abs(self.beta[-1]) > tol:
            raise InvalidCurve("beta must vanish at the poles")
        if self.pole_defect() > tol * max(1.0, float(np.max(self.alpha))):
            raise InvalidCurve("pole compatibility |beta'| = alpha fails")
        return self

    def area(self):
        return 2.0 * np.pi * spectral.integrate(self.alpha * self.beta)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "alpha", "beta", "H"])
        for row in zip(self.theta, self.alpha, self.beta, self.H):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        cols = _read_columns(text, ("theta", "alpha", "beta", "H"))
        return cls(cols["theta"], cols["alpha"], cols["beta"], cols["H"])


def _read_columns(text, names):
    rows = list(csv.DictReader(io.StringIO(text)))
    missing = [n for n in names if rows and n not in rows[0]]
    if not rows or missing:
        raise ValueError(f"CSV needs header {','.join(names)}")
    return {n: np.array([float(row[n]) for row in rows]) for n in names}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def euclid_mean_curvature(curve: ProfileCurve, theta=None):
    """Euclidean mean curvature N_E(r)/r + kappa_E of the surface of revolution.

    Nodal values when ``theta`` is None; otherwise evaluated from the curve's
    Chebyshev interpolant.  At the poles the first term tends to kappa_E.
    """
    if theta is None:
        n_r, _ = curve.normal
        kappa = curve.curvature
        H = np.empty_like(kappa)
        H[1:-1] = n_r[1:-1] / curve.r[1:-1] + kappa[1:-1]
        H[0], H[-1] = 2.0 * kappa[0], 2.0 * kappa[-1]
        return H
    theta = np.asarray(theta, dtype=float)
    rs = spectral.chopped_series(curve.r)
    zs = spectral.chopped_series(curve.z)
    r, r1, r2 = rs(theta), rs.deriv()(theta), rs.deriv(2)(theta)
    z1, z2 = zs.deriv()(theta), zs.deriv(2)(theta)
    sp = np.hypot(r1, z1)
    kappa = (z1 * r2 - r1 * z2) / sp**3
    at_pole = np.isclose(theta, 0.0) | np.isclose(theta, np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        H = np.where(at_pole, 2.0 * kappa, (-z1 / sp) / r + kappa)
    return H


def induced_boundary_data(solution, curve: ProfileCurve) -> BoundaryData:
    """Bartnik data (alpha, beta, H) induced on the surface generated by ``curve``.

    alpha = e^(lambda - nu) |sigma'|,  beta = r e^(-nu),
    H = e^(nu - lambda) (H_Eucl + N_E(lambda - 2 nu)).
    The lambda gradient is taken from its defining 1-form, never by differencing.
    """
    jet = solution.surface_fields(curve)
    nu, nu_r, nu_z, lam = jet["nu"], jet["nu_r"], jet["nu_z"], jet["lam"]
    lam_r = curve.r * (nu_r**2 - nu_z**2)
    lam_z = 2.0 * curve.r * nu_r * nu_z
    n_r, n_z = curve.normal
    alpha = np.exp(lam - nu) * curve.speed
    beta = curve.r * np.exp(-nu)
    normal_deriv = n_r * (lam_r - 2.0 * nu_r) + n_z * (lam_z - 2.0 * nu_z)
    H = np.exp(nu - lam) * (euclid_mean_curvature(curve) + normal_deriv)
    return BoundaryData(curve.theta, alpha, beta, H)


def flat_boundary_data(curve: ProfileCurve) -> BoundaryData:
    return BoundaryData(curve.theta, curve.speed, curve.r.copy(), euclid_mean_curvature(curve))


def normalize_z(curve: ProfileCurve, solution=None, max_iter=30) -> ProfileCurve:
    """Shift z so that int z dv_gamma = 0 (dv_gamma = alpha beta dtheta dphi).

    For a non-flat ambient field the area element depends on the position,
    so the shift is iterated to a fixed point.
    """
    out = curve
    for _ in range(max_iter):
        if solution is None:
            w = out.speed * out.r
        else:
            data = induced_boundary_data(solution, out)
            w = data.alpha * data.beta
        area = spectral.integrate(w)
        if not area > 0.0:
            raise DegenerateArea(f"integral of alpha*beta is {area:.3e}")
        c = spectral.integrate(out.z * w) / area
        out = out.shifted(-c)
        if solution is None or abs(c) <= 1e-14 * curve.scale:
            break
    return out
