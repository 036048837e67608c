"""Axisymmetric Euclidean-harmonic potentials nu.

Two representations share one interface: a field backed by an AxisMeasure,
and a source expansion nu(x) = sum_i c_i / |x - y_i| with the y_i on the
axis.  Exterior Dirichlet data on a profile surface are fitted by the method
of fundamental solutions with axis sources.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import spectral
from .axis_measure import AxisMeasure, PointMass, potential_derivatives, total_mass
from .errors import IllConditioned, InvalidCurve, PointOnSupport
from .profile_geometry import ProfileCurve


@dataclass(frozen=True, eq=False)
class HarmonicField:
    measure: AxisMeasure = dc_field(default_factory=AxisMeasure.empty)
    kind: str = "measure"

    @classmethod
    def zero(cls):
        return cls(AxisMeasure.empty(), "measure")

    @classmethod
    def from_measure(cls, measure):
        return cls(measure, "measure")

    @classmethod
    def from_sources(cls, z, c):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if z.shape != c.shape:
            raise ValueError("source positions and strengths differ in length")
        comps = tuple(PointMass(float(zi), -float(ci)) for zi, ci in zip(z, c))
        return cls(AxisMeasure(comps), "sources")

    @property
    def sources(self):
        """(z_i, c_i) arrays; c_i = -mass_i.  Only meaningful for point masses."""
        pts = [c for c in self.measure.components if isinstance(c, PointMass)]
        return (np.array([p.z0 for p in pts]), np.array([-p.mass for p in pts]))

    @property
    def is_point_sources(self):
        return all(isinstance(c, PointMass) for c in self.measure.components)

    @property
    def decay_mass(self):
        return total_mass(self.measure)

    @property
    def is_zero(self):
        return self.measure.is_empty

    def support_interval(self):
        return self.measure.support_interval()

    def jet(self, r, z):
        """(nu, nu_r, nu_z, nu_rr, nu_rz, nu_zz) at broadcast points."""
        r = np.abs(np.asarray(r, dtype=float))
        z = np.asarray(z, dtype=float)
        r, z = np.broadcast_arrays(r, z)
        if self.is_zero:
            return np.zeros((6,) + r.shape)
        if self.is_point_sources:
            return _point_source_jet(*self.sources, r, z, self.measure.support_eps())
        return potential_derivatives(self.measure, r, z)

    def to_dict(self):
        if self.kind == "sources":
            zs, cs = self.sources
            return {"kind": "sources", "sources": [[float(a), float(b)] for a, b in zip(zs, cs)]}
        return {"kind": "measure", "measure": self.measure.to_dict()}

    @classmethod
    def from_dict(cls, doc):
        if doc.get("kind") == "sources":
            pairs = np.asarray(doc.get("sources", []), dtype=float).reshape(-1, 2)
            return cls.from_sources(pairs[:, 0], pairs[:, 1])
        if "measure" in doc:
            return cls.from_measure(AxisMeasure.from_dict(doc["measure"]))
        return cls.from_measure(AxisMeasure.from_dict(doc))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _point_source_jet(zs, cs, r, z, eps):
    # vectorized over (points, sources)
    shape = r.shape
    rr = r.reshape(-1, 1)
    t0 = zs.reshape(1, -1) - z.reshape(-1, 1)
    D2 = rr * rr + t0 * t0
    if np.any(D2 <= eps * eps):
        raise PointOnSupport("evaluation point coincides with an axis source")
    D = np.sqrt(D2)
    m = -cs.reshape(1, -1)
    inv3 = m / (D2 * D)
    inv5 = inv3 / D2
    nu = -(m / D).sum(axis=1)
    psi = inv3.sum(axis=1)
    psi_t = (inv3 * t0).sum(axis=1)
    om = inv5.sum(axis=1)
    om_t = (inv5 * t0).sum(axis=1)
    om_tt = (inv5 * t0 * t0).sum(axis=1)
    rf = rr[:, 0]
    out = np.stack([
        nu,
        rf * psi,
        -psi_t,
        psi - 3.0 * rf * rf * om,
        3.0 * rf * om_t,
        psi - 3.0 * om_tt,
    ])
    return out.reshape((6,) + shape)


def field_eval(field: HarmonicField, point):
    """Value, gradient (nu_r, nu_z) and Hessian of nu at a single (r, z)."""
    r, z = point
    j = field.jet(float(r), float(z))
    grad = np.array([j[1], j[2]])
    hess = np.array([[j[3], j[4]], [j[4], j[5]]])
    return float(j[0]), grad, hess


@dataclass(frozen=True)
class FitConfig:
    n_sources: int = 40
    margin_frac: float = 0.15
    svd_cutoff: float = 1e-12
    max_condition: float = 1e16
    residual_tol: float = 1e-6

    @classmethod
    def from_dict(cls, doc):
        known = {k: doc[k] for k in cls.__dataclass_fields__ if k in doc}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class DirichletFit:
    field: HarmonicField
    boundary_residual_sup: float
    boundary_residual_l2: float
    condition_estimate: float


def axis_source_positions(curve: ProfileCurve, n_sources, margin_frac, layout="uniform"):
    """Axis source heights inside the pole chord, ``margin_frac`` of it kept clear at each end.

    ``layout="chebyshev"`` clusters the sources toward the ends, which resolves
    potentials whose axis support reaches close to the poles.
    """
    z_top, z_bot = float(curve.z[0]), float(curve.z[-1])
    chord = z_top - z_bot
    if not chord > 0.0:
        raise InvalidCurve("north pole must lie above the south pole for axis sources")
    margin = margin_frac * chord
    if n_sources == 1:
        return np.array([0.5 * (z_top + z_bot)])
    if layout == "uniform":
        s = np.linspace(-1.0, 1.0, n_sources)
    elif layout == "chebyshev":
        k = np.arange(n_sources)
        s = -np.cos(np.pi * (k + 0.5) / n_sources) / np.cos(0.5 * np.pi / n_sources)
    else:
        raise ValueError(f"unknown source layout {layout!r}")
    return 0.5 * (z_top + z_bot) + s * (0.5 * chord - margin)


def solve_exterior_dirichlet(curve: ProfileCurve, boundary_values, config: FitConfig | None = None):
    """Fit the exterior harmonic extension of boundary data by axis sources.

    ``boundary_values`` is a callable of theta or an array of nodal values on
    the curve's grid.  Strengths come from a truncated-SVD least-squares
    solve on 2*n_sources Chebyshev-Lobatto collocation angles; residuals
    are measured on a finer grid and always reported.
    """
    config = config or FitConfig()
    if callable(boundary_values):
        g_fn = boundary_values
    else:
        vals = np.asarray(boundary_values, dtype=float)
        if vals.shape != curve.theta.shape:
            raise ValueError("nodal boundary values must match the curve grid")
        g_fn = lambda t: spectral.interpolate(vals, t)  # noqa: E731

    zs = axis_source_positions(curve, config.n_sources, config.margin_frac)
    theta_c = spectral.lobatto_theta(max(2 * config.n_sources, 2))
    rc, zc = curve.point_at(theta_c)
    rc = np.abs(rc)
    A = 1.0 / np.hypot(rc[:, None], zc[:, None] - zs[None, :])
    g = np.asarray(g_fn(theta_c), dtype=float)

    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    keep = s > config.svd_cutoff * s[0]
    coef = Vt[keep].T @ ((U[:, keep].T @ g) / s[keep])
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")

    field = HarmonicField.from_sources(zs, coef)
    theta_f = spectral.lobatto_theta(4 * max(config.n_sources, curve.n) + 1)
    rf, zf = curve.point_at(theta_f)
    resid = field.jet(np.abs(rf), zf)[0] - np.asarray(g_fn(theta_f), dtype=float)
    sup = float(np.max(np.abs(resid)))
    rms = float(np.sqrt(np.mean(resid**2)))
    if cond > config.max_condition and sup > config.residual_tol:
        raise IllConditioned(
            f"Dirichlet fit ill-conditioned (cond={cond:.3e}) with residual {sup:.3e}"
        )
    return DirichletFit(field, sup, rms, cond)
