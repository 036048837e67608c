"""Signed measures on the symmetry axis and their Newtonian potentials.

The potential of a measure mu on the z-axis is

    nu(r, z) = -int 1/|x - y| dmu_y,

harmonic off the support.  Point masses are evaluated in closed form.  A rod
carries a polynomial density p(zeta) (degree <= 3) on [z_lo, z_hi]; its
integrals reduce, after the shift t = zeta - z, to the moments

    int t^k / D^(2j+1) dt,    D = sqrt(t^2 + r^2),

which have elementary antiderivatives.  Those are evaluated in a form that
separates the r -> 0 singular constant from a bounded remainder, so that
points close to the axis but off the rod do not lose digits.  An adaptive
Gauss-Kronrod route (``method="quadrature"``) is kept for cross-checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .errors import InvalidMeasure, PointOnSupport

MAX_DENSITY_DEGREE = 3
SUPPORT_EPS_FACTOR = 1e-12


@dataclass(frozen=True)
class PointMass:
    z0: float
    mass: float


@dataclass(frozen=True)
class Rod:
    z_lo: float
    z_hi: float
    density: tuple  # ascending polynomial coefficients in z

    def __post_init__(self):
        object.__setattr__(self, "density", tuple(float(c) for c in self.density))
        if not (math.isfinite(self.z_lo) and math.isfinite(self.z_hi)):
            raise InvalidMeasure("rod endpoints must be finite")
        if not self.z_lo < self.z_hi:
            raise InvalidMeasure(f"rod needs z_lo < z_hi, got [{self.z_lo}, {self.z_hi}]")
        if len(self.density) == 0:
            raise InvalidMeasure("rod density needs at least one coefficient")
        if len(self.density) - 1 > MAX_DENSITY_DEGREE:
            raise InvalidMeasure(f"rod density degree capped at {MAX_DENSITY_DEGREE}")
        if not all(math.isfinite(c) for c in self.density):
            raise InvalidMeasure("rod density coefficients must be finite")

    @property
    def length(self):
        return self.z_hi - self.z_lo

    def mass(self):
        anti = P.polyint(np.asarray(self.density))
        return float(P.polyval(self.z_hi, anti) - P.polyval(self.z_lo, anti))


@dataclass(frozen=True)
class AxisMeasure:
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(self.components)
        for c in comps:
            if not isinstance(c, (PointMass, Rod)):
                raise InvalidMeasure(f"unknown measure component {c!r}")
            if isinstance(c, PointMass) and not (math.isfinite(c.z0) and math.isfinite(c.mass)):
                raise InvalidMeasure("point mass fields must be finite")
        object.__setattr__(self, "components", comps)

    # -- construction helpers -------------------------------------------
    @classmethod
    def empty(cls):
        return cls(())

    @classmethod
    def curzon(cls, m, z0=0.0):
        return cls((PointMass(float(z0), float(m)),))

    @classmethod
    def uniform_rod(cls, z_lo, z_hi, density):
        return cls((Rod(float(z_lo), float(z_hi), (float(density),)),))

    @classmethod
    def schwarzschild(cls, m):
        """Rod of density 1/2 on [-m, m]: the Schwarzschild metric of mass m."""
        return cls.uniform_rod(-m, m, 0.5)

    def __add__(self, other):
        return AxisMeasure(self.components + other.components)

    # -- geometry ---------------------------------------------------------
    @property
    def is_empty(self):
        return len(self.components) == 0

    def support_interval(self):
        """(z_min, z_max) of the support, or None for the zero measure."""
        if self.is_empty:
            return None
        lo = min(c.z0 if isinstance(c, PointMass) else c.z_lo for c in self.components)
        hi = max(c.z0 if isinstance(c, PointMass) else c.z_hi for c in self.components)
        return lo, hi

    def support_diameter(self):
        iv = self.support_interval()
        return 0.0 if iv is None else iv[1] - iv[0]

    def support_radius(self):
        """Radius of the smallest origin-centred ball containing the support."""
        iv = self.support_interval()
        return 0.0 if iv is None else max(abs(iv[0]), abs(iv[1]))

    def support_eps(self):
        return SUPPORT_EPS_FACTOR * self.support_diameter()

    def distance_to_support(self, r, z):
        r = np.abs(np.asarray(r, dtype=float))
        z = np.asarray(z, dtype=float)
        d = np.full(np.broadcast(r, z).shape, np.inf)
        for c in self.components:
            if isinstance(c, PointMass):
                dc = np.hypot(r, z - c.z0)
            else:
                dz = np.maximum(np.maximum(c.z_lo - z, z - c.z_hi), 0.0)
                dc = np.hypot(r, dz)
            d = np.minimum(d, dc)
        return d

    def check_off_support(self, r, z):
        if self.is_empty:
            return
        d = self.distance_to_support(r, z)
        bad = d <= self.support_eps()
        if np.any(bad):
            idx = np.argwhere(np.atleast_1d(bad))[0]
            rr = np.atleast_1d(np.broadcast_to(r, bad.shape))[tuple(idx)]
            zz = np.atleast_1d(np.broadcast_to(z, bad.shape))[tuple(idx)]
            raise PointOnSupport(f"point (r={rr:.6g}, z={zz:.6g}) lies on the measure support")

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        comps = []
        for c in self.components:
            if isinstance(c, PointMass):
                comps.append({"kind": "point", "z0": c.z0, "mass": c.mass})
            else:
                comps.append(
                    {"kind": "rod", "z_lo": c.z_lo, "z_hi": c.z_hi, "density": list(c.density)}
                )
        return {"components": comps}

    @classmethod
    def from_dict(cls, doc):
        comps = []
        for item in doc.get("components", []):
            kind = item.get("kind")
            if kind == "point":
                comps.append(PointMass(float(item["z0"]), float(item["mass"])))
            elif kind == "rod":
                comps.append(Rod(float(item["z_lo"]), float(item["z_hi"]), item["density"]))
            else:
                raise InvalidMeasure(f"unknown component kind {kind!r}")
        return cls(tuple(comps))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def total_mass(measure: AxisMeasure) -> float:
    total = 0.0
    for c in measure.components:
        total += c.mass if isinstance(c, PointMass) else c.mass()
    return total


# ---------------------------------------------------------------------------
# rod moment kernels
# ---------------------------------------------------------------------------

def _endpoint_parts(t, r):
    """Regular parts of the k=0 antiderivatives and the sign of t.

    I0 = s*log(a + D) - s*log r, J0 = s/r^2 - s/(D(D + a)),
    L0 = s*2/(3 r^4) + s*G(a), with a = |t|, s = sign(t).
    The singular constants are added back by the caller only when the two
    endpoints straddle z (where r > 0 is guaranteed).
    """
    s = np.where(t >= 0.0, 1.0, -1.0)
    a = np.abs(t)
    D = np.sqrt(a * a + r * r)
    i0 = s * np.log(a + D)
    j0 = -s / (D * (D + a))
    g = -(3.0 * a * a + 4.0 * r * r) / (
        3.0 * D**3 * (a * (2.0 * a * a + 3.0 * r * r) + 2.0 * D**3)
    )
    l0 = s * g
    return s, a, D, i0, j0, l0


def _moment_tables(t1, t2, r):
    """Definite integrals over [t1, t2] of t^k/D, t^k/D^3, t^k/D^5 (k = 0..5)."""
    s1, a1, D1, i01, j01, l01 = _endpoint_parts(t1, r)
    s2, a2, D2, i02, j02, l02 = _endpoint_parts(t2, r)
    straddle = s2 != s1
    with np.errstate(divide="ignore", invalid="ignore"):
        rs = np.where(straddle, r, 1.0)
        c_i = np.where(straddle, -2.0 * np.log(rs), 0.0)
        c_j = np.where(straddle, 2.0 / rs**2, 0.0)
        c_l = np.where(straddle, 4.0 / (3.0 * rs**4), 0.0)
    r2 = r * r
    kmax = 6
    I = [None] * kmax
    J = [None] * kmax
    L = [None] * kmax
    I[0] = i02 - i01 + c_i
    I[1] = D2 - D1
    for k in range(2, kmax):
        I[k] = ((t2 ** (k - 1) * D2 - t1 ** (k - 1) * D1) - (k - 1) * r2 * I[k - 2]) / k
    J[0] = j02 - j01 + c_j
    J[1] = -(1.0 / D2 - 1.0 / D1)
    for k in range(2, kmax):
        J[k] = I[k - 2] - r2 * J[k - 2]
    L[0] = l02 - l01 + c_l
    L[1] = -(1.0 / D2**3 - 1.0 / D1**3) / 3.0
    for k in range(2, kmax):
        L[k] = J[k - 2] - r2 * L[k - 2]
    return I, J, L


def _shifted_coeffs(density, z):
    """Coefficients q_k of q(t) = p(z + t) for each z (shape (deg+1, len(z)))."""
    c = np.asarray(density, dtype=float)
    out = []
    fact = 1.0
    for k in range(len(c)):
        if k > 0:
            fact *= k
        out.append(P.polyval(z, P.polyder(c, k)) / fact if k else P.polyval(z, c))
    return out


def _rod_jet(rod: Rod, r, z):
    t1 = rod.z_lo - z
    t2 = rod.z_hi - z
    I, J, L = _moment_tables(t1, t2, r)
    q = _shifted_coeffs(rod.density, z)
    phi = sum(qk * I[k] for k, qk in enumerate(q))
    psi = sum(qk * J[k] for k, qk in enumerate(q))
    psi_t = sum(qk * J[k + 1] for k, qk in enumerate(q))
    om = sum(qk * L[k] for k, qk in enumerate(q))
    om_t = sum(qk * L[k + 1] for k, qk in enumerate(q))
    om_tt = sum(qk * L[k + 2] for k, qk in enumerate(q))
    return _assemble(r, phi, psi, psi_t, om, om_t, om_tt)


def _point_jet(pm: PointMass, r, z):
    t0 = pm.z0 - z
    D = np.sqrt(r * r + t0 * t0)
    m = pm.mass
    phi = m / D
    psi = m / D**3
    psi_t = m * t0 / D**3
    om = m / D**5
    return _assemble(r, phi, psi, psi_t, om, om * t0, om * t0 * t0)


def _assemble(r, phi, psi, psi_t, om, om_t, om_tt):
    nu = -phi
    nu_r = r * psi
    nu_z = -psi_t
    nu_rr = psi - 3.0 * r * r * om
    nu_rz = 3.0 * r * om_t
    nu_zz = psi - 3.0 * om_tt
    return np.stack(np.broadcast_arrays(nu, nu_r, nu_z, nu_rr, nu_rz, nu_zz))


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod cross-check
# ---------------------------------------------------------------------------

def _rod_jet_quadrature(rod: Rod, r, z, rel_tol):
    c = np.asarray(rod.density)

    def moment(weight):
        val, _ = integrate.quad(
            lambda zeta: P.polyval(zeta, c) * weight(zeta),
            rod.z_lo, rod.z_hi, epsabs=0.0, epsrel=rel_tol, limit=400,
            points=[z] if rod.z_lo < z < rod.z_hi else None,
        )
        return val

    def D(zeta):
        return math.hypot(r, zeta - z)

    phi = moment(lambda s: 1.0 / D(s))
    psi = moment(lambda s: 1.0 / D(s) ** 3)
    psi_t = moment(lambda s: (s - z) / D(s) ** 3)
    om = moment(lambda s: 1.0 / D(s) ** 5)
    om_t = moment(lambda s: (s - z) / D(s) ** 5)
    om_tt = moment(lambda s: (s - z) ** 2 / D(s) ** 5)
    return _assemble(r, phi, psi, psi_t, om, om_t, om_tt)


# ---------------------------------------------------------------------------
# public evaluation API
# ---------------------------------------------------------------------------

def potential_derivatives(measure: AxisMeasure, r, z, method="closed", rel_tol=1e-12):
    """Return the jet (nu, nu_r, nu_z, nu_rr, nu_rz, nu_zz) at (r, z).

    ``r`` and ``z`` may be arrays (broadcast together); the result then has
    a leading axis of length 6.  Raises PointOnSupport on the support.
    """
    r = np.abs(np.asarray(r, dtype=float))
    z = np.asarray(z, dtype=float)
    r, z = np.broadcast_arrays(r, z)
    measure.check_off_support(r, z)
    out = np.zeros((6,) + r.shape)
    for c in measure.components:
        if isinstance(c, PointMass):
            out += _point_jet(c, r, z)
        elif method == "closed":
            out += _rod_jet(c, r, z)
        elif method == "quadrature":
            jets = [
                _rod_jet_quadrature(c, float(ri), float(zi), rel_tol)
                for ri, zi in zip(r.ravel(), z.ravel())
            ]
            out += np.stack(jets, axis=-1).reshape((6,) + r.shape)
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def potential_eval(measure: AxisMeasure, r, z, method="closed", rel_tol=1e-12):
    return potential_derivatives(measure, r, z, method=method, rel_tol=rel_tol)[0]


def measure_from_components(components: Sequence) -> AxisMeasure:
    return AxisMeasure(tuple(components))
