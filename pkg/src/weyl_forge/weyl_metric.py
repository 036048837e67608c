"""Full static vacuum solution generated by a harmonic potential nu.

In Weyl canonical coordinates the metric is

    g = u^-2 [ e^(2 lambda) (dr^2 + dz^2) + r^2 dphi^2 ],   u = e^nu,

with lambda fixed by the closed 1-form
    d lambda = r (nu_r^2 - nu_z^2) dr + 2 r nu_r nu_z dz
and lambda -> 0 at infinity.

On the axis the 1-form vanishes, so lambda is identically zero on any axis
ray that reaches infinity without meeting the support.  Paths therefore
start on the axis above (or below) the whole support, where lambda = 0
holds exactly and no far-field tail estimate is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate

from . import spectral
from .errors import PathBlocked, PointOnSupport
from .harmonic_field import HarmonicField
from .profile_geometry import ProfileCurve


@dataclass(frozen=True)
class SolutionConfig:
    r_anchor_factor: float = 50.0
    quad_tol: float = 1e-10

    @classmethod
    def from_dict(cls, doc):
        return cls(**{k: float(doc[k]) for k in cls.__dataclass_fields__ if k in doc})


@dataclass(frozen=True)
class LambdaValue:
    value: float
    error_budget: float
    path: str


@dataclass(frozen=True, eq=False)
class WeylSolution:
    field: HarmonicField = dc_field(default_factory=HarmonicField.zero)
    config: SolutionConfig = dc_field(default_factory=SolutionConfig)

    @classmethod
    def flat(cls):
        return cls(HarmonicField.zero())

    @classmethod
    def from_measure(cls, measure, config=None):
        return cls(HarmonicField.from_measure(measure), config or SolutionConfig())

    @property
    def is_flat(self):
        return self.field.is_zero

    # -- potentials ------------------------------------------------------------
    def nu_jet(self, r, z):
        return self.field.jet(r, z)

    def lambda_gradient(self, r, z):
        j = self.field.jet(r, z)
        r = np.abs(np.asarray(r, dtype=float))
        return r * (j[1] ** 2 - j[2] ** 2), 2.0 * r * j[1] * j[2]

    # -- lambda by path quadrature ----------------------------------------------
    def _path_scale(self):
        iv = self.field.support_interval()
        lo, hi = iv
        return lo, hi, max(hi - lo, 1.0)

    def _leg(self, p0, p1):
        (r0, z0), (r1, z1) = p0, p1
        tol = self.config.quad_tol
        if r0 == r1 and z0 == z1:
            return 0.0, 0.0
        if z0 == z1:
            def f(r):
                j = self.field.jet(r, z0)
                return r * (j[1] ** 2 - j[2] ** 2)
            a, b = r0, r1
        elif r0 == r1:
            if r0 == 0.0:
                return 0.0, 0.0
            def f(z):
                j = self.field.jet(r0, z)
                return 2.0 * r0 * j[1] * j[2]
            a, b = z0, z1
        else:
            raise ValueError("path legs must be axis-parallel")
        val, err = integrate.quad(lambda s: float(f(s)), a, b, epsabs=tol, epsrel=tol, limit=500)
        return val, err

    def path_points(self, r, z, route="top"):
        """Polyline from an axis anchor where lambda = 0 to the target (r, z)."""
        lo, hi, ell = self._path_scale()
        r_far = max(r, ell)
        if route == "top":
            z_anchor = max(hi, z) + ell
        elif route == "bottom":
            z_anchor = min(lo, z) - ell
        elif route == "wide":
            r_far = max(r, self.config.r_anchor_factor * (self.field.measure.support_radius() + 1.0))
            z_anchor = max(hi, z) + ell
        else:
            raise ValueError(f"unknown route {route!r}")
        return [(0.0, z_anchor), (r_far, z_anchor), (r_far, z), (r, z)]

    def lambda_eval(self, r, z, route="top", with_budget=False):
        r = abs(float(r))
        z = float(z)
        if self.is_flat:
            out = LambdaValue(0.0, 0.0, route)
            return out if with_budget else 0.0
        measure = self.field.measure
        d = float(measure.distance_to_support(r, z))
        eps = measure.support_eps()
        if d <= eps:
            raise PointOnSupport(f"point (r={r:.6g}, z={z:.6g}) lies on the measure support")
        if d <= 2.0 * eps:
            raise PathBlocked("target closer to the support than the path clearance")
        lo, hi, _ = self._path_scale()
        if r == 0.0 and (z > hi or z < lo):
            out = LambdaValue(0.0, 0.0, "axis")
            return out if with_budget else 0.0
        pts = self.path_points(r, z, route)
        total, budget = 0.0, 0.0
        for p0, p1 in zip(pts[:-1], pts[1:]):
            v, e = self._leg(p0, p1)
            total += v
            budget += e
        out = LambdaValue(total, budget, route)
        return out if with_budget else total

    def cone_angle_defect(self, axis_z):
        """lambda on the axis; zero means the axis is regular there."""
        return self.lambda_eval(0.0, axis_z)

    # -- lambda along a profile --------------------------------------------------
    def lambda_on_curve(self, curve: ProfileCurve, jet=None):
        """lambda at the curve nodes by integrating d lambda along the curve.

        The north-pole value comes from the axis anchor (zero when the pole
        lies above the support); the rest is the spectral running integral
        of lambda_r r' + lambda_z z'.
        """
        if self.is_flat:
            return np.zeros(curve.n)
        if jet is None:
            jet = self.field.jet(curve.r, curve.z)
        lam_r = curve.r * (jet[1] ** 2 - jet[2] ** 2)
        lam_z = 2.0 * curve.r * jet[1] * jet[2]
        integrand = lam_r * curve.r1 + lam_z * curve.z1
        lam0 = self.lambda_eval(0.0, float(curve.z[0]))
        return lam0 + spectral.cumulative_integral(integrand)

    def surface_fields(self, curve: ProfileCurve):
        jet = self.field.jet(curve.r, curve.z)
        lam = self.lambda_on_curve(curve, jet)
        return {
            "nu": jet[0], "nu_r": jet[1], "nu_z": jet[2],
            "nu_rr": jet[3], "nu_rz": jet[4], "nu_zz": jet[5],
            "lam": lam,
        }

    # -- metric ---------------------------------------------------------------
    def metric_components(self, r, z):
        """(g_rr, g_phiphi, u, f) with g_zz = g_rr and f = r / u."""
        r = abs(float(r))
        nu = float(self.field.jet(r, float(z))[0])
        lam = self.lambda_eval(r, z)
        u = np.exp(nu)
        return (float(np.exp(2.0 * (lam - nu))), float(np.exp(-2.0 * nu) * r * r), float(u), float(r / u))

    def adm_mass(self):
        return self.field.decay_mass


def lambda_eval(solution: WeylSolution, point, route="top"):
    return solution.lambda_eval(point[0], point[1], route=route)


def cone_angle_defect(solution: WeylSolution, axis_z):
    return solution.cone_angle_defect(axis_z)


def metric_components(solution: WeylSolution, point):
    return solution.metric_components(point[0], point[1])


def adm_mass(solution: WeylSolution):
    return solution.adm_mass()
