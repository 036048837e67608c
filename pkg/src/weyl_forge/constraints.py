"""Vacuum constraint identities on (solution, profile) pairs.

Checks, on the boundary surface of a Weyl solution,

    Hamiltonian:  2 u^-1 (Lap_S u + H N(u)) = |A|^2 - H^2 + s_gamma
    momentum:     delta(u A) + u dH = -d N(u)     (theta component)

and, at interior points, the trace of the conformal system
    s_gt = 2 |d nu|^2_gt,   gt = u^2 g = e^(2 lambda)(dr^2 + dz^2) + r^2 dphi^2.

Everything ambient (A, N(u), u_theta, beta_theta) is closed-form in the jets
of nu and lambda.  Only the remaining theta-derivatives of surface fields
are discretized.  By default that uses 6th-order finite differences on a
uniform theta grid, so the verifier does not share the production
pipeline's spectral differentiation and its convergence order is
observable above roundoff.
Convention: s_gamma = 2 K_gamma, delta = -div.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import spectral
from .profile_geometry import ProfileCurve


# ---------------------------------------------------------------------------
# theta-differentiation for the verifier
# ---------------------------------------------------------------------------

def fornberg_weights(x0, x, m):
    """Weights for derivatives 0..m at x0 from nodes x (Fornberg 1988)."""
    n = len(x)
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


_FD_CACHE = {}


def fd_matrix(theta, deriv_order, accuracy=6):
    key = (theta.tobytes(), deriv_order, accuracy)
    if key not in _FD_CACHE:
        n = len(theta)
        width = accuracy + deriv_order
        D = np.zeros((n, n))
        for i in range(n):
            lo = min(max(i - width // 2, 0), n - width)
            idx = np.arange(lo, lo + width)
            D[i, idx] = fornberg_weights(theta[i], theta[idx], deriv_order)[deriv_order]
        _FD_CACHE[key] = D
    return _FD_CACHE[key]


class ThetaDiff:
    def __init__(self, theta, method="fd", fd_order=6):
        self.theta = theta
        self.method = method
        self.fd_order = fd_order

    def __call__(self, f, order=1):
        if self.method == "spectral":
            return spectral.deriv(f, order)
        if self.method == "fd":
            return fd_matrix(self.theta, order, self.fd_order) @ f
        raise ValueError(f"unknown differentiation method {self.method!r}")


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurfaceJet:
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    beta_theta: np.ndarray
    A_thth: np.ndarray
    A_phph: np.ndarray
    H: np.ndarray
    u: np.ndarray
    Nu: np.ndarray
    lap_u: np.ndarray
    K: np.ndarray
    diff_method: str = "fd"
    fd_order: int = 6

    @property
    def s_gamma(self):
        return 2.0 * self.K

    @property
    def a(self):
        return self.A_thth / self.alpha**2

    @property
    def b(self):
        """A_phiphi / beta^2 with its pole limit."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.A_phph / self.beta**2
        out[0], out[-1] = self.a[0], self.a[-1]
        return out

    @property
    def trace_A(self):
        return self.a + self.b

    @property
    def n(self):
        return self.theta.size

    def differ(self):
        return ThetaDiff(self.theta, self.diff_method, self.fd_order)


@dataclass(frozen=True)
class ResidualReport:
    identity: str
    sup_residual: float
    l2_residual: float
    n: int
    refinement_slope: float | None = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _report(name, res, n):
    res = np.abs(np.asarray(res, dtype=float))
    if res.size == n and n >= 2:
        l2 = float(np.sqrt(spectral.integrate(res**2) / np.pi))
    else:
        l2 = float(np.sqrt(np.mean(res**2)))
    return ResidualReport(name, float(np.max(res)), l2, int(n))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _verifier_grid(curve: ProfileCurve, method):
    if method == "fd":
        return np.linspace(0.0, np.pi, curve.n)
    if method == "spectral":
        return curve.theta
    raise ValueError(f"unknown differentiation method {method!r}")


def _curve_samples(curve: ProfileCurve, theta):
    rs = spectral.chopped_series(curve.r)
    zs = spectral.chopped_series(curve.z)
    r = rs(theta)
    r[0] = r[-1] = 0.0
    return r, rs.deriv(1)(theta), rs.deriv(2)(theta), zs(theta), zs.deriv(1)(theta), zs.deriv(2)(theta)


def surface_jet(solution, curve: ProfileCurve, diff_method="fd", fd_order=6,
                nu_scale_in_H=1.0, normal_u_perturbation=None) -> SurfaceJet:
    """Assemble the boundary quantities entering the constraint identities.

    With ``diff_method="fd"`` the jet lives on a uniform theta grid with as
    many nodes as the curve; ``"spectral"`` keeps the curve's Lobatto nodes.
    ``nu_scale_in_H`` and ``normal_u_perturbation`` (a function of theta
    added to N(u)) exist only to build negative controls.
    """
    theta = _verifier_grid(curve, diff_method)
    r, r1, r2, z, z1, z2 = _curve_samples(curve, theta)
    sp = np.hypot(r1, z1)
    n_r, n_z = -z1 / sp, r1 / sp
    kappa = (z1 * r2 - r1 * z2) / sp**3
    with np.errstate(divide="ignore", invalid="ignore"):
        nr_over_r = n_r / r
    nr_over_r[0], nr_over_r[-1] = kappa[0], kappa[-1]

    jet = solution.field.jet(r, z)
    nu, nu_r, nu_z = jet[0], jet[1], jet[2]
    lam = spectral.interpolate(solution.lambda_on_curve(curve), theta)
    lam_r = r * (nu_r**2 - nu_z**2)
    lam_z = 2.0 * r * nu_r * nu_z

    P = np.exp(lam - nu)
    alpha = P * sp
    beta = r * np.exp(-nu)
    u = np.exp(nu)
    N_nu = n_r * nu_r + n_z * nu_z
    N_lam = n_r * lam_r + n_z * lam_z

    # A(X, Y) = g(grad_X N, Y), from the Christoffel symbols of the Weyl metric
    a = (kappa + N_lam - N_nu) / P
    b = (nr_over_r - N_nu) / P
    A_thth = a * alpha**2
    A_phph = b * beta**2

    # H through the conformal-change formula, a separate route from a + b
    s = nu_scale_in_H
    H = (kappa + nr_over_r + N_lam - 2.0 * s * N_nu) / P

    Nu = u * N_nu / P
    if normal_u_perturbation is not None:
        Nu = Nu + normal_u_perturbation(theta)

    d = ThetaDiff(theta, diff_method, fd_order)
    chain = nu_r * r1 + nu_z * z1
    u_th = u * chain
    beta_th = np.exp(-nu) * (r1 - r * chain)

    flux = beta * u_th / alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        lap_u = d(flux) / (alpha * beta)
    u_thth = d(u_th)
    for k in (0, -1):
        lap_u[k] = 2.0 * u_thth[k] / alpha[k] ** 2

    q = beta_th / alpha
    q1 = d(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = -q1 / (alpha * beta)
    q2 = d(q, 2)
    for k in (0, -1):
        K[k] = -q2[k] / (alpha[k] * beta_th[k])

    return SurfaceJet(theta, alpha, beta, beta_th, A_thth, A_phph, H, u, Nu,
                      lap_u, K, diff_method, fd_order)


def hamiltonian_defect(jet: SurfaceJet) -> np.ndarray:
    """Nodal values of 2 u^-1 (Lap u + H N(u)) - (|A|^2 - H^2 + s_gamma)."""
    a, b, H = jet.a, jet.b, jet.H
    lhs = 2.0 * (jet.lap_u + H * jet.Nu) / jet.u
    rhs = a**2 + b**2 - H**2 + jet.s_gamma
    return lhs - rhs


def momentum_defect(jet: SurfaceJet) -> np.ndarray:
    """Nodal theta component of delta(u A) + u dH + d N(u)."""
    d = jet.differ()
    a, b, u = jet.a, jet.b, jet.u
    with np.errstate(divide="ignore", invalid="ignore"):
        twist = jet.beta_theta / jet.beta * u * (a - b)
    amb = d(u * (a - b))
    for k in (0, -1):
        twist[k] = amb[k]
    div_uA = d(u * a) + twist
    return -div_uA + u * d(jet.H) + d(jet.Nu)


def hamiltonian_residual(jet: SurfaceJet) -> ResidualReport:
    return _report("hamiltonian", hamiltonian_defect(jet), jet.n)


def momentum_residual(jet: SurfaceJet) -> ResidualReport:
    return _report("momentum", momentum_defect(jet), jet.n)


def trace_identity_defect(jet: SurfaceJet) -> float:
    return float(np.max(np.abs(jet.H - jet.trace_A)))


def conformal_scalar_residual(solution, points) -> ResidualReport:
    """Residual of s_gt - 2|d nu|^2_gt at interior points (r, z).

    For gt = e^(2 lambda)(dr^2 + dz^2) + r^2 dphi^2 the scalar curvature is
    -2 e^(-2 lambda)(lambda_rr + lambda_zz) (the r dphi factor is
    Euclidean-harmonic), with the lambda Hessian from its defining 1-form.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    res = []
    for r, z in pts:
        j = solution.field.jet(r, z)
        nu_r, nu_z, nu_rr, nu_rz, nu_zz = j[1], j[2], j[3], j[4], j[5]
        lam_rr = (nu_r**2 - nu_z**2) + 2.0 * r * (nu_r * nu_rr - nu_z * nu_rz)
        lam_zz = 2.0 * r * (nu_rz * nu_z + nu_r * nu_zz)
        lam = solution.lambda_eval(r, z)
        e = np.exp(-2.0 * lam)
        scal = -2.0 * e * (lam_rr + lam_zz)
        grad2 = e * (nu_r**2 + nu_z**2)
        res.append(float(scal - 2.0 * grad2))
    return _report("conformal_trace", np.array(res), len(res))


def refinement_study(solution, curve: ProfileCurve, n_coarse=65, n_fine=129, **jet_kwargs):
    """Hamiltonian and momentum reports on two grids with the log-log slope."""
    out = {}
    reports = {}
    for n in (n_coarse, n_fine):
        c = curve.resampled(n)
        jet = surface_jet(solution, c, **jet_kwargs)
        reports[n] = (hamiltonian_residual(jet), momentum_residual(jet))
    for i, name in enumerate(("hamiltonian", "momentum")):
        rc, rf = reports[n_coarse][i], reports[n_fine][i]
        if rc.sup_residual > 0 and rf.sup_residual > 0:
            slope = float(np.log(rc.sup_residual / rf.sup_residual) / np.log((n_fine - 1) / (n_coarse - 1)))
        else:
            slope = float("inf")
        out[name] = (rc, ResidualReport(rf.identity, rf.sup_residual, rf.l2_residual, rf.n, slope))
    return out
