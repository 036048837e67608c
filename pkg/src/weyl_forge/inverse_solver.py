"""Numerical inversion of the Weyl-Bartnik boundary map.

Unknowns are a profile curve in modal form,

    r(theta) = sum_k a_k sin(k theta),   z(theta) = sum_k b_k cos(k theta),  k >= 1,

which builds the pole conditions in, plus strengths c_i of axis sources
nu = sum c_i / |x - y_i|.  The source positions y_i are spread over the
chord between the poles of the decoded curve (with a margin), so they move
with the curve and stay interior.  The forward map is then invariant under
z-translation; the constant z mode is not an unknown and decoded curves are
shifted so that int z dv_gamma = 0.

The inverse problem is solved by Levenberg-Marquardt on the stacked residual
[w_a (alpha - alpha*), w_b (beta - beta*), w_H (H - H*)] with a forward
difference Jacobian.  Non-convergence is reported, never raised.
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import spectral
from .constraints import hamiltonian_residual, momentum_residual, surface_jet
from .errors import InvalidCurve, NotMorse, PointOnSupport, SourceCollision, WeylForgeError
from .harmonic_field import HarmonicField, axis_source_positions
from .profile_geometry import BoundaryData, ProfileCurve, induced_boundary_data
from .weyl_metric import WeylSolution

SCAN_COLUMNS = ("lambda_or_h", "converged", "resid_sup", "resid_l2", "min_u", "min_H",
                "jac_sigma_min", "iters", "seconds")

STATUS_CONVERGED = "converged"
STATUS_FLOOR = "residual_floor"
STATUS_DEGENERATE = "degenerate_geometry"
STATUS_CAP = "iteration_cap"


@dataclass(frozen=True)
class InverseConfig:
    tol_resid: float = 1e-8
    tol_step: float = 1e-12
    max_iter: int = 200
    stall_window: int = 40           # stop if the sup residual has not halved over this many steps (0: never)
    n_curve_modes: int = 24          # split evenly between r and z
    n_sources: int = 24
    weight_H: float | str = "auto"   # "auto" means mean of the target alpha
    source_margin: float = 0.15
    source_layout: str = "uniform"   # or "chebyshev" (clustered toward the poles)
    relocation_retries: int = 3
    fd_step: float = 1e-6
    damping0: float = 1e-3
    degenerate_tol: float = 1e-4
    cert_nodes: int = 513
    cert_tol: float = 1e-4
    morse_mu0: float = 1e-6

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        weights = doc.pop("weights", {}) or {}
        if "H" in weights:
            doc["weight_H"] = weights["H"]
        kw = {}
        for name, f in cls.__dataclass_fields__.items():
            if name not in doc:
                continue
            val = doc[name]
            if name == "weight_H":
                kw[name] = val if val == "auto" else float(val)
            elif f.type == "int":
                kw[name] = int(val)
            elif f.type == "str":
                kw[name] = str(val)
            else:
                kw[name] = float(val)
        return cls(**kw)

    def to_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "weight_H"}
        out["weights"] = {"H": self.weight_H}
        return out

    @property
    def n_r_modes(self):
        return (self.n_curve_modes + 1) // 2

    @property
    def n_z_modes(self):
        return self.n_curve_modes // 2


# ---------------------------------------------------------------------------
# target and unknowns
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BartnikTarget:
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    H: np.ndarray
    provenance: str = "synthetic"

    def __post_init__(self):
        if self.provenance not in ("synthetic", "forward-generated", "external file"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        data = self.as_boundary_data()
        object.__setattr__(self, "theta", data.theta)
        object.__setattr__(self, "alpha", data.alpha)
        object.__setattr__(self, "beta", data.beta)
        object.__setattr__(self, "H", data.H)

    @classmethod
    def from_boundary_data(cls, data: BoundaryData, provenance="synthetic"):
        return cls(data.theta, data.alpha, data.beta, data.H, provenance)

    def as_boundary_data(self):
        return BoundaryData(self.theta, self.alpha, self.beta, self.H)

    @property
    def n(self):
        return self.theta.size

    def validate(self, tol=1e-6):
        data = self.as_boundary_data().validate(tol)
        if not np.all(np.isfinite(data.H)):
            raise InvalidCurve("H must be finite")
        if np.min(data.H) <= 0.0:
            warnings.warn(f"target mean curvature is not positive (min H = {np.min(data.H):.3e})",
                          stacklevel=2)
        return self

    def with_H(self, H):
        return BartnikTarget(self.theta, self.alpha, self.beta, np.broadcast_to(H, self.theta.shape).copy(),
                             self.provenance)


@lru_cache(maxsize=32)
def _mode_matrices(n, n_r, n_z):
    theta = spectral.lobatto_theta(n)
    S = np.sin(np.outer(theta, np.arange(1, n_r + 1)))
    C = np.cos(np.outer(theta, np.arange(1, n_z + 1)))
    S[0] = S[-1] = 0.0
    return S, C


@dataclass(frozen=True, eq=False)
class UnknownVector:
    """Modal curve coefficients and axis-source strengths."""

    r_modes: np.ndarray
    z_modes: np.ndarray
    strengths: np.ndarray
    margin: float = 0.15
    layout: str = "uniform"

    def __post_init__(self):
        for name in ("r_modes", "z_modes", "strengths"):
            arr = np.array(getattr(self, name), dtype=float).ravel()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self):
        return self.r_modes.size + self.z_modes.size + self.strengths.size

    def vector(self):
        return np.concatenate([self.r_modes, self.z_modes, self.strengths])

    def from_vector(self, x):
        a, b = self.r_modes.size, self.z_modes.size
        return UnknownVector(x[:a], x[a:a + b], x[a + b:], self.margin, self.layout)

    @classmethod
    def from_curve(cls, curve: ProfileCurve, n_r, n_z, strengths=None, n_sources=0, margin=0.15,
                   layout="uniform"):
        """Least-squares modal projection of a curve (the constant z mode is dropped)."""
        S, C = _mode_matrices(curve.n, n_r, n_z)
        a = np.linalg.lstsq(S[1:-1], curve.r[1:-1], rcond=None)[0]
        C0 = np.hstack([np.ones((curve.n, 1)), C])
        b = np.linalg.lstsq(C0, curve.z, rcond=None)[0][1:]
        if strengths is None:
            strengths = np.zeros(n_sources)
        return cls(a, b, strengths, margin, layout)

    @classmethod
    def sphere(cls, radius, n_r, n_z, n_sources, margin=0.15, layout="uniform"):
        a = np.zeros(n_r)
        b = np.zeros(n_z)
        a[0] = b[0] = radius
        return cls(a, b, np.zeros(n_sources), margin, layout)

    def perturbed(self, rel, rng):
        """Each parameter multiplied by 1 + rel * U(-1, 1)."""
        x = self.vector()
        return self.from_vector(x * (1.0 + rel * rng.uniform(-1.0, 1.0, x.size)))

    def raw_curve(self, n):
        S, C = _mode_matrices(n, self.r_modes.size, self.z_modes.size)
        return ProfileCurve(spectral.lobatto_theta(n), S @ self.r_modes, C @ self.z_modes)

    def field_for(self, curve: ProfileCurve):
        if self.strengths.size == 0:
            return HarmonicField.zero()
        zs = axis_source_positions(curve, self.strengths.size, self.margin, self.layout)
        return HarmonicField.from_sources(zs, self.strengths)

    def decode(self, n=65, validate=True):
        """Gauge-normalized (curve, solution): the z-centroid of dv_gamma is zero."""
        curve = self.raw_curve(n)
        if validate:
            curve.validate()
        solution = WeylSolution(self.field_for(curve))
        data = _forward_data(solution, curve)
        w = data.alpha * data.beta
        shift = -spectral.integrate(curve.z * w) / spectral.integrate(w)
        curve = curve.shifted(shift)
        return curve, WeylSolution(self.field_for(curve)), data

    def to_dict(self):
        return {"r_modes": self.r_modes.tolist(), "z_modes": self.z_modes.tolist(),
                "strengths": self.strengths.tolist(), "margin": self.margin,
                "layout": self.layout}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["r_modes"], doc["z_modes"], doc["strengths"], float(doc.get("margin", 0.15)),
                   str(doc.get("layout", "uniform")))


def _forward_data(solution, curve):
    try:
        return induced_boundary_data(solution, curve)
    except PointOnSupport as exc:
        raise SourceCollision(str(exc)) from exc


def bartnik_forward(unknowns: UnknownVector, n=65) -> BoundaryData:
    """Bartnik data (alpha, beta, H) of the decoded (curve, sources) pair."""
    return unknowns.decode(n)[2]


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SolveReport:
    converged: bool
    status: str
    resid_sup: float
    resid_l2: float
    block_sup: dict
    block_l2: dict
    history: list
    jac_sigma_min: float
    jac_sigma_max: float
    min_u: float
    min_H: float
    iterations: int
    wall_time: float
    unknowns: UnknownVector | None = None
    certification: dict | None = None
    curve: ProfileCurve | None = dc_field(default=None, repr=False)
    solution: WeylSolution | None = dc_field(default=None, repr=False)

    @property
    def degenerate(self):
        return self.min_u < _DEGENERATE_TOL or self.min_H < _DEGENERATE_TOL

    def to_dict(self, timing=True):
        out = {
            "converged": self.converged, "status": self.status,
            "resid_sup": self.resid_sup, "resid_l2": self.resid_l2,
            "block_sup": self.block_sup, "block_l2": self.block_l2,
            "history": list(self.history),
            "jac_sigma_min": self.jac_sigma_min, "jac_sigma_max": self.jac_sigma_max,
            "min_u": self.min_u, "min_H": self.min_H, "iterations": self.iterations,
            "unknowns": None if self.unknowns is None else self.unknowns.to_dict(),
            "certification": self.certification,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


_DEGENERATE_TOL = 1e-4


# ---------------------------------------------------------------------------
# Levenberg-Marquardt
# ---------------------------------------------------------------------------

class _Problem:
    def __init__(self, target: BartnikTarget, template: UnknownVector, cfg: InverseConfig):
        self.target = target
        self.template = template
        self.cfg = cfg
        w_H = float(np.mean(target.alpha)) if cfg.weight_H == "auto" else float(cfg.weight_H)
        self.w = (1.0, 1.0, w_H)
        self.n = target.n

    def evaluate(self, x):
        """(weighted residual, data, curve, solution) or None for an invalid decode."""
        unk = self.template.from_vector(x)
        try:
            curve = unk.raw_curve(self.n).validate()
            solution = WeylSolution(unk.field_for(curve))
            data = _forward_data(solution, curve)
        except WeylForgeError:
            return None
        if not (np.all(np.isfinite(data.alpha)) and np.all(np.isfinite(data.H))):
            return None
        t, (wa, wb, wh) = self.target, self.w
        res = np.concatenate([wa * (data.alpha - t.alpha), wb * (data.beta - t.beta), wh * (data.H - t.H)])
        return res, data, curve, solution

    def jacobian(self, x, f0):
        J = np.empty((f0.size, x.size))
        for j in range(x.size):
            h = self.cfg.fd_step * (1.0 + abs(x[j]))
            for sgn in (1.0, -1.0):
                xp = x.copy()
                xp[j] += sgn * h
                ev = self.evaluate(xp)
                if ev is not None:
                    J[:, j] = sgn * (ev[0] - f0) / h
                    break
            else:
                J[:, j] = 0.0
        return J


def _blocks(res, n, w):
    parts = [res[i * n:(i + 1) * n] / w[i] for i in range(3)]
    names = ("alpha", "beta", "H")
    sup = {k: float(np.max(np.abs(p))) for k, p in zip(names, parts)}
    l2 = {k: float(np.sqrt(np.mean(p**2))) for k, p in zip(names, parts)}
    return sup, l2


def _lm(problem: _Problem, x0, cfg: InverseConfig):
    ev = problem.evaluate(x0)
    if ev is None:
        raise SourceCollision("initial unknowns do not decode to a valid configuration")
    x, f = x0.copy(), ev[0]
    cost = 0.5 * float(f @ f)
    history = [float(np.max(np.abs(f)))]
    mu, growth = None, 2.0
    status = STATUS_CAP
    J = None
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if history[-1] <= cfg.tol_resid:
            status, it = STATUS_CONVERGED, it - 1
            break
        J = problem.jacobian(x, f)
        A = J.T @ J
        g = J.T @ f
        d = np.maximum(np.diag(A), 1e-12 * max(float(np.max(np.diag(A))), 1e-300))
        if mu is None:
            mu = cfg.damping0
        accepted = False
        while True:
            # scaled augmented system keeps the step solve well conditioned
            aug = np.vstack([J, np.diag(np.sqrt(mu * d))])
            step = -np.linalg.lstsq(aug, np.concatenate([f, np.zeros(x.size)]), rcond=None)[0]
            small = np.max(np.abs(step) / (1.0 + np.abs(x))) <= cfg.tol_step
            trial = problem.evaluate(x + step)
            if trial is not None:
                f_new = trial[0]
                cost_new = 0.5 * float(f_new @ f_new)
                predicted = -(g @ step) - 0.5 * float(step @ (A @ step))
                rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
            else:
                rho = -1.0
            if rho > 0.0:
                x, f, cost = x + step, f_new, cost_new
                mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                growth = 2.0
                accepted = True
                break
            mu *= growth
            growth *= 2.0
            if small or mu > 1e16:
                break
        history.append(float(np.max(np.abs(f))))
        if not accepted or small:
            status = STATUS_CONVERGED if history[-1] <= cfg.tol_resid else STATUS_FLOOR
            break
        w = cfg.stall_window
        if w and len(history) > w and history[-1] > 0.5 * history[-1 - w] and history[-1] > cfg.tol_resid:
            status = STATUS_FLOOR
            break
    else:
        if history[-1] <= cfg.tol_resid:
            status = STATUS_CONVERGED
    return x, f, history, status, it


def _min_norm_polish(problem: _Problem, x, f, cfg, sweeps=3, rcond=1e-4):
    """Gauss-Newton steps that also drop source strengths the data cannot see.

    With many axis sources some strength combinations change the boundary
    data only at roundoff level.  Each sweep takes the truncated-SVD
    Gauss-Newton correction and, inside the numerical null space, the
    combination that minimizes |strengths|.  Sweeps that raise the
    residual are rejected.
    """
    n_s = problem.template.strengths.size
    if n_s == 0:
        return x, f
    sel = np.zeros(x.size, dtype=bool)
    sel[x.size - n_s:] = True
    for _ in range(sweeps):
        J = problem.jacobian(x, f)
        U, sv, Vt = np.linalg.svd(J, full_matrices=False)
        keep = sv > rcond * sv[0]
        step = -Vt[keep].T @ ((U[:, keep].T @ f) / sv[keep])
        null = Vt[~keep].T
        if null.shape[1]:
            target = x[sel] + step[sel]
            coef = np.linalg.lstsq(null[sel], -target, rcond=None)[0]
            step = step + null @ coef
        trial = problem.evaluate(x + step)
        if trial is None or np.max(np.abs(trial[0])) > np.max(np.abs(f)):
            break
        x, f = x + step, trial[0]
    return x, f


def _certify(solution, curve, cfg):
    fine = curve.resampled(cfg.cert_nodes)
    jet = surface_jet(solution, fine)
    ham = hamiltonian_residual(jet).sup_residual
    mom = momentum_residual(jet).sup_residual
    return {"hamiltonian": ham, "momentum": mom, "tol": cfg.cert_tol,
            "passed": bool(ham <= cfg.cert_tol and mom <= cfg.cert_tol)}


def _initial_valid(target, initial, cfg):
    """Relocate sources (larger margins) until the initial configuration decodes."""
    margin = initial.margin
    for attempt in range(cfg.relocation_retries + 1):
        unk = replace(initial, margin=margin)
        try:
            curve = unk.raw_curve(target.n).validate()
            _forward_data(WeylSolution(unk.field_for(curve)), curve)
            return unk
        except SourceCollision:
            margin += 0.1
        except InvalidCurve as exc:
            raise SourceCollision(f"initial curve is invalid: {exc}") from exc
    raise SourceCollision(f"sources collide with the curve after {cfg.relocation_retries} relocations")


def solve_bartnik_inverse(target: BartnikTarget, initial: UnknownVector,
                          config: InverseConfig | None = None) -> SolveReport:
    """Fit (curve, source strengths) whose Bartnik data match ``target``.

    Always returns a report; only an initial guess that cannot be made
    valid by relocating the sources raises SourceCollision.
    """
    cfg = config or InverseConfig()
    t0 = time.perf_counter()
    initial = _initial_valid(target, initial, cfg)
    problem = _Problem(target, initial, cfg)
    x, f, history, status, iters = _lm(problem, initial.vector(), cfg)
    if status == STATUS_CONVERGED:
        x, f = _min_norm_polish(problem, x, f, cfg)

    unknowns = initial.from_vector(x)
    curve, solution, data = unknowns.decode(target.n, validate=False)
    J = problem.jacobian(x, f)
    sv = np.linalg.svd(J, compute_uv=False)
    min_u = float(np.min(np.exp(solution.field.jet(curve.r, curve.z)[0])))
    min_H = float(np.min(data.H))
    sup, l2 = _blocks(f, target.n, problem.w)
    resid_sup = float(np.max(np.abs(f)))
    converged = status == STATUS_CONVERGED
    if not converged and (min_u < cfg.degenerate_tol or min_H < cfg.degenerate_tol):
        status = STATUS_DEGENERATE
    cert = _certify(solution, curve, cfg) if converged else None
    return SolveReport(
        converged=converged, status=status, resid_sup=resid_sup,
        resid_l2=float(np.sqrt(np.mean(f**2))), block_sup=sup, block_l2=l2,
        history=history, jac_sigma_min=float(sv[-1]), jac_sigma_max=float(sv[0]),
        min_u=min_u, min_H=min_H, iterations=int(iters),
        wall_time=time.perf_counter() - t0, unknowns=unknowns, certification=cert,
        curve=curve, solution=solution,
    )


# ---------------------------------------------------------------------------
# initial guesses
# ---------------------------------------------------------------------------

def initial_unknowns(target: BartnikTarget, config: InverseConfig | None = None) -> UnknownVector:
    """Flat isometric embedding of the target metric, or the sphere of equal area.

    Source strengths start at zero.
    """
    from .embedding import MetricProfile, embed_profile

    cfg = config or InverseConfig()
    try:
        rep = embed_profile(MetricProfile(target.theta, target.alpha, target.beta)).representatives[0]
        return UnknownVector.from_curve(rep.curve, cfg.n_r_modes, cfg.n_z_modes,
                                        n_sources=cfg.n_sources, margin=cfg.source_margin,
                                        layout=cfg.source_layout)
    except WeylForgeError:
        area = 2.0 * np.pi * spectral.integrate(target.alpha * target.beta)
        return UnknownVector.sphere(math.sqrt(area / (4.0 * np.pi)), cfg.n_r_modes, cfg.n_z_modes,
                                    cfg.n_sources, cfg.source_margin, cfg.source_layout)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

def _solve_job(args):
    target, initial, cfg = args
    return solve_bartnik_inverse(target, initial, cfg)


def _run_scan(targets, initial, cfg, continuation, jobs):
    if not continuation and jobs > 1 and len(targets) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_job, [(t, initial, cfg) for t in targets]))
    reports = []
    guess = initial
    for t in targets:
        rep = solve_bartnik_inverse(t, guess, cfg)
        reports.append(rep)
        if continuation and rep.converged:
            guess = rep.unknowns
    return reports


def _gamma_target(gamma, H):
    theta, alpha, beta = gamma
    return BartnikTarget(theta, alpha, beta, np.broadcast_to(np.asarray(H, dtype=float), np.shape(theta)).copy())


def h_scaling_scan(gamma_target, H_base, lambda_grid, config: InverseConfig | None = None,
                   initial: UnknownVector | None = None, continuation=True, jobs=1):
    """Solve for (gamma, lambda H_base) over an ascending grid of positive lambda.

    Solves run from the largest lambda downwards, each warm-started from the
    last converged one.  Reports come back in the order of ``lambda_grid``.
    """
    cfg = config or InverseConfig()
    grid = [float(v) for v in lambda_grid]
    if any(v <= 0.0 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be positive and strictly ascending")
    if not grid:
        return []
    order = sorted(range(len(grid)), key=lambda i: -grid[i])
    targets = [_gamma_target(gamma_target, grid[i] * np.asarray(H_base, dtype=float)) for i in order]
    if initial is None:
        initial = initial_unknowns(targets[0], cfg)
    reports = _run_scan(targets, initial, cfg, continuation, jobs)
    out = [None] * len(grid)
    for i, rep in zip(order, reports):
        out[i] = rep
    return out


def degradation_threshold(values, reports):
    """Smallest value reached from the top of the grid before the first failure."""
    best = None
    for v, rep in sorted(zip(values, reports), key=lambda p: -p[0]):
        if not rep.converged:
            break
        best = v
    return best


def gauss_curvature(theta, alpha, beta):
    """K = -(beta'/alpha)' / (alpha beta), with pole limits -(beta'/alpha)'' / (alpha beta')."""
    q = spectral.deriv(beta) / alpha
    q1 = spectral.deriv(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = -q1 / (alpha * beta)
    q2 = spectral.deriv(q, 2)
    b1 = spectral.deriv(beta)
    for k in (0, -1):
        K[k] = -q2[k] / (alpha[k] * b1[k])
    return K


def morse_check(theta, alpha, beta, mu0=1e-6):
    """Nondegenerate critical points of K_gamma modulo the rotation, or NotMorse.

    An axisymmetric K is a function of theta.  The poles are always
    critical; an interior zero of K_theta is a critical circle.  A
    non-constant axisymmetric K on the sphere always has such a circle,
    so nondegeneracy is required transversally (Morse-Bott): every critical
    point needs |K_theta_theta| / alpha^2 >= mu0 * max|K|.
    Returns [(theta, hessian, kind)] with kind "pole" or "circle".
    """
    K = gauss_curvature(theta, alpha, beta)
    scale = max(float(np.max(np.abs(K))), 1e-300)
    ks = spectral.chopped_series(K, 1e-12)
    d1, d2 = ks.deriv(1), ks.deriv(2)
    a_fn = spectral.chopped_series(alpha)
    fine = np.linspace(0.0, np.pi, 8 * theta.size + 1)
    dK = d1(fine)
    if float(np.max(np.abs(dK / a_fn(fine)))) <= mu0 * scale:
        raise NotMorse("K_gamma is constant: every point is a degenerate critical point")

    def hessian(t):
        return float(d2(t)) / float(a_fn(t)) ** 2

    pts = [(0.0, hessian(0.0), "pole")]
    inner = np.nonzero((fine > 1e-3) & (fine < np.pi - 1e-3))[0]
    for i in inner[:-1]:
        if dK[i] == 0.0 or dK[i] * dK[i + 1] < 0.0:
            t_c = fine[i] if dK[i] == 0.0 else optimize.brentq(d1, fine[i], fine[i + 1], xtol=1e-14)
            pts.append((float(t_c), hessian(t_c), "circle"))
        elif (dK[i - 1] * dK[i + 1] > 0.0 and abs(dK[i]) < min(abs(dK[i - 1]), abs(dK[i + 1]))
              and abs(dK[i]) <= mu0 * scale):
            # touching zero of K_theta: a degenerate circle
            pts.append((float(fine[i]), 0.0, "circle"))
    pts.append((float(np.pi), hessian(np.pi), "pole"))
    for t_c, h, kind in pts:
        if abs(h) < mu0 * scale:
            raise NotMorse(f"degenerate critical {kind} of K_gamma at theta={t_c:.6f} (Hessian {h:.3e})")
    return pts


def small_h_probe(gamma_target, h_grid, config: InverseConfig | None = None,
                  initial: UnknownVector | None = None, continuation=True, jobs=1):
    """Solve (gamma, H = h) for a descending grid of small constant h.

    Refuses (NotMorse) unless K_gamma is a Morse function.
    """
    cfg = config or InverseConfig()
    grid = [float(v) for v in h_grid]
    if not grid:
        return []
    if any(v <= 0.0 for v in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("h grid must be positive and strictly descending")
    theta, alpha, beta = gamma_target
    morse_check(np.asarray(theta), np.asarray(alpha), np.asarray(beta), cfg.morse_mu0)
    targets = [_gamma_target(gamma_target, h) for h in grid]
    if initial is None:
        initial = initial_unknowns(targets[0], cfg)
    return _run_scan(targets, initial, cfg, continuation, jobs)


def scan_table(values, reports, timing=False):
    """CSV text with one row per grid value.

    The seconds column is left empty unless ``timing`` is set, so reruns
    are byte-identical.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for v, rep in zip(values, reports):
        w.writerow([repr(float(v)), int(rep.converged), repr(rep.resid_sup), repr(rep.resid_l2),
                    repr(rep.min_u), repr(rep.min_H), repr(rep.jac_sigma_min), rep.iterations,
                    f"{rep.wall_time:.3f}" if timing else ""])
    return buf.getvalue()
