"""Isometric embedding of axisymmetric sphere metrics alpha^2 dtheta^2 + beta^2 dphi^2.

In flat space the profile is r = beta and z' = +-sqrt(alpha^2 - beta'^2).
An immersion exists only if chi = alpha - |beta'| >= 0.  The sign of z' is
fixed negative leaving the north pole.  At an interior zero where chi
vanishes to order 2k, z' vanishes to order k.  The sign flips there exactly
when k is odd, since any other choice would leave a kink.  Intervals where
chi is identically zero are flat annuli.  The cap beyond one may be attached
on either side, which gives a continuum of non-congruent isometric surfaces.

Zeros and orders are read off W = alpha^2 - beta'^2 = chi (alpha + |beta'|).
It has the same zeros and orders as chi but no |.| kink.

The general-field version solves r = beta u(r, z) together with
e^(2 lambda)(r'^2 + z'^2) = u^2 alpha^2 by fixed-point iteration along the
whole curve.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

from . import spectral
from .errors import (Inadmissible, InvalidCurve, NoConvergence, OrderUndetectable, RootFindFailure,
                     WeylForgeError)
from .profile_geometry import ProfileCurve, _read_columns


@dataclass(frozen=True)
class EmbeddingConfig:
    adm_tol: float = 1e-9          # chi >= -adm_tol * max(alpha)
    flat_tol: float = 1e-10        # |chi| < flat_tol * max(alpha) marks a flat node
    flat_min_nodes: int = 5
    zero_tol: float = 1e-10        # W(theta*) <= zero_tol * max W for a zero candidate
    order_factor: float = 1e-9     # derivative threshold N^2 * order_factor * scale
    max_order: int = 8
    pairing_tol: float = 1e-8      # relative to the curve diameter
    model_tau: float = 1e-10       # local model used where W < model_tau * max W
    stable_tol: float = 1e-6
    start_modes: int = 4
    max_iter: int = 200            # residual evaluations in the general-field polish
    iter_tol: float = 1e-15
    general_tol: float = 1e-9
    continuation_steps: int = 4    # initial target-homotopy step is 1 / continuation_steps
    min_homotopy_step: float = 1.0 / 64

    @classmethod
    def from_dict(cls, doc):
        return cls(**{k: doc[k] for k in cls.__dataclass_fields__ if k in doc})


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricProfile:
    theta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if not np.allclose(theta, spectral.lobatto_theta(theta.size), atol=1e-9, rtol=0):
            raise InvalidCurve("theta must be the Chebyshev-Lobatto grid on [0, pi]")
        for name in ("theta", "alpha", "beta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != theta.shape or not np.all(np.isfinite(arr)):
                raise InvalidCurve(f"{name} must be finite and match the grid")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_functions(cls, alpha_fn, beta_fn, n=65):
        theta = spectral.lobatto_theta(n)
        beta = np.asarray(beta_fn(theta), dtype=float)
        beta[0] = beta[-1] = 0.0
        return cls(theta, np.asarray(alpha_fn(theta), dtype=float), beta)

    @classmethod
    def from_boundary_data(cls, data):
        return cls(data.theta, data.alpha, data.beta)

    @property
    def n(self):
        return self.theta.size

    @cached_property
    def beta1(self):
        return spectral.deriv(self.beta)

    @property
    def chi(self):
        return self.alpha - np.abs(self.beta1)

    def pole_defect(self):
        return max(abs(abs(self.beta1[0]) - self.alpha[0]), abs(abs(self.beta1[-1]) - self.alpha[-1]))

    def validate(self, tol=1e-6):
        scale = float(np.max(self.alpha)) if self.n else 1.0
        if np.any(self.alpha <= 0.0):
            raise InvalidCurve("alpha must be positive")
        if abs(self.beta[0]) > tol * scale or abs(self.beta[-1]) > tol * scale:
            raise InvalidCurve("beta must vanish at the poles")
        if np.any(self.beta[1:-1] < 0.0):
            raise InvalidCurve("beta must be non-negative")
        if self.pole_defect() > tol * scale:
            raise InvalidCurve(f"pole condition |beta'| = alpha fails by {self.pole_defect():.3e}")
        return self

    def smoothness_order(self, max_order=8, tol=1e-6):
        """Number of theta-derivatives of alpha and beta that are spectrally stable."""
        return min(stable_order(self.alpha, max_order, tol), stable_order(self.beta, max_order, tol))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "alpha", "beta"])
        for row in zip(self.theta, self.alpha, self.beta):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        cols = _read_columns(text, ("theta", "alpha", "beta"))
        return cls(cols["theta"], cols["alpha"], cols["beta"])


@dataclass(frozen=True)
class ChiZero:
    theta: float
    order: int            # vanishing order 2k of chi
    nondegenerate: bool   # order == 2

    @property
    def flips(self):
        return (self.order // 2) % 2 == 1


@dataclass(frozen=True, eq=False)
class ChiClassification:
    theta: np.ndarray
    chi: np.ndarray
    zeros: tuple = ()
    flats: tuple = ()     # ((theta_a, theta_b), ...)
    stable_order: int = 0
    generalized: bool = False

    def to_dict(self):
        return {
            "zeros": [{"theta": z.theta, "order": z.order, "nondegenerate": z.nondegenerate} for z in self.zeros],
            "flats": [list(f) for f in self.flats],
            "stable_order": self.stable_order,
            "generalized": self.generalized,
        }


@dataclass(frozen=True, eq=False)
class Representative:
    curve: ProfileCurve
    round_trip_residual: float
    label: str = "base"
    reduced_smoothness: bool = False


@dataclass(frozen=True, eq=False)
class EmbeddingSolutionSet:
    representatives: tuple
    multiplicity: str            # "unique" | "finite" | "continuum"
    classification: ChiClassification
    iterations: int = 0

    @property
    def count(self):
        return len(self.representatives)

    @property
    def curves(self):
        return [rep.curve for rep in self.representatives]

    @property
    def round_trip_residuals(self):
        return [rep.round_trip_residual for rep in self.representatives]

    def to_dict(self):
        return {
            "multiplicity": self.multiplicity,
            "count": self.count,
            "classification": self.classification.to_dict(),
            "representatives": [
                {"label": r.label, "round_trip_residual": r.round_trip_residual,
                 "reduced_smoothness": r.reduced_smoothness}
                for r in self.representatives
            ],
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# spectral helpers
# ---------------------------------------------------------------------------

def stable_order(values, max_order=8, tol=1e-6):
    """Largest j <= max_order such that derivatives 1..j survive re-interpolation.

    Derivatives of the full interpolant are compared with those of the
    interpolant through 3/4 as many nodes; agreement to ``tol`` relative to
    the derivative's own scale counts as stable.
    """
    f = np.asarray(values, dtype=float)
    n = f.size
    m = max(int(np.ceil(0.75 * (n - 1))) + 1, 9)
    fine = spectral.chopped_series(f)
    coarse = spectral.chopped_series(fine(spectral.lobatto_theta(m)))
    t = spectral.lobatto_theta(n)
    order = 0
    for j in range(1, max_order + 1):
        a, b = fine.deriv(j)(t), coarse.deriv(j)(t)
        scale = np.max(np.abs(a))
        if scale == 0.0:
            order = j
            continue
        if np.max(np.abs(a - b)) > tol * scale:
            break
        order = j
    return order


def _flat_runs(mask, min_nodes):
    runs, start = [], None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            if i - start >= min_nodes:
                runs.append((start, i - 1))
            start = None
    if start is not None and len(mask) - start >= min_nodes:
        runs.append((start, len(mask) - 1))
    return runs


def _classify_square(theta, W, chi, cfg: EmbeddingConfig, chi_scale):
    """Zeros (with orders) and flat intervals of W = (z')^2 on the open interval."""
    n = theta.size
    flat_mask = np.abs(chi) < cfg.flat_tol * chi_scale
    flat_mask[0] = flat_mask[-1] = False
    runs = _flat_runs(flat_mask, cfg.flat_min_nodes)
    flats = tuple((float(theta[a]), float(theta[b])) for a, b in runs)

    series = spectral.chopped_series(W)
    w_scale = float(np.max(np.abs(W))) or 1.0
    s_order = stable_order(W, cfg.max_order, cfg.stable_tol)
    scales = [w_scale] + [float(np.max(np.abs(series.deriv(j)(theta)))) or 1.0
                          for j in range(1, cfg.max_order + 1)]
    thr = [n * n * cfg.order_factor * s for s in scales]

    def in_flat(t):
        return any(a - 1e-12 <= t <= b + 1e-12 for a, b in flats)

    margin = theta[1]
    cand = []
    if series.degree() >= 2:
        for rt in series.deriv().roots():
            if abs(rt.imag) > 1e-4:
                continue
            t = float(rt.real)
            if t <= margin or t >= np.pi - margin or in_flat(t):
                continue
            if series(t) <= cfg.zero_tol * w_scale:
                cand.append(t)
    cand.sort()
    clusters = []
    for t in cand:
        if clusters and t - clusters[-1][-1] < 1e-3:
            clusters[-1].append(t)
        else:
            clusters.append([t])

    zeros = []
    for cl in clusters:
        t = min(cl, key=lambda s: series(s))
        order = None
        top = min(cfg.max_order, s_order)
        for _ in range(2):
            order = None
            for j in range(top + 1):
                if abs(series.deriv(j)(t) if j else series(t)) > thr[j]:
                    order = j
                    break
            if order is None:
                raise OrderUndetectable(t, s_order)
            if order >= 4:
                # a (2k-1)-fold root of W' is located poorly; use the simple root of W^(2k-1)
                d = series.deriv(order - 1)
                a, b = t - 1e-2, t + 1e-2
                if d(a) * d(b) < 0:
                    t = optimize.brentq(d, a, b, xtol=1e-15)
            else:
                break
        if order == 0:
            continue
        if order % 2 == 1:
            raise Inadmissible(t, float(spectral.interpolate(chi, t)))
        zeros.append(ChiZero(t, order, order == 2))
    return tuple(zeros), flats, s_order, series


def _admissibility(theta, alpha, b1, cfg, tol=None):
    """Raise Inadmissible at the worst violation of alpha >= |beta'|."""
    chi = alpha - np.abs(b1)
    scale = float(np.max(alpha))
    k = int(np.argmin(chi))
    if chi[k] >= -(cfg.adm_tol if tol is None else tol) * scale:
        return
    # refine on the smooth interpolants; chi itself has a |.| kink
    sa, sb = spectral.chopped_series(alpha), spectral.chopped_series(b1)
    lo, hi = theta[max(k - 1, 0)], theta[min(k + 1, theta.size - 1)]
    res = optimize.minimize_scalar(lambda t: sa(t) - abs(sb(t)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-13})
    if res.fun < chi[k] - 1e-12 * scale:
        raise Inadmissible(float(res.x), float(res.fun))
    raise Inadmissible(float(theta[k]), float(chi[k]))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def classify_chi(profile: MetricProfile, solution=None, curve: ProfileCurve | None = None,
                 config: EmbeddingConfig | None = None) -> ChiClassification:
    """Admissibility and zero structure of chi = alpha - |beta'|.

    With a solution and a candidate curve the generalized function
    e^lambda alpha - |beta'| is used, lambda evaluated along that curve.
    """
    cfg = config or EmbeddingConfig()
    alpha, b1 = profile.alpha, profile.beta1
    generalized = solution is not None
    if generalized:
        if curve is None:
            raise ValueError("the generalized check needs a candidate curve for lambda")
        lam = solution.lambda_on_curve(curve.resampled(profile.n) if curve.n != profile.n else curve)
        alpha = np.exp(lam) * alpha
    chi = alpha - np.abs(b1)
    chi_scale = float(np.max(alpha))
    _admissibility(profile.theta, alpha, b1, cfg)
    W = np.maximum(alpha**2 - b1**2, 0.0)
    zeros, flats, s_order, _ = _classify_square(profile.theta, W, chi, cfg, chi_scale)
    return ChiClassification(profile.theta, chi, zeros, flats, s_order, generalized)


def _zprime(theta, W, cls: ChiClassification, series, cfg, flat_flips=()):
    """Signed square root of W following the sign policy; flat_flips selects
    which flat intervals reverse the sign of the cap beyond them."""
    w_scale = float(np.max(W)) or 1.0
    root = np.sqrt(np.maximum(W, 0.0))
    sign = -np.ones_like(theta)
    for z in cls.zeros:
        if z.flips:
            sign[theta > z.theta] *= -1.0
    for i, (a, b) in enumerate(cls.flats):
        if i in flat_flips:
            sign[theta > 0.5 * (a + b)] *= -1.0
    zp = sign * root

    # analytic local model z' ~ +-|d|^k sqrt(Q(d)) next to each zero
    for z in cls.zeros:
        k2 = z.order
        w = [series.deriv(j)(z.theta) / math.factorial(j) if j else series(z.theta)
             for j in range(k2 + 3)]
        near = np.nonzero((W < cfg.model_tau * w_scale) & (np.abs(theta - z.theta) < 0.1))[0]
        for j in near:
            d = theta[j] - z.theta
            q = w[k2] + w[k2 + 1] * d + w[k2 + 2] * d * d
            zp[j] = sign[j] * abs(d) ** (k2 // 2) * np.sqrt(max(q, 0.0))
    return zp


def _normalized(theta, r, zp, weight):
    z = spectral.cumulative_integral(zp)
    area = spectral.integrate(weight)
    if area > 0.0:
        z = z - spectral.integrate(z * weight) / area
    return ProfileCurve(theta, r, z)


def dirichlet_map(curve: ProfileCurve, solution=None) -> MetricProfile:
    """(alpha, beta) of the metric induced on the surface generated by ``curve``."""
    if solution is None or solution.is_flat:
        return MetricProfile(curve.theta, curve.speed, np.array(curve.r))
    f = solution.surface_fields(curve)
    u_inv = np.exp(-f["nu"])
    return MetricProfile(curve.theta, u_inv * np.exp(f["lam"]) * curve.speed, curve.r * u_inv)


def _residual(rep_curve, profile, solution=None):
    img = dirichlet_map(rep_curve, solution)
    return float(max(np.max(np.abs(img.alpha - profile.alpha)), np.max(np.abs(img.beta - profile.beta))))


def _congruent(c1: ProfileCurve, c2: ProfileCurve, tol):
    if np.max(np.abs(c1.r - c2.r)) > tol:
        return False
    z1 = c1.z - c1.z.mean()
    z2 = c2.z - c2.z.mean()
    return min(np.max(np.abs(z1 - z2)), np.max(np.abs(z1 + z2))) <= tol


def _representatives(profile, theta, r, W, cls, series, cfg, weight, solution=None):
    base = _normalized(theta, r, _zprime(theta, W, cls, series, cfg), weight)
    reps = [Representative(base, _residual(base, profile, solution), "base")]
    for i in range(len(cls.flats)):
        c = _normalized(theta, r, _zprime(theta, W, cls, series, cfg, flat_flips=(i,)), weight)
        reps.append(Representative(c, _residual(c, profile, solution), f"flat-{i}-reflected"))

    diam = float(np.ptp(base.z)) or 1.0
    zs = [(z, float(spectral.interpolate(base.z, z.theta))) for z in cls.zeros]
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            (zi, hi), (zj, hj) = zs[i], zs[j]
            if zi.order != zj.order or abs(hi - hj) > cfg.pairing_tol * diam:
                continue
            z_new = np.array(base.z)
            inside = (theta > zi.theta) & (theta < zj.theta)
            z_new[inside] = 2.0 * hi - z_new[inside]
            c = ProfileCurve(theta, r, z_new)
            area = spectral.integrate(weight)
            c = c.shifted(-spectral.integrate(c.z * weight) / area)
            reps.append(Representative(c, _residual(c, profile, solution),
                                       f"reflected-{i}-{j}", reduced_smoothness=True))

    unique = []
    tol = cfg.pairing_tol * max(diam, float(np.max(r)))
    for rep in reps:
        if not any(_congruent(rep.curve, u.curve, tol) for u in unique):
            unique.append(rep)
    if cls.flats:
        mult = "continuum"
    elif len(unique) > 1:
        mult = "finite"
    else:
        mult = "unique"
    return tuple(unique), mult


def embed_profile(profile: MetricProfile, config: EmbeddingConfig | None = None) -> EmbeddingSolutionSet:
    """All flat-space profile curves inducing (alpha, beta), up to congruence."""
    cfg = config or EmbeddingConfig()
    cls = classify_chi(profile, config=cfg)
    theta = profile.theta
    W = np.maximum(profile.alpha**2 - profile.beta1**2, 0.0)
    series = spectral.chopped_series(W)
    r = np.array(profile.beta)
    r[0] = r[-1] = 0.0
    reps, mult = _representatives(profile, theta, r, W, cls, series, cfg, profile.alpha * profile.beta)
    return EmbeddingSolutionSet(reps, mult, cls)


def _solve_r(beta_j, z_j, r_prev, field, theta_j, samples=64):
    """Root of g(r) = r - beta u(r, z) on the branch through the current iterate.

    The bracket is [beta u0 / 2, 2 beta u0] (u0 = u at the iterate), cut
    down to the stretch where g stays monotone around r_prev.  Near a
    source g can fold and acquire extra roots on other branches that are
    not the continuation of the profile.  No sign change, or more than one,
    is reported rather than resolved by guessing.
    """
    if beta_j <= 0.0:
        return 0.0

    def g(r):
        return r - beta_j * np.exp(field.jet(r, z_j)[0])

    u0 = float(np.exp(field.jet(max(r_prev, 1e-300), z_j)[0]))
    grid = np.linspace(0.5 * beta_j * u0, 2.0 * beta_j * u0, samples + 1)
    gv = grid - beta_j * np.exp(field.jet(grid, np.full_like(grid, z_j))[0])
    slope = np.sign(np.diff(gv))
    i0 = int(np.clip(np.searchsorted(grid, r_prev) - 1, 0, samples - 1))
    lo, hi = i0, i0 + 1
    while lo > 0 and slope[lo - 1] == slope[i0]:
        lo -= 1
    while hi < samples and slope[hi] == slope[i0]:
        hi += 1
    grid, gv = grid[lo:hi + 1], gv[lo:hi + 1]
    changes = np.nonzero(np.signbit(gv[:-1]) != np.signbit(gv[1:]))[0]
    if len(changes) == 0:
        raise RootFindFailure(theta_j, f"no root in [{grid[0]:.4g}, {grid[-1]:.4g}]")
    if len(changes) > 1:
        raise RootFindFailure(theta_j, f"{len(changes)} roots in [{grid[0]:.4g}, {grid[-1]:.4g}]")
    i = changes[0]
    if gv[i] == 0.0:
        return float(grid[i])
    return optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _solve_r_newton(beta, z, r_guess, field, max_iter=50):
    """Vectorized Newton for r = beta u(r, z) from a nearby guess; None if it stalls."""
    r = np.array(r_guess, dtype=float)
    eps = np.finfo(float).eps
    prev = np.inf
    for _ in range(max_iter):
        j = field.jet(r, z)
        u = np.exp(j[0])
        g = r - beta * u
        with np.errstate(divide="ignore", invalid="ignore"):
            dr = g / (1.0 - beta * u * j[1])  # a fold gives 0/0, caught below
        size = float(np.max(np.abs(dr)))
        if not np.isfinite(size):
            return None
        if size >= prev and float(np.max(np.abs(g))) <= 64 * eps * max(1.0, float(np.max(np.abs(r)))):
            break
        r = r - dr
        if size <= 4 * eps * max(1.0, float(np.max(np.abs(r)))):
            break
        prev = size
    else:
        return None
    r[0] = r[-1] = 0.0
    return r


def _general_stage(profile, solution, curve, cfg):
    """Least-squares solve for the nodal z reproducing one target profile."""
    theta = profile.theta
    field = solution.field
    beta = np.array(profile.beta)

    def r_of(z, r_guess):
        r = _solve_r_newton(beta, z, r_guess, field)
        if r is None:
            r = np.array([_solve_r(b, zj, rp, field, t) for b, zj, rp, t in zip(beta, z, r_guess, theta)])
            r[0] = r[-1] = 0.0
        return r

    r = r_of(curve.z, curve.r)
    state = {"r": r}

    def residual(z):
        rr = _solve_r_newton(beta, z, state["r"], field)
        if rr is None:
            try:
                rr = r_of(z, state["r"])
            except RootFindFailure:
                # rejected trial step; the trust region shrinks
                return np.full(theta.size, 1e3)
        state["r"] = rr
        c = ProfileCurve(theta, rr, z)
        jet = field.jet(rr, z)
        lam = solution.lambda_on_curve(c, jet)
        a = np.exp(lam - jet[0]) * c.speed
        return a - profile.alpha

    fit = optimize.least_squares(residual, np.array(curve.z), method="trf",
                                 xtol=cfg.iter_tol, ftol=cfg.iter_tol, gtol=cfg.iter_tol,
                                 max_nfev=cfg.max_iter)
    residual(fit.x)
    return fit, state["r"]


def _modal_start(profile, solution, modes):
    """Low-mode curve r = sum a_k sin k theta, z = sum b_k cos k theta fitted to the target.

    A handful of parameters fitted directly in the Weyl space gives a smooth
    start close to the answer, which the nodal solve then refines.
    """
    theta = profile.theta
    k = np.arange(1, modes + 1)
    S = np.sin(np.outer(theta, k))
    C = np.cos(np.outer(theta, np.arange(modes + 1)))
    weight = profile.alpha * profile.beta
    area = spectral.integrate(weight)

    def curve_of(x):
        return ProfileCurve(theta, S @ x[:modes], C @ x[modes:])

    def residual(x):
        c = curve_of(x)
        try:
            q = dirichlet_map(c, solution)
        except WeylForgeError:
            return np.full(2 * theta.size, 1e3)
        return np.concatenate([q.alpha - profile.alpha, q.beta - profile.beta])

    radius = math.sqrt(area / 2.0)    # flat sphere with the same area
    x0 = np.zeros(2 * modes + 1)
    x0[0] = x0[modes + 1] = radius
    fit = optimize.least_squares(residual, x0)
    return curve_of(fit.x)


def _check_fold(profile, solution, curve, tol=1e-6):
    """RootFindFailure where r = beta u(r, z) has a double root on ``curve``."""
    j = solution.field.jet(curve.r, curve.z)
    slope = np.abs(1.0 - profile.beta * np.exp(j[0]) * j[1])[1:-1]
    k = int(np.argmin(slope))
    if slope[k] < tol:
        raise RootFindFailure(float(profile.theta[k + 1]),
                              f"double root of r = beta u (fold, |g'| = {slope[k]:.2e})")


def _target_homotopy(profile, solution, start, cfg, tol):
    """March the target from the image of ``start`` to ``profile``.

    P_t = (1 - t) Pi(start) + t P keeps the pole conditions, and every
    intermediate target has an exact preimage near the previous one.
    """
    theta = profile.theta
    p0 = dirichlet_map(start, solution)
    curve, t, dt, nfev = start, 0.0, 1.0 / cfg.continuation_steps, 0
    fit, r = None, np.array(start.r)
    while t < 1.0:
        t_next = min(1.0, t + dt)
        target = MetricProfile(theta, (1.0 - t_next) * p0.alpha + t_next * profile.alpha,
                               (1.0 - t_next) * p0.beta + t_next * profile.beta)
        try:
            trial_fit, trial_r = _general_stage(target, solution, curve, cfg)
            nfev += trial_fit.nfev
            ok = np.max(np.abs(trial_fit.fun)) <= tol
        except RootFindFailure as exc:
            ok, why = False, str(exc)
        else:
            why = f"residual {np.max(np.abs(trial_fit.fun)):.3e}"
        if ok:
            fit, r, t = trial_fit, trial_r, t_next
            curve = ProfileCurve(theta, r, fit.x)
            dt = min(2.0 * dt, 1.0 - t) if t < 1.0 else dt
        else:
            dt *= 0.5
            if dt < cfg.min_homotopy_step:
                _check_fold(profile, solution, curve)
                raise NoConvergence(f"target homotopy stalled at t = {t:.4f} ({why}) "
                                    f"after {nfev} evaluations")
    return fit, r, nfev


def embed_profile_general(profile: MetricProfile, solution, config: EmbeddingConfig | None = None,
                          initial: ProfileCurve | None = None) -> EmbeddingSolutionSet:
    """Profile curves in the Weyl space of ``solution`` inducing (alpha, beta).

    r is eliminated node by node from r = beta u(r, z).  The remaining
    equation e^lambda |sigma'| / u = alpha fixes z, solved by nonlinear
    least squares on the nodal z.  A nonzero field breaks translation
    invariance, so z is fixed absolutely and no gauge row is added.
    The start is a low-mode curve fitted to the data.  If the solve stalls,
    the target is moved from the start's own image to the data in steps.
    Only the base representative is produced.
    """
    cfg = config or EmbeddingConfig()
    if solution is None or solution.is_flat:
        return embed_profile(profile, cfg)
    theta = profile.theta
    field = solution.field
    beta = np.array(profile.beta)
    weight = profile.alpha * profile.beta
    area = spectral.integrate(weight)
    if not area > 0.0:
        raise InvalidCurve("profile has no area")

    if initial is None:
        curve = _modal_start(profile, solution, cfg.start_modes)
    else:
        curve = initial.resampled(profile.n) if initial.n != profile.n else initial
    tol = cfg.general_tol * max(1.0, float(np.max(profile.alpha)))

    try:
        fit, r = _general_stage(profile, solution, curve, cfg)
        nfev, stalled = fit.nfev, np.max(np.abs(fit.fun)) > tol
    except RootFindFailure:
        nfev, stalled = 0, True
    if stalled:
        fit, r, extra = _target_homotopy(profile, solution, curve, cfg, tol)
        nfev += extra
    z = fit.x
    res = float(np.max(np.abs(fit.fun)))
    if res > tol:
        raise NoConvergence(f"general embedding stalled with residual {res:.3e} after {nfev} evaluations")

    # final r with the bracketed uniqueness check, then the strict admissibility gate
    r = np.array([_solve_r(b, zj, rp, field, t) for b, zj, rp, t in zip(beta, z, r, theta)])
    r[0] = r[-1] = 0.0
    curve = ProfileCurve(theta, r, z)
    jet = field.jet(r, z)
    lam = solution.lambda_on_curve(curve, jet)
    r1 = spectral.deriv(r)
    alpha_eff = np.exp(jet[0] - lam) * profile.alpha
    _admissibility(theta, alpha_eff, r1, cfg)
    chi = alpha_eff - np.abs(r1)
    W = np.maximum(alpha_eff**2 - r1**2, 0.0)
    zeros, flats, s_order, _ = _classify_square(theta, W, chi, cfg, float(np.max(alpha_eff)))
    cls = ChiClassification(theta, chi, zeros, flats, s_order, True)
    rep = Representative(curve, _residual(curve, profile, solution), "base")
    return EmbeddingSolutionSet((rep,), "continuum" if flats else "unique", cls, int(nfev))
