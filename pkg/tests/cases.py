"""Fixed curve and profile suites shared by the module tests and the acceptance run."""

import numpy as np
from scipy import optimize
from scipy.special import exp1

from weyl_forge.embedding import MetricProfile
from weyl_forge.inverse_solver import BartnikTarget, InverseConfig, UnknownVector, bartnik_forward
from weyl_forge.profile_geometry import ProfileCurve, flat_boundary_data


def _psi_integral(t, s):
    """Antiderivative of exp(-s/t) for t > 0, zero for t <= 0 (flat to all orders at 0)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = t > 0
    out[m] = t[m] * np.exp(-s / t[m]) - s * exp1(s / t[m])
    return out


def _flat_interval_curve(xa, xb, s=0.4, n=513):
    # z' vanishes exactly for cos(theta) in [xb, xa]
    return ProfileCurve.from_functions(
        np.sin, lambda t: _psi_integral(np.cos(t) - xa, s) - _psi_integral(xb - np.cos(t), s), n=n)


def embedding_suite():
    """(label, curve, expected multiplicity, expected chi zero orders)."""
    out = [
        ("sphere", ProfileCurve.from_functions(np.sin, np.cos), "unique", []),
        ("prolate", ProfileCurve.from_functions(np.sin, lambda t: 2 * np.cos(t)), "unique", []),
        ("oblate", ProfileCurve.from_functions(lambda t: 1.5 * np.sin(t), lambda t: 0.7 * np.cos(t)), "unique", []),
        ("pear", ProfileCurve.from_functions(lambda t: np.sin(t) * (1 + 0.2 * np.cos(t)),
                                             lambda t: np.cos(t) + 0.1 * np.cos(2 * t)), "unique", []),
    ]
    for b in (0.8, 1.0, 1.5, -1.0):
        out.append((f"fold b={b}", ProfileCurve.from_functions(np.sin, lambda t, b=b: np.cos(t) + b * np.cos(t) ** 2),
                    "unique", [2]))
    for c0 in (0.3, -0.4):
        out.append((f"cubic c0={c0}", ProfileCurve.from_functions(np.sin, lambda t, c0=c0: (np.cos(t) - c0) ** 3 / 3),
                    "unique", [4]))
    for xa, xb in ((0.85, 0.55), (-0.3, -0.6)):
        out.append((f"flat [{xb}, {xa}]", _flat_interval_curve(xa, xb), "continuum", None))
    return out


def congruence_distance(c1, c2):
    """Sup distance after removing z translation and z reflection."""
    z1 = c1.z - c1.z.mean()
    z2 = c2.z - c2.z.mean()
    return max(float(np.max(np.abs(c1.r - c2.r))), min(float(np.max(np.abs(z1 - z2))), float(np.max(np.abs(z1 + z2)))))


def _dip(center, width):
    return lambda t: 1 - 0.5 * np.exp(-(t - center) ** 2 / width)


def _argmin_chi(alpha, lo, hi):
    return optimize.minimize_scalar(lambda t: alpha(t) - abs(np.cos(t)), bounds=(lo, hi), method="bounded",
                                    options={"xatol": 1e-12}).x


def inadmissible_suite():
    """(label, profile, theta where the violation is worst)."""
    d1, d2 = _dip(1.0, 0.05), _dip(2.2, 0.02)
    return [
        ("stretched", MetricProfile.from_functions(np.ones_like, lambda t: 1.5 * np.sin(t)), 0.0),
        ("dip", MetricProfile.from_functions(d1, np.sin), _argmin_chi(d1, 0.5, 1.5)),
        ("dip2", MetricProfile.from_functions(d2, np.sin), _argmin_chi(d2, 1.8, 2.6)),
    ]


def _p2(x):
    return 0.5 * (3 * x * x - 1)


def inverse_suite(n_cases=20, seed=7, config=None):
    """Forward-generated (target, truth, perturbed initial) triples.

    Radius in [1, 1.5], quadrupole amplitude up to 20%, total source
    strength up to 0.5 spread over all sources, initial perturbed by 10%.
    """
    cfg = config or InverseConfig()
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_cases):
        R, q, m = rng.uniform(1.0, 1.5), rng.uniform(-0.2, 0.2), rng.uniform(0.1, 0.5)
        w = rng.dirichlet(np.ones(cfg.n_sources))
        c = ProfileCurve.from_functions(lambda t, R=R, q=q: R * (1 + q * _p2(np.cos(t))) * np.sin(t),
                                        lambda t, R=R, q=q: R * (1 + q * _p2(np.cos(t))) * np.cos(t))
        truth = UnknownVector.from_curve(c, cfg.n_r_modes, cfg.n_z_modes, strengths=-m * w)
        target = BartnikTarget.from_boundary_data(bartnik_forward(truth), "forward-generated")
        out.append((target, truth, truth.perturbed(0.1, rng)))
    return out


def quadrupole_gamma(eps=0.1, n=65):
    """(theta, alpha, beta) of the flat metric on the surface rho = 1 + eps P2(cos theta), and its H."""
    c = ProfileCurve.from_functions(lambda t: (1 + eps * _p2(np.cos(t))) * np.sin(t),
                                    lambda t: (1 + eps * _p2(np.cos(t))) * np.cos(t), n=n)
    d = flat_boundary_data(c)
    return (d.theta, d.alpha, d.beta), d.H
