"""Chebyshev-Lobatto collocation on the polar interval [0, pi].

Node j sits at theta_j = (pi/2)(1 - cos(j pi / (n - 1))), so node 0 is the
north pole and node n-1 the south pole.  Internally x = 1 - 2 theta / pi.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct

MIN_NODES = 33


def lobatto_theta(n):
    """Return the n Chebyshev-Lobatto nodes on [0, pi], ascending."""
    if n < 2:
        raise ValueError("need at least two nodes")
    j = np.arange(n)
    theta = 0.5 * np.pi * (1.0 - np.cos(np.pi * j / (n - 1)))
    theta[0], theta[-1] = 0.0, np.pi
    return theta


@lru_cache(maxsize=32)
def _diff_matrix(n):
    m = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / m)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    # d/dtheta = -(2/pi) d/dx
    D = -(2.0 / np.pi) * D
    D.setflags(write=False)
    return D


def diff_matrix(n):
    """First-derivative collocation matrix d/dtheta on the n-node grid."""
    return _diff_matrix(int(n))


def deriv(values, order=1, filtered=True):
    """Spectral theta-derivative of nodal values.

    With ``filtered`` the interpolant's coefficient tail below roundoff is
    chopped before differentiating; higher derivatives otherwise amplify
    that tail by roughly n**(2*order).  Unfiltered mode applies the
    collocation matrix ``order`` times.
    """
    out = np.asarray(values, dtype=float)
    if not filtered:
        D = diff_matrix(out.shape[-1])
        for _ in range(order):
            out = out @ D.T
        return out
    theta = lobatto_theta(out.shape[-1])
    if out.ndim == 1:
        return chopped_series(out).deriv(order)(theta)
    flat = out.reshape(-1, out.shape[-1])
    res = np.array([chopped_series(row).deriv(order)(theta) for row in flat])
    return res.reshape(out.shape)


def coefficients(values):
    """Chebyshev coefficients (in x = 1 - 2 theta/pi) of the nodal interpolant."""
    f = np.asarray(values, dtype=float)
    m = f.shape[-1] - 1
    c = dct(f, type=1, axis=-1) / m
    c[..., 0] *= 0.5
    c[..., -1] *= 0.5
    return c


def series(values):
    """numpy Chebyshev object interpolating nodal values as a function of theta."""
    return C.Chebyshev(coefficients(values), domain=[np.pi, 0.0])


def chopped_series(values, rel_tol=1e-14):
    return C.Chebyshev(chop(coefficients(values), rel_tol), domain=[np.pi, 0.0])


def chop(coeffs, rel_tol=1e-14):
    """Drop the trailing coefficients that sit below rel_tol * max|c|."""
    c = np.asarray(coeffs, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return c[:1] * 0.0
    keep = np.nonzero(np.abs(c) > rel_tol * scale)[0]
    return c[: keep[-1] + 1]


def cumulative_integral(values):
    """Nodal values of int_0^theta f, f given at the nodes."""
    f = np.asarray(values, dtype=float)
    theta = lobatto_theta(f.shape[-1])
    s = series(f).integ(lbnd=0.0)
    return s(theta)


@lru_cache(maxsize=32)
def _cc_weights(n):
    # integrate each cardinal function once
    eye = np.eye(n)
    w = np.array([series(eye[k]).integ(lbnd=0.0)(np.pi) for k in range(n)])
    w.setflags(write=False)
    return w


def quadrature_weights(n):
    """Clenshaw-Curtis weights for int_0^pi f(theta) dtheta on the n-node grid."""
    return _cc_weights(int(n))


def integrate(values):
    f = np.asarray(values, dtype=float)
    return f @ quadrature_weights(f.shape[-1])


def interpolate(values, theta):
    return series(values)(np.asarray(theta, dtype=float))
