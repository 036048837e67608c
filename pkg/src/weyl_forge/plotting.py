"""Figures for the CLI report path (rendered off-screen to image files)."""

from __future__ import annotations

from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
}

# PNG metadata would otherwise carry the matplotlib version
_META = {"Software": None}


@contextmanager
def _figure(nrows=1, ncols=1, size=(6.0, 4.0)):
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=size, squeeze=False)
        try:
            yield fig, axes
        finally:
            plt.close(fig)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    return str(path)


def plot_profiles(curves, path, labels=None, title=None):
    """Profile curves in the (r, z) half-plane together with their mirror images."""
    labels = labels or [None] * len(curves)
    with _figure(size=(5.0, 5.0)) as (fig, ax):
        ax = ax[0, 0]
        for k, (c, lab) in enumerate(zip(curves, labels)):
            line, = ax.plot(c.r, c.z, lw=1.5, label=lab)
            ax.plot(-np.asarray(c.r), c.z, lw=0.8, ls="--", color=line.get_color(), alpha=0.6)
        ax.axvline(0.0, color="k", lw=0.6)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("r")
        ax.set_ylabel("z")
        if title:
            ax.set_title(title)
        if any(labels):
            ax.legend(loc="best")
        return _save(fig, path)


def plot_boundary_data(data, path, title=None):
    """alpha, beta and H against theta."""
    with _figure(3, 1, size=(6.0, 6.0)) as (fig, axes):
        for ax, name in zip(axes[:, 0], ("alpha", "beta", "H")):
            ax.plot(data.theta, getattr(data, name), lw=1.4)
            ax.set_ylabel(name)
        axes[-1, 0].set_xlabel("theta")
        if title:
            axes[0, 0].set_title(title)
        return _save(fig, path)


def plot_residuals(theta, series, path, title=None):
    """|residual| against theta on a log axis; ``series`` maps a name to nodal values."""
    with _figure() as (fig, ax):
        ax = ax[0, 0]
        for name, vals in series.items():
            ax.semilogy(theta, np.maximum(np.abs(vals), 1e-18), lw=1.2, label=name)
        ax.set_xlabel("theta")
        ax.set_ylabel("|residual|")
        ax.legend(loc="best")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_scan(values, reports, path, xlabel="lambda", title=None):
    """Residual floor, min u and Jacobian sigma_min along a scan grid."""
    v = np.asarray(values, dtype=float)
    conv = np.array([r.converged for r in reports], dtype=bool)
    with _figure(3, 1, size=(6.0, 6.5)) as (fig, axes):
        rows = (
            ("resid_sup", [r.resid_sup for r in reports]),
            ("min u", [r.min_u for r in reports]),
            ("jac sigma_min", [r.jac_sigma_min for r in reports]),
        )
        for ax, (name, ys) in zip(axes[:, 0], rows):
            ys = np.maximum(np.asarray(ys, dtype=float), 1e-300)
            ax.loglog(v, ys, color="0.5", lw=0.8)
            ax.loglog(v[conv], ys[conv], "o", ms=5, label="converged")
            ax.loglog(v[~conv], ys[~conv], "x", ms=6, label="not converged")
            ax.set_ylabel(name)
        axes[0, 0].legend(loc="best")
        axes[-1, 0].set_xlabel(xlabel)
        if title:
            axes[0, 0].set_title(title)
        return _save(fig, path)
