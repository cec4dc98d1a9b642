"""Figures written next to the CSV/JSON outputs (matplotlib, no display)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_run", "plot_profile", "plot_scan", "plot_critical"]

RHO_STYLE = {"color": "tab:blue", "label": "rho"}
ETA_STYLE = {"color": "tab:red", "label": "eta"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_run(snapshots, path, profile=None, title=None):
    """Initial, intermediate and final densities, with ``profile`` overlaid in black."""
    fig, ax = plt.subplots(figsize=(7, 4))
    x = snapshots[0].grid.centers
    first, last = snapshots[0], snapshots[-1]
    mid = snapshots[len(snapshots) // 2] if len(snapshots) > 2 else None
    ax.plot(x, first.rho, ":", color=RHO_STYLE["color"], lw=1)
    ax.plot(x, first.eta, ":", color=ETA_STYLE["color"], lw=1)
    if mid is not None:
        ax.plot(x, mid.rho, "--", color=RHO_STYLE["color"], lw=1)
        ax.plot(x, mid.eta, "--", color=ETA_STYLE["color"], lw=1)
    ax.plot(x, last.rho, lw=2, **RHO_STYLE)
    ax.plot(x, last.eta, lw=2, **ETA_STYLE)
    if profile is not None:
        from .diagnostics import _best_shift, _shift
        from .model_core import project_initial_data
        ref = [project_initial_data(profile.density(s, last.time), last.grid) for s in ("rho", "eta")]
        s = _best_shift([last.rho, last.eta], ref)
        for r in ref:
            ax.plot(x, _shift(r, s), "k-", lw=0.8)
        ax.plot([], [], "k-", lw=0.8, label="analytic")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(title or f"t = {first.time:g} (dotted) to t = {last.time:g} (solid)")
    ax.legend()
    return _save(fig, path)


def plot_profile(profile, x, path, title=None):
    rho, eta = profile.evaluate(x)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, rho, lw=2, **RHO_STYLE)
    ax.plot(x, eta, lw=2, **ETA_STYLE)
    for b in profile.breakpoints():
        ax.axvline(b, color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(title or profile.family)
    ax.legend()
    return _save(fig, path)


def plot_scan(eps, p_min, p_max, batman, path, eps1=None, eps2=None):
    """Envelope curves ``p_min`` (dashed) and ``p_max`` (dotted) against ``eps``."""
    fig, ax = plt.subplots(figsize=(7, 4))
    eps = np.asarray(eps, dtype=float)
    ax.plot(eps, p_min, "k--", label="p_min")
    ax.plot(eps, p_max, "k:", label="p_max")
    bat = np.asarray(batman, dtype=bool)
    ax.plot(eps[bat], np.zeros(np.count_nonzero(bat)), "b-", lw=3, label="Batman exists")
    for e in (eps1, eps2):
        if e is not None and np.isfinite(e):
            ax.axvline(e, color="0.6", lw=0.8)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("corner mass fraction p")
    ax.legend()
    return _save(fig, path)


def plot_critical(m_ratio, eps_c, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    order = np.argsort(m_ratio)
    ax.plot(np.asarray(m_ratio)[order], np.asarray(eps_c)[order], "o-")
    ax.set_xlabel("m1 / m2")
    ax.set_ylabel("eps_c")
    ax.set_yscale("log")
    return _save(fig, path)
