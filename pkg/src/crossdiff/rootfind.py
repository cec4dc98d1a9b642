"""Grid-scan seeding and a damped Newton iteration for small algebraic systems.

The steady-state constructions reduce to two to five nonlinear equations.
Roots are bracketed by scanning a residual on a rectangular grid for cells
in which every component changes sign, and each seed is polished by Newton
with a finite-difference Jacobian and step halving.
"""

import numpy as np

from .errors import NotFound, PoleError

__all__ = ["sign_change_seeds", "damped_newton"]

NEWTON_TOL = 1e-12


def _changes(S):
    corners = np.stack([S[:-1, :-1], S[1:, :-1], S[:-1, 1:], S[1:, 1:]])
    return corners.min(axis=0) != corners.max(axis=0)


def sign_change_seeds(residual, xs, ys):
    """Cell centres of a grid where every residual component changes sign.

    Parameters
    ----------
    residual : callable
        ``residual(X, Y)`` on broadcast 2-D arrays, returning a sequence of
        arrays of the same shape, one per component.  Non-finite values
        mark points outside the domain.
    xs, ys : 1-D arrays
        Grid lines.  ``ys`` may also be a 2-D array of shape
        ``(len(xs), n)`` when the second coordinate depends on the first.

    Returns
    -------
    list of (x, y) tuples ordered by grid index.
    """
    xs = np.asarray(xs, dtype=float)
    X = xs[:, None]
    Y = np.asarray(ys, dtype=float)
    if Y.ndim == 1:
        Y = np.broadcast_to(Y[None, :], (xs.size, Y.size))
    X = np.broadcast_to(X, Y.shape)
    with np.errstate(all="ignore"):
        comps = [np.asarray(r, dtype=float) for r in residual(X, Y)]
    mask = np.ones((X.shape[0] - 1, X.shape[1] - 1), dtype=bool)
    for R in comps:
        finite = np.isfinite(R)
        S = np.where(finite, np.sign(R), np.nan)
        ok = finite[:-1, :-1] & finite[1:, :-1] & finite[:-1, 1:] & finite[1:, 1:]
        with np.errstate(invalid="ignore"):
            mask &= ok & _changes(np.nan_to_num(S, nan=0.0))
    seeds = []
    for i, j in np.argwhere(mask):
        cx = 0.25 * (X[i, j] + X[i + 1, j] + X[i, j + 1] + X[i + 1, j + 1])
        cy = 0.25 * (Y[i, j] + Y[i + 1, j] + Y[i, j + 1] + Y[i + 1, j + 1])
        seeds.append((float(cx), float(cy)))
    return seeds


def _eval(f, x):
    try:
        r = np.asarray(f(x), dtype=float)
    except (PoleError, ZeroDivisionError, FloatingPointError, ValueError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def _jacobian(f, x, r, scale):
    n = x.size
    J = np.empty((r.size, n))
    for k in range(n):
        h = 1e-7 * max(abs(x[k]), scale[k])
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        rp, rm = _eval(f, xp), _eval(f, xm)
        if rp is not None and rm is not None:
            J[:, k] = (rp - rm) / (2 * h)
        elif rp is not None:
            J[:, k] = (rp - r) / h
        elif rm is not None:
            J[:, k] = (r - rm) / h
        else:
            return None
    return J


def damped_newton(f, x0, tol=NEWTON_TOL, max_iter=100, scale=None):
    """Solve ``f(x) = 0`` from ``x0``.

    Each Newton step is halved until the residual max-norm decreases (or the
    residual leaves its domain, signalled by non-finite output or a
    :class:`PoleError`).  The Jacobian is a central difference with relative
    step ``1e-7``; ``scale`` gives a per-component floor for that step.

    Returns
    -------
    x : ndarray
        Point with ``max|f(x)| < tol``.

    Raises
    ------
    NotFound
        If the iteration stalls or does not converge in ``max_iter`` steps.
    """
    x = np.array(x0, dtype=float)
    scale = np.ones_like(x) * 1e-8 if scale is None else np.asarray(scale, dtype=float)
    r = _eval(f, x)
    if r is None:
        raise NotFound("residual undefined at the initial guess")
    norm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if norm < tol:
            return x
        J = _jacobian(f, x, r, scale)
        if J is None:
            break
        try:
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-10:
            xt = x + lam * dx
            rt = _eval(f, xt)
            if rt is not None:
                nt = float(np.max(np.abs(rt)))
                if nt < norm:
                    x, r, norm = xt, rt, nt
                    break
            lam *= 0.5
        else:
            break
    if norm < tol:
        return x
    raise NotFound(f"Newton iteration stalled at residual {norm:.3e}")
