"""Closed-form symmetric steady states when both species attract each other.

Potentials: ``W11 = W22 = x^2/2`` and ``W12 = W21 = |x|``.  All profiles are
even and centred at the origin.

Batman profile (``m1 >= m2``, ``rho`` the wider species)::

    rho = (u2/2) cos(x/s) - m2/2,  eta = (u2/2) cos(x/s) - m1/2    on [-b, b]
    rho = -(m1/2eps)(x^2 - c^2) -+ (m2/eps)(x -+ c)                 on b <= |x| <= c

with ``s = sqrt(eps)`` and ``u2 = (m2 + m1 b) / (s sin(b/s))``.  The pair
``(b, c)`` solves two conditions, the rho mass balance ``r1 = 0`` and the
continuity of ``rho + eta`` at ``b``, ``r2 = 0``.

Second-kind profile: a fraction ``p`` of the narrower species sits in two
corners ``c <= |x| <= d`` outside the wide species.  Four unknowns
``(b, c, d, B)`` solve four conditions for each ``p``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NotFound, PoleError
from .model_core import attractive_attractive
from .profiles import Profile, SteadyStateResidual, register_family, verify_profile
from .rootfind import damped_newton, sign_change_seeds

__all__ = [
    "BatmanProfile", "SecondKindProfile", "EnvelopeRange", "BifurcationScan",
    "AsymptoticSupport", "SteadyStateResidual",
    "batman_residuals", "solve_batman", "eval_batman", "small_eps_support",
    "second_kind_residuals", "solve_second_kind", "envelope_range",
    "bifurcation_scan", "bifurcation_point", "verify_steady_state",
]

SCAN = 200
NONNEG_TOL = 1e-10
VELOCITY_TOL = 1e-10
CONTINUATION_STEP = 0.01


def _check_positive(**kw):
    for name, val in kw.items():
        if not (np.isfinite(val) and val > 0):
            raise InvalidArgument(f"{name} must be positive, got {val}")


def _near_pole(arg):
    k = round(arg / math.pi)
    return abs(arg - k * math.pi) < 1e-12 * max(1.0, abs(arg))


# -- Batman profiles -------------------------------------------------------------

def _batman_r(b, c, m1, m2, eps):
    s = np.sqrt(eps)
    r1 = 3 * eps * (m1 - m2) * (1 - b) - (c - b) ** 2 * (3 * m2 + 2 * c * m1 + m1 * b)
    r2 = (m1 * (c * c - b * b) + eps * (m1 + m2) + 2 * m2 * (c - b)
          - 2 * s * (m2 + m1 * b) / np.tan(b / s))
    return r1, r2


def batman_residuals(b, c, m1, m2, epsilon):
    """Residuals ``(r1, r2)`` of the Batman support conditions.

    ``r1`` is the rho mass balance multiplied through by ``3 eps``::

        3 eps m1 + 3 eps m2 b - 3 eps (m2 + m1 b) - (c - b)^2 (3 m2 + 2 c m1 + m1 b)

    and ``r2`` the continuity of ``rho + eta`` at ``x = b`` (left minus right)::

        m1 (c^2 - b^2) + eps (m1 + m2) + 2 m2 (c - b) - 2 sqrt(eps) (m2 + m1 b) cot(b / sqrt(eps))

    Raises
    ------
    PoleError
        If ``b / sqrt(eps)`` is a multiple of pi.
    InvalidArgument
        Unless ``0 < b <= c``.
    """
    _check_positive(epsilon=epsilon)
    if not 0 < b <= c:
        raise InvalidArgument(f"need 0 < b <= c, got b={b}, c={c}")
    s = math.sqrt(epsilon)
    if _near_pole(b / s):
        raise PoleError(f"b/sqrt(eps) = {b / s} is a multiple of pi")
    e = epsilon
    r1 = 3 * e * m1 + 3 * e * m2 * b - 3 * e * (m2 + m1 * b) - (c - b) ** 2 * (3 * m2 + 2 * c * m1 + m1 * b)
    r2 = (m1 * (c * c - b * b) + e * (m1 + m2) + 2 * m2 * (c - b)
          - 2 * s * (m2 + m1 * b) * math.cos(b / s) / math.sin(b / s))
    return r1, r2


def _batman_amplitude(b, m1, m2, eps):
    s = math.sqrt(eps)
    return (m2 + m1 * b) / (s * math.sin(b / s))


@register_family
@dataclass(frozen=True)
class BatmanProfile(Profile):
    """Symmetric steady state with a cosine core and parabolic rho wings."""

    m1: float
    m2: float
    epsilon: float
    b: float
    c: float
    u_hat2: float
    r1: float = 0.0
    r2: float = 0.0

    family = "batman"

    @property
    def eta_at_b(self):
        return 0.5 * self.u_hat2 * math.cos(self.b / math.sqrt(self.epsilon)) - 0.5 * self.m1

    def _pieces(self):
        m1, m2, e, b, c, u = self.m1, self.m2, self.epsilon, self.b, self.c, self.u_hat2
        s = math.sqrt(e)
        mid_r = lambda x: 0.5 * u * np.cos(x / s) - 0.5 * m2
        mid_e = lambda x: 0.5 * u * np.cos(x / s) - 0.5 * m1
        left = lambda x: -(m1 / (2 * e)) * (x * x - c * c) + (m2 / e) * (x + c)
        right = lambda x: -(m1 / (2 * e)) * (x * x - c * c) - (m2 / e) * (x - c)
        return {
            "rho": [(-b, b, mid_r), (-c, -b, left), (b, c, right)],
            "eta": [(-b, b, mid_e)],
        }

    def _parameters(self):
        return {"m1": self.m1, "m2": self.m2, "epsilon": self.epsilon}

    def _amplitudes(self):
        return {"b": self.b, "c": self.c, "u_hat2": self.u_hat2}

    def _residuals(self):
        return {"r1": self.r1, "r2": self.r2}

    @classmethod
    def _from_document(cls, doc):
        return cls(**doc["parameters"], **doc["amplitudes"], **doc["residuals"])


def _batman_profile(b, c, m1, m2, eps):
    r1, r2 = batman_residuals(b, c, m1, m2, eps)
    return BatmanProfile(m1, m2, eps, b, c, _batman_amplitude(b, m1, m2, eps), r1, r2)


def _batman_candidates(m1, m2, eps, n):
    s = math.sqrt(eps)
    bpole = math.pi * s
    bs = np.linspace(bpole * 1e-3, bpole * (1 - 1e-3), n)
    out = []
    if m1 == m2:
        # r1 vanishes to second order at b = c, so only r2(b, b) is left
        from scipy.optimize import brentq
        f = lambda b: _batman_r(b, b, m1, m2, eps)[1]
        vals = f(bs)
        for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
            b = brentq(f, bs[i], bs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            out.append((b, b))
        return out
    span = 1.05 * math.sqrt(eps * (m1 - m2) / m2)
    ts = np.linspace(0.0, 1.0, n)
    cs = bs[:, None] + span * ts[None, :]
    seeds = sign_change_seeds(lambda B, C: _batman_r(B, C, m1, m2, eps), bs, cs)
    f = lambda z: np.array(_batman_r(z[0], z[1], m1, m2, eps))
    for seed in seeds:
        try:
            z = damped_newton(f, seed, scale=[s, s])
        except NotFound:
            continue
        b, c = float(z[0]), float(z[1])
        if 0 < b < bpole and c >= b - 1e-12:
            out.append((b, max(b, c)))
    return out


def solve_batman(m1, m2, epsilon, scan=SCAN):
    """Support radii ``b <= c`` and amplitude of the Batman profile.

    Parameters
    ----------
    m1, m2 : float
        Masses with ``m1 >= m2 > 0`` (rho is the wider species).
    epsilon : float
        Cross-diffusivity.
    scan : int
        Resolution of the residual grid scanned for seeds.

    Raises
    ------
    InvalidArgument
        If ``m1 < m2`` or a parameter is not positive.
    NotFound
        If no non-negative profile exists (for instance beyond the fold of
        the two root branches at large ``eps``).
    """
    _check_positive(m1=m1, m2=m2, epsilon=epsilon)
    if m1 < m2:
        raise InvalidArgument(f"need m1 >= m2 (rho is the wider species), got m1={m1}, m2={m2}")
    best = None
    for b, c in _batman_candidates(m1, m2, epsilon, scan):
        try:
            prof = _batman_profile(b, c, m1, m2, epsilon)
        except PoleError:
            continue
        if max(abs(prof.r1), abs(prof.r2)) >= 1e-10 or prof.u_hat2 <= 0:
            continue
        if prof.eta_at_b < -NONNEG_TOL:
            continue
        if best is None or prof.eta_at_b > best.eta_at_b:
            best = prof
    if best is None:
        raise NotFound(f"no Batman profile for m1={m1}, m2={m2}, eps={epsilon}")
    return best


def eval_batman(profile, x):
    """Densities ``(rho, eta)`` of a Batman profile at ``x``; zero off the support."""
    return profile.evaluate(x)


@dataclass(frozen=True)
class AsymptoticSupport:
    """Leading coefficients of ``b ~ b0 sqrt(eps)`` and ``c ~ c0 sqrt(eps)``."""

    b0: float
    c0: float


def small_eps_support(m1, m2, balance="cos"):
    """Leading-order support radii of the Batman profile as ``eps -> 0``.

    With ``q = sqrt((m1 - m2) / m2)`` the rho mass balance gives
    ``c0 - b0 = q`` at leading order.  The second relation depends on
    ``balance``:

    ``"cos"`` (default)
        ``b0 - c0 + cos(b0) = 0``, so ``b0 = arccos(q)``; needs
        ``m2 <= m1 <= 2 m2``.
    ``"cot"``
        ``c0 - b0 = cot(b0)``, the O(sqrt(eps)) terms of the continuity
        condition, so ``b0 = arccot(q)``; needs only ``m1 >= m2``.  The
        numerical roots of the support conditions converge to this value.
    """
    _check_positive(m1=m1, m2=m2)
    arg = (m1 - m2) / m2
    if balance == "cos":
        if not 0 <= arg <= 1:
            raise InvalidArgument(f"(m1 - m2)/m2 = {arg} lies outside [0, 1]")
        q = math.sqrt(arg)
        b0 = math.acos(q)
    elif balance == "cot":
        if arg < 0:
            raise InvalidArgument(f"need m1 >= m2, got m1={m1}, m2={m2}")
        q = math.sqrt(arg)
        b0 = math.atan2(1.0, q)
    else:
        raise InvalidArgument(f"balance must be 'cos' or 'cot', got {balance!r}")
    return AsymptoticSupport(b0=b0, c0=q + b0)


# -- second-kind profiles -----------------------------------------------------

def _corner_width(c, p, mw, mk, eps):
    """``d - c`` from the corner mass ``p mk``: root of a monotone cubic."""
    c = np.asarray(c, dtype=float)
    rhs = p * mk * eps / 2
    if p == 0:
        return np.zeros_like(c)
    t = np.cbrt(3 * rhs / mk) * np.ones_like(c)
    for _ in range(100):
        f = mk / 3 * t ** 3 + (mk * c + mw) / 2 * t ** 2 - rhs
        fp = mk * t ** 2 + (mk * c + mw) * t
        t_new = np.maximum(t - f / fp, 0.5 * t)
        done = np.all(np.abs(t_new - t) <= 1e-15 * np.abs(t_new))
        t = t_new
        if done:
            break
    return t


def _sk_res(b, c, d, B, p, mw, mk, eps):
    s = np.sqrt(eps)
    K = mk / 2 * (d * d - c * c) + mw * (d - c)
    sb, cb = np.sin(b / s), np.cos(b / s)
    rho_r_b = (K + mw / 2 * (c * c - b * b) + (1 - p) * mk * (c - b)) / eps
    wing = (K * (c - b) + mw * (c - b) ** 2 * (2 * c + b) / 6 + (1 - p) * mk * (c - b) ** 2 / 2) / eps
    r_corner = 2 / eps * (d - c) ** 2 * (mk * (2 * d + c) / 6 + mw / 2) - p * mk
    r_middle = B * s * sb - mw * b - (1 - p) * mk
    r_rho = B * s * sb - mk * b + 2 * wing - mw
    r_b = B * cb - (mw + mk) / 2 - rho_r_b
    # sum continuity at c: rho^R(c) against the corner value eta^R(c)
    cont_c = K / eps - (mk / 2 * (d * d - c * c) + mw * (d - c)) / eps
    return (r_corner, r_middle, r_rho, r_b), cont_c


def second_kind_residuals(b, c, d, B, p, m1, m2, epsilon):
    """Conditions on a second-kind profile with rho wide and eta cornered.

    Returns
    -------
    residuals : tuple of 4 floats
        Corner mass ``2 int_c^d eta - p m2``, middle mass
        ``int_{-b}^{b} eta - (1-p) m2``, rho mass ``int rho - m1`` and the
        jump of ``rho + eta`` at ``b``.
    continuity_check_at_c : float
        Jump of ``rho + eta`` at ``c``, not imposed.
    """
    _check_positive(m1=m1, m2=m2, epsilon=epsilon)
    if not 0 < b <= c <= d:
        raise InvalidArgument(f"need 0 < b <= c <= d, got b={b}, c={c}, d={d}")
    if not 0 <= p <= 1:
        raise InvalidArgument(f"corner fraction p must lie in [0, 1], got {p}")
    res, cont = _sk_res(b, c, d, B, p, m1, m2, epsilon)
    return tuple(float(r) for r in res), float(cont)


@register_family
@dataclass(frozen=True)
class SecondKindProfile(Profile):
    """Symmetric steady state with corner bumps of the narrower species.

    Internally the wide species has mass ``mw = max(m1, m2)`` and the
    cornered one ``mk = min(m1, m2)``.  When ``exchanged`` is true the
    caller's rho is the cornered species; :meth:`evaluate` always returns
    ``(rho, eta)`` in the caller's labelling.
    """

    m1: float
    m2: float
    epsilon: float
    b: float
    c: float
    d: float
    B: float
    p: float
    residuals: tuple = (0.0, 0.0, 0.0, 0.0)
    continuity_check_at_c: float = 0.0
    exchanged: bool = False

    family = "second_kind"

    @property
    def mw(self):
        return self.m2 if self.exchanged else self.m1

    @property
    def mk(self):
        return self.m1 if self.exchanged else self.m2

    @property
    def cornered(self):
        """Name of the species with corner bumps."""
        return "rho" if self.exchanged else "eta"

    @property
    def middle_min(self):
        """Value of the cornered species at ``x = +-b``."""
        return 0.5 * self.B * math.cos(self.b / math.sqrt(self.epsilon)) - 0.5 * self.mw

    @property
    def u_corner(self):
        """Velocity of the cornered species just inside ``x = c``."""
        mw, mk, p, c = self.mw, self.mk, self.p, self.c
        return (1 - p) * mk - mk * c - mw + mw * c

    def _pieces(self):
        mw, mk, e = self.mw, self.mk, self.epsilon
        b, c, d, B, p = self.b, self.c, self.d, self.B, self.p
        s = math.sqrt(e)
        K = mk / 2 * (d * d - c * c) + mw * (d - c)
        wide_r = lambda x: (K + mw / 2 * (c * c - x * x) + (1 - p) * mk * (c - x)) / e
        wide_l = lambda x: wide_r(-x)
        corner_r = lambda x: (mk / 2 * (d * d - x * x) + mw * (d - x)) / e
        corner_l = lambda x: corner_r(-x)
        wide = [(-b, b, lambda x: 0.5 * B * np.cos(x / s) - 0.5 * mk),
                (-c, -b, wide_l), (b, c, wide_r)]
        corner = [(-b, b, lambda x: 0.5 * B * np.cos(x / s) - 0.5 * mw),
                  (-d, -c, corner_l), (c, d, corner_r)]
        if self.exchanged:
            return {"rho": corner, "eta": wide}
        return {"rho": wide, "eta": corner}

    def _parameters(self):
        return {"m1": self.m1, "m2": self.m2, "epsilon": self.epsilon, "p": self.p}

    def _amplitudes(self):
        return {"b": self.b, "c": self.c, "d": self.d, "B": self.B, "exchanged": self.exchanged}

    def _residuals(self):
        return {"residuals": list(self.residuals),
                "continuity_check_at_c": self.continuity_check_at_c}

    @classmethod
    def _from_document(cls, doc):
        res = doc["residuals"]
        return cls(**doc["parameters"], **doc["amplitudes"],
                   residuals=tuple(res["residuals"]),
                   continuity_check_at_c=res["continuity_check_at_c"])


def _canonical(m1, m2):
    return (m1, m2, False) if m1 >= m2 else (m2, m1, True)


def _sk_seeds(p, mw, mk, eps, n):
    s = math.sqrt(eps)
    bs = np.linspace(math.pi * s * 1e-3, math.pi * s * (1 - 1e-3), n)
    # the wide species' wing mass bounds (c - b)^3 <= 3 eps
    span = 1.05 * np.cbrt(3 * eps)
    cs = bs[:, None] + span * np.linspace(0.0, 1.0, n)[None, :]

    def reduced(b, c):
        d = c + _corner_width(c, p, mw, mk, eps)
        B = ((1 - p) * mk + mw * b) / (s * np.sin(b / s))
        res, _ = _sk_res(b, c, d, B, p, mw, mk, eps)
        return res[2], res[3]

    out = []
    for b, c in sign_change_seeds(reduced, bs, cs):
        d = c + float(_corner_width(c, p, mw, mk, eps))
        B = ((1 - p) * mk + mw * b) / (s * math.sin(b / s))
        out.append((b, c, d, B))
    return out


def _sk_newton(z0, p, mw, mk, eps):
    f = lambda z: np.array(_sk_res(z[0], z[1], z[2], z[3], p, mw, mk, eps)[0])
    s = math.sqrt(eps)
    return damped_newton(f, z0, scale=[s, s, s, 1.0])


def _sk_admissible(z, p, m1, m2, eps, exchanged, check_velocity):
    b, c, d, B = (float(v) for v in z)
    if not (0 < b < math.pi * math.sqrt(eps) and b <= c + 1e-12 and c <= d + 1e-12 and B > 0):
        return None
    c = max(b, c)
    d = max(c, d)
    if p > 0 and not d > c:
        return None
    mw, mk = (m2, m1) if exchanged else (m1, m2)
    res, cont = _sk_res(b, c, d, B, p, mw, mk, eps)
    if max(abs(r) for r in res) >= 1e-10:
        return None
    prof = SecondKindProfile(m1, m2, eps, b, c, d, B, p, tuple(float(r) for r in res),
                             float(cont), exchanged)
    if prof.middle_min < -NONNEG_TOL:
        return None
    if check_velocity and prof.u_corner < -VELOCITY_TOL:
        return None
    return prof


def solve_second_kind(p, m1, m2, epsilon, check_velocity=True, guess=None, scan=SCAN):
    """Second-kind profile with a fraction ``p`` of the narrower species in the corners.

    The wider species is the heavier one.  When ``m1 < m2`` the roles are
    exchanged internally (the attractive-attractive system is symmetric
    under exchanging the species) and the result records ``exchanged``.

    Parameters
    ----------
    p : float
        Corner mass fraction in ``[0, 1]``.
    check_velocity : bool
        Also require the cornered species' velocity at ``c`` to be
        non-negative (the upper envelope condition).
    guess : tuple, optional
        ``(b, c, d, B)`` starting point tried before the grid scan.

    Raises
    ------
    NotFound
        When no admissible root exists.
    """
    _check_positive(m1=m1, m2=m2, epsilon=epsilon)
    if not 0 <= p <= 1:
        raise InvalidArgument(f"corner fraction p must lie in [0, 1], got {p}")
    mw, mk, exchanged = _canonical(m1, m2)
    starts = [guess] if guess is not None else []
    tried_scan = False
    best = None
    while True:
        for z0 in starts:
            try:
                z = _sk_newton(z0, p, mw, mk, epsilon)
            except NotFound:
                continue
            prof = _sk_admissible(z, p, m1, m2, epsilon, exchanged, check_velocity)
            if prof is not None and (best is None or prof.middle_min > best.middle_min):
                best = prof
        if best is not None or tried_scan:
            break
        starts = _sk_seeds(p, mw, mk, epsilon, scan)
        tried_scan = True
    if best is None:
        raise NotFound(f"no admissible second-kind profile for p={p}, eps={epsilon}")
    return best


def _guess(prof):
    return (prof.b, prof.c, prof.d, prof.B)


@dataclass(frozen=True)
class EnvelopeRange:
    """Interval of corner fractions giving admissible, stable second-kind profiles."""

    p_min: float
    p_max: float
    epsilon: float
    lower: SecondKindProfile = field(default=None, repr=False, compare=False)
    upper: SecondKindProfile = field(default=None, repr=False, compare=False)


def _bisect(pred, lo, hi, lo_prof, tol):
    """Largest p in ``[lo, hi)`` with ``pred`` true, given ``pred(lo)`` true and ``pred(hi)`` false."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        prof = pred(mid, lo_prof)
        if prof is not None:
            lo, lo_prof = mid, prof
        else:
            hi = mid
    return lo, lo_prof


def _bisect_down(pred, lo, hi, hi_prof, tol):
    """Smallest p in ``(lo, hi]`` with ``pred`` true, given ``pred(hi)`` true and ``pred(lo)`` false."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        prof = pred(mid, hi_prof)
        if prof is not None:
            hi, hi_prof = mid, prof
        else:
            lo = mid
    return hi, hi_prof


def envelope_range(m1, m2, epsilon, tol=1e-10, step=0.05):
    """Smallest and largest admissible corner fractions at ``epsilon``.

    ``p_min`` is where the cornered species' middle value at ``b`` reaches
    zero (or 0 when the Batman profile itself is non-negative).  ``p_max``
    is where its velocity at ``c`` reaches zero.  Both are located by
    bisection with :func:`solve_second_kind` warm-started from the last
    admissible profile.

    Raises
    ------
    NotFound
        If the window is empty.
    """

    mw, mk, exchanged = _canonical(m1, m2)

    def admissible(p, near, check_velocity):
        if near is not None:
            # Follow the branch through ``near``.  The lower end is a fold, so
            # Newton failing a short step away means the branch has ended.
            try:
                z = _sk_newton(_guess(near), p, mw, mk, epsilon)
            except NotFound:
                if abs(p - near.p) <= CONTINUATION_STEP:
                    return None
            else:
                return _sk_admissible(z, p, m1, m2, epsilon, exchanged, check_velocity)
        try:
            return solve_second_kind(p, m1, m2, epsilon, check_velocity=check_velocity)
        except NotFound:
            return None

    nonneg = lambda p, near: admissible(p, near, False)

    # lower end
    low = nonneg(0.0, None)
    if low is not None:
        p_min = 0.0
    else:
        prev = 0.0
        p = step
        while p < 1.0 and low is None:
            low = nonneg(p, None)
            if low is None:
                prev, p = p, p + step
        if low is None:
            raise NotFound(f"no non-negative second-kind profile at eps={epsilon}")
        p_min, low = _bisect_down(nonneg, prev, p, low, tol)

    # upper end
    stable = lambda p, near: (lambda prof: prof if prof is not None and prof.u_corner >= -VELOCITY_TOL
                              else None)(admissible(p, near, False))
    if low.u_corner < -VELOCITY_TOL:
        raise NotFound(f"second-kind window is empty at eps={epsilon}")
    lo, lo_prof = p_min, low
    hi = None
    p = p_min + step
    while p < 1.0:
        prof = stable(p, lo_prof)
        if prof is None:
            hi = p
            break
        lo, lo_prof = p, prof
        p += step
    if hi is None:
        hi = 1.0
        if stable(1.0, lo_prof) is not None:
            return EnvelopeRange(p_min, 1.0, epsilon, low, stable(1.0, lo_prof))
    p_max, up = _bisect(stable, lo, hi, lo_prof, tol)
    return EnvelopeRange(p_min, p_max, epsilon, low, up)


@dataclass(frozen=True)
class BifurcationScan:
    """Existence of both profile kinds over a grid of ``eps``.

    ``eps1`` is the smallest grid value with a second-kind profile and
    ``eps2`` the largest with a Batman profile (``nan`` when not detected).
    ``p_min`` and ``p_max`` are ``nan`` where no second-kind window exists.
    """

    m1: float
    m2: float
    eps_grid: np.ndarray
    batman_exists: np.ndarray
    second_kind_exists: np.ndarray
    p_min: np.ndarray
    p_max: np.ndarray
    eps1: float
    eps2: float

    def rows(self):
        for i, e in enumerate(self.eps_grid):
            yield (float(e), bool(self.batman_exists[i]), bool(self.second_kind_exists[i]),
                   float(self.p_min[i]), float(self.p_max[i]))


def bifurcation_point(m1, m2, epsilon):
    """``(batman_exists, second_kind_exists, p_min, p_max)`` at one ``eps``.

    ``p_min`` and ``p_max`` are ``nan`` when no second-kind window exists.
    """
    mw, mk, _ = _canonical(m1, m2)
    try:
        solve_batman(mw, mk, epsilon)
        bat = True
    except NotFound:
        bat = False
    try:
        env = envelope_range(m1, m2, epsilon)
    except NotFound:
        return bat, False, math.nan, math.nan
    return bat, env.p_max > 0, env.p_min, env.p_max


def bifurcation_scan(m1, m2, eps_range, steps, map_fn=map):
    """Try both constructions on ``steps`` evenly spaced ``eps`` values.

    The Batman profile is always built with the heavier species wide, so
    masses may be given in either order.  ``map_fn`` (for example an
    executor's ``map``) evaluates the grid points; it must keep their order.
    """
    lo, hi = eps_range
    _check_positive(m1=m1, m2=m2, eps_lo=lo, eps_hi=hi)
    if hi < lo or steps < 1:
        raise InvalidArgument(f"bad scan range {eps_range} with {steps} steps")
    grid = np.linspace(lo, hi, int(steps))
    rows = list(map_fn(bifurcation_point, [m1] * grid.size, [m2] * grid.size, grid.tolist()))
    bat = np.array([r[0] for r in rows], dtype=bool)
    sk = np.array([r[1] for r in rows], dtype=bool)
    pmin = np.array([r[2] for r in rows], dtype=float)
    pmax = np.array([r[3] for r in rows], dtype=float)
    eps1 = float(grid[sk][0]) if sk.any() else math.nan
    eps2 = float(grid[bat][-1]) if bat.any() else math.nan
    return BifurcationScan(m1, m2, grid, bat, sk, pmin, pmax, eps1, eps2)


def verify_steady_state(profile, params=None):
    """Check the steady-state condition of ``profile`` by quadrature.

    ``params`` defaults to the attractive-attractive model at the profile's
    ``epsilon``.
    """
    if params is None:
        params = attractive_attractive(profile.epsilon)
    return verify_profile(profile, params, speed=0.0)
