"""Closed-form states when rho attracts eta and eta is repelled by rho.

Potentials: ``W11 = W22 = x^2/2``, ``W12 = |x|`` and ``W21 = -|x|``.  The
species segregate: rho sits in one parabolic bump and eta splits into
bumps on either side, or in the travelling case rho chases eta.

With ``c = (3 eps / 2)^(1/3)`` every bump of mass ``mu`` and curvature
``-m/eps`` has width ``(12 eps mu / m)^(1/3)``; all support points follow
from this and from the first moment ``M2`` of eta.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgument
from .model_core import attractive_repulsive
from .profiles import Profile, SteadyStateResidual, register_family, verify_profile

__all__ = [
    "SegregatedProfile", "CriticalValues", "DiracLimit", "TwoPulseProfile",
    "ThreePulseProfile", "M2Range", "SteadyStateResidual",
    "segregated_state", "critical_epsilon", "max_M2", "vanishing_diffusion_limit",
    "two_pulse", "adjacent_pulse_support", "three_pulse", "three_pulse_M2_range",
    "verify_comoving_state", "rho_half_width",
]

ORDER_TOL = 1e-12


def _check_positive(**kw):
    for name, val in kw.items():
        if not (np.isfinite(val) and val > 0):
            raise InvalidArgument(f"{name} must be positive, got {val}")


def rho_half_width(epsilon):
    """Half-width ``c = (3 eps/2)^(1/3)`` of the centred rho bump of a segregated state."""
    _check_positive(epsilon=epsilon)
    return float(np.cbrt(1.5 * epsilon))


def _check_order(points, scale):
    """``points`` is a list of ``(name, value)``; each pair must be ordered.

    Entries are ``(lhs, rhs, strict)`` triples of ``(name, value)`` pairs.
    """
    tol = ORDER_TOL * max(1.0, scale)
    for (ln, lv), (rn, rv), strict in points:
        ok = lv < rv - tol if strict else lv <= rv + tol
        if not ok:
            op = "<" if strict else "<="
            raise InvalidArgument(f"support ordering violated: {ln} {op} {rn} fails "
                                  f"({ln}={lv:.12g}, {rn}={rv:.12g})")


def _parabola(curv, root, slope):
    """``-(curv/2)(z^2 - root^2) + slope (z - root)``."""
    return lambda z: -0.5 * curv * (z * z - root * root) + slope * (z - root)


# -- steady states ----------------------------------------------------------------

@register_family
@dataclass(frozen=True)
class SegregatedProfile(Profile):
    """rho on ``[-c, c]`` between the two eta bumps ``[a, b]`` and ``[d, e]``."""

    m1: float
    m2: float
    M2: float
    epsilon: float
    a: float
    b: float
    c: float
    d: float
    e: float
    M1: float = 0.0

    family = "segregated"

    def _pieces(self):
        m1, m2, M2, eps = self.m1, self.m2, self.M2, self.epsilon
        rho = _parabola(m1 / eps, self.c, 0.0)
        left = _parabola(m2 / eps, self.a, (M2 - m1) / eps)
        right = _parabola(m2 / eps, self.e, (M2 + m1) / eps)
        return {"rho": [(-self.c, self.c, rho)],
                "eta": [(self.a, self.b, left), (self.d, self.e, right)]}

    def _parameters(self):
        return {"m1": self.m1, "m2": self.m2, "M2": self.M2, "epsilon": self.epsilon}

    def _amplitudes(self):
        return {k: getattr(self, k) for k in ("a", "b", "c", "d", "e", "M1")}

    @classmethod
    def _from_document(cls, doc):
        return cls(**doc["parameters"], **doc["amplitudes"])


def critical_epsilon(m1, m2):
    """``eps_c = (4/9) m1^3 (2^(1/3) - 1) / m2^3``: above it no segregated state exists."""
    _check_positive(m1=m1, m2=m2)
    return 4.0 / 9.0 * m1 ** 3 * (2.0 ** (1.0 / 3.0) - 1.0) / m2 ** 3


@dataclass(frozen=True)
class CriticalValues:
    """``eps_c`` and the largest admissible ``|M2|`` at a given ``eps``."""

    eps_c: float
    M2_max: float


def max_M2(m1, m2, epsilon):
    """``M2_max = m1 - (m2/2) eps^(1/3) (12^(1/3) + 6^(1/3))``.

    Segregated states exist for ``|M2| <= M2_max``; the interval is empty
    once ``eps > eps_c``.
    """
    _check_positive(m1=m1, m2=m2, epsilon=epsilon)
    m2max = m1 - 0.5 * m2 * np.cbrt(epsilon) * (np.cbrt(12.0) + np.cbrt(6.0))
    return CriticalValues(eps_c=critical_epsilon(m1, m2), M2_max=float(m2max))


def segregated_state(m1, m2, M2, epsilon):
    """Segregated steady state with eta first moment ``M2`` (rho centred at 0).

    ::

        c = (3 eps/2)^(1/3)
        b = (M2 - m1)/m2 + (6 eps)^(1/3)/2,   a = 2 (M2 - m1)/m2 - b
        d = (M2 + m1)/m2 - (6 eps)^(1/3)/2,   e = 2 (M2 + m1)/m2 - d

    Raises
    ------
    InvalidArgument
        Naming the violated inequality of ``a < b <= -c < c <= d < e``
        (``eps`` at or above ``eps_c`` or ``|M2| > M2_max``).
    """
    _check_positive(m1=m1, m2=m2, epsilon=epsilon)
    c = float(rho_half_width(epsilon))
    h = 0.5 * float(np.cbrt(6.0 * epsilon))
    b = (M2 - m1) / m2 + h
    a = 2 * (M2 - m1) / m2 - b
    d = (M2 + m1) / m2 - h
    e = 2 * (M2 + m1) / m2 - d
    scale = max(abs(a), abs(e))
    try:
        _check_order([(("a", a), ("b", b), True), (("b", b), ("-c", -c), False),
                      (("c", c), ("d", d), False), (("d", d), ("e", e), True)], scale)
    except InvalidArgument as err:
        crit = max_M2(m1, m2, epsilon)
        raise InvalidArgument(f"{err} (|M2| must not exceed M2_max={crit.M2_max:.6g}; "
                              f"eps_c={crit.eps_c:.6g})") from None
    return SegregatedProfile(m1, m2, M2, epsilon, a, min(b, -c), c, max(d, c), e)


@dataclass(frozen=True)
class DiracLimit:
    """Point masses left as ``eps -> 0`` and the particle-system velocities there.

    ``residuals`` are the three particle velocities, computed in exact
    rational arithmetic from the float inputs.
    """

    rho_location: float
    eta_locations: tuple
    weights: tuple
    residuals: tuple


def vanishing_diffusion_limit(m1, m2, M2):
    """rho collapses to ``m1`` at 0; eta to ``m2/2`` at ``(M2 -+ m1)/m2``.

    Raises
    ------
    InvalidArgument
        Unless ``|M2| < m1``.
    """
    _check_positive(m1=m1, m2=m2)
    if not abs(M2) < m1:
        raise InvalidArgument(f"need |M2| < m1, got M2={M2}, m1={m1}")
    q1, q2, Q = Fraction(m1), Fraction(m2), Fraction(M2)
    X = Fraction(0)
    Y1, Y2 = (Q - q1) / q2, (Q + q1) / q2
    w = q2 / 2

    def sign(z):
        return (z > 0) - (z < 0)

    # dX/dt = -(W11' * rho + W12' * eta)(X) with W11' = x, W12' = sign
    dX = -(q1 * (X - X) + w * sign(X - Y1) + w * sign(X - Y2))
    # dY/dt = -(W22' * eta + W21' * rho)(Y) with W22' = x, W21' = -sign
    dY1 = -(w * (Y1 - Y1) + w * (Y1 - Y2) - q1 * sign(Y1 - X))
    dY2 = -(w * (Y2 - Y1) + w * (Y2 - Y2) - q1 * sign(Y2 - X))
    return DiracLimit(rho_location=0.0, eta_locations=(float(Y1), float(Y2)),
                      weights=(m1, m2 / 2, m2 / 2), residuals=(dX, dY1, dY2))


# -- travelling pulses ------------------------------------------------------------

@register_family
@dataclass(frozen=True)
class TwoPulseProfile(Profile):
    """eta on ``[-a, a]`` chased by rho on ``[-x0 - a, -x0 + a]``, both moving at ``v``.

    The shape is ``u(z) = -(m/2eps)(z^2 - a^2)`` in the co-moving variable
    ``z = x - v t``.  ``v`` is normally ``m``; other values are accepted so
    that wrong-speed residuals can be examined.
    """

    m: float
    epsilon: float
    a: float
    x0: float
    v: float

    family = "two_pulse"

    @property
    def speed(self):
        return self.v

    def _pieces(self):
        u = _parabola(self.m / self.epsilon, self.a, 0.0)
        x0 = self.x0
        return {"rho": [(-x0 - self.a, -x0 + self.a, lambda z: u(z + x0))],
                "eta": [(-self.a, self.a, u)]}

    def _parameters(self):
        return {"m": self.m, "epsilon": self.epsilon, "x0": self.x0}

    def _amplitudes(self):
        return {"a": self.a, "v": self.v}

    @classmethod
    def _from_document(cls, doc):
        return cls(**doc["parameters"], **doc["amplitudes"])


def two_pulse(m, epsilon, x0):
    """Two travelling pulses of equal mass ``m`` at distance ``x0``; speed ``v = m``.

    Raises
    ------
    InvalidArgument
        If ``x0 < 2 (3 eps/2)^(1/3)`` (the pulses would overlap).
    """
    _check_positive(m=m, epsilon=epsilon)
    a = float(rho_half_width(epsilon))
    if not x0 >= 2 * a * (1 - ORDER_TOL):
        raise InvalidArgument(f"separation x0={x0} is below 2a={2 * a:.12g}; the pulses would overlap")
    return TwoPulseProfile(m, epsilon, a, float(x0), float(m))


def adjacent_pulse_support(epsilon):
    """Support width ``(12 eps)^(1/3)`` of a pulse in the adjacent ansatz."""
    _check_positive(epsilon=epsilon)
    return float(np.cbrt(12.0 * epsilon))


@register_family
@dataclass(frozen=True)
class ThreePulseProfile(Profile):
    """rho on ``[-c, c]`` with eta bumps of masses ``mL`` on ``[a, b]`` and ``mR`` on ``[d, e]``.

    All points are in the co-moving variable ``z = x - v t`` with
    ``v = mR - mL``.  A bump of zero mass degenerates to a point.
    """

    m: float
    mL: float
    mR: float
    M2: float
    epsilon: float
    a: float
    b: float
    c: float
    d: float
    e: float
    v: float

    family = "three_pulse"

    @property
    def speed(self):
        return self.v

    def _pieces(self):
        m, M2, v, eps = self.m, self.M2, self.v, self.epsilon
        rho = _parabola(m / eps, self.c, 0.0)
        left = _parabola(m / eps, self.a, (M2 - m - v) / eps)
        right = _parabola(m / eps, self.e, (M2 + m - v) / eps)
        eta = []
        if self.b > self.a:
            eta.append((self.a, self.b, left))
        if self.e > self.d:
            eta.append((self.d, self.e, right))
        return {"rho": [(-self.c, self.c, rho)], "eta": eta}

    def _parameters(self):
        return {"m": self.m, "mL": self.mL, "mR": self.mR, "M2": self.M2, "epsilon": self.epsilon}

    def _amplitudes(self):
        return {k: getattr(self, k) for k in ("a", "b", "c", "d", "e", "v")}

    @classmethod
    def _from_document(cls, doc):
        return cls(**doc["parameters"], **doc["amplitudes"])


def _check_split(m, mL, mR):
    _check_positive(m=m)
    if mL < 0 or mR < 0:
        raise InvalidArgument(f"bump masses must be non-negative, got mL={mL}, mR={mR}")
    if abs(mL + mR - m) > 1e-12 * m:
        raise InvalidArgument(f"the eta bumps must carry the rho mass: mL + mR = {mL + mR} != m = {m}")


def three_pulse(m, mL, mR, M2, epsilon):
    """rho of mass ``m`` travelling between eta bumps of masses ``mL + mR = m``.

    ::

        v = mR - mL,  c = (3 eps/2)^(1/3)
        b = (M2 - m - v)/m + (12 eps mL/m)^(1/3)/2,   a = 2 (M2 - m - v)/m - b
        d = (M2 + m - v)/m - (12 eps mR/m)^(1/3)/2,   e = 2 (M2 + m - v)/m - d

    Raises
    ------
    InvalidArgument
        If the bump masses do not add up to ``m`` or the supports are not
        ordered ``a < b <= -c < c <= d < e``.  Conditions on an empty bump
        are dropped.
    """
    _check_positive(epsilon=epsilon)
    _check_split(m, mL, mR)
    v = mR - mL
    c = float(rho_half_width(epsilon))
    b = (M2 - m - v) / m + 0.5 * float(np.cbrt(12.0 * epsilon * mL / m))
    a = 2 * (M2 - m - v) / m - b
    d = (M2 + m - v) / m - 0.5 * float(np.cbrt(12.0 * epsilon * mR / m))
    e = 2 * (M2 + m - v) / m - d
    if mL == 0:
        a = b
    if mR == 0:
        e = d
    scale = max(abs(a), abs(e))
    try:
        checks = []
        if mL > 0:
            checks += [(("a", a), ("b", b), True), (("b", b), ("-c", -c), False)]
        if mR > 0:
            checks += [(("c", c), ("d", d), False), (("d", d), ("e", e), True)]
        _check_order(checks, scale)
    except InvalidArgument as err:
        rng = three_pulse_M2_range(m, mL, mR, epsilon)
        raise InvalidArgument(f"{err} (M2 must lie in [{rng.M2_min:.6g}, {rng.M2_max:.6g}])") from None
    if mL > 0:
        b = min(b, -c)
    if mR > 0:
        d = max(d, c)
    return ThreePulseProfile(m, mL, mR, M2, epsilon, a, b, c, d, e, v)


@dataclass(frozen=True)
class M2Range:
    """First moments of eta for which the three-pulse supports are ordered."""

    M2_min: float
    M2_max: float


def three_pulse_M2_range(m, mL, mR, epsilon):
    """Range of ``M2`` with ``b <= -c`` and ``c <= d``.

    ``M2_max = m + v - m c - (12 eps mL m^2)^(1/3)/2`` makes ``b = -c`` and
    ``M2_min = m c + (12 eps mR m^2)^(1/3)/2 - m + v`` makes ``d = c``.  For
    ``mL = mR`` this is the steady-state interval ``[-M2_max, M2_max]``.
    An empty bump imposes nothing, so ``mL = 0`` leaves ``M2_max`` infinite
    and ``mR = 0`` leaves ``M2_min`` at minus infinity.
    """
    _check_positive(epsilon=epsilon)
    _check_split(m, mL, mR)
    v = mR - mL
    c = float(rho_half_width(epsilon))
    hi = m + v - m * c - 0.5 * float(np.cbrt(12.0 * epsilon * mL * m * m))
    lo = m * c + 0.5 * float(np.cbrt(12.0 * epsilon * mR * m * m)) - m + v
    if mL == 0:
        hi = math.inf
    if mR == 0:
        lo = -math.inf
    return M2Range(M2_min=lo, M2_max=hi)


def verify_comoving_state(profile, params=None, speed=None):
    """Check that each potential plus ``v z`` is constant on every support component.

    ``params`` defaults to the attractive-repulsive model at the profile's
    ``epsilon``; ``speed`` overrides the profile's own speed.
    """
    if params is None:
        params = attractive_repulsive(profile.epsilon)
    return verify_profile(profile, params, speed=speed)
