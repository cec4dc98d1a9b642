"""Common behaviour of the closed-form profiles.

A profile is a pair of piecewise-smooth densities ``(rho, eta)`` with known
support components, optionally moving at a constant speed.  This module
holds the quadrature check that the potentials are constant on every support
component, and the JSON document round trip.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidArgument
from .model_core import ClosedForm

__all__ = ["Profile", "SteadyStateResidual", "verify_profile", "profile_to_json",
           "profile_from_document", "profile_from_json", "register_family"]

_FAMILIES = {}


def register_family(cls):
    """Class decorator: make ``cls`` reconstructible from its document."""
    _FAMILIES[cls.family] = cls
    return cls


class Profile:
    """Base class; subclasses define the densities and their supports.

    Subclasses implement ``_pieces()`` returning, per species, a list of
    ``(lo, hi, func)`` with ``func`` vectorised and valid on ``[lo, hi]``,
    and the document hooks ``_parameters``, ``_amplitudes``, ``_residuals``
    and ``_from_fields``.
    """

    family = "profile"
    speed = 0.0

    def _pieces(self):
        raise NotImplementedError

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x, t=0.0):
        """Densities ``(rho, eta)`` at positions ``x`` and time ``t``."""
        x = np.asarray(x, dtype=float)
        z = x - self.speed * t
        out = []
        for species in ("rho", "eta"):
            val = np.zeros_like(z)
            done = np.zeros(z.shape, dtype=bool)
            for lo, hi, func in self._pieces()[species]:
                sel = (z >= lo) & (z <= hi) & ~done
                if np.any(sel):
                    val[sel] = func(z[sel])
                    done |= sel
            out.append(np.maximum(val, 0.0))
        return out[0], out[1]

    def density(self, species, t=0.0):
        """One species as a :class:`ClosedForm` ready for grid projection."""
        idx = ("rho", "eta").index(species)
        bps = [lo + self.speed * t for lo, _, _ in self._pieces()[species]]
        bps += [hi + self.speed * t for _, hi, _ in self._pieces()[species]]
        return ClosedForm(lambda x: self.evaluate(x, t)[idx], tuple(sorted(set(bps))))

    def components(self):
        """Connected support components ``{"rho": [(lo, hi)...], "eta": [...]}``."""
        out = {}
        for species, pieces in self._pieces().items():
            spans = sorted((lo, hi) for lo, hi, _ in pieces if hi > lo)
            merged = []
            for lo, hi in spans:
                if merged and lo <= merged[-1][1] + 1e-14:
                    merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
                else:
                    merged.append((lo, hi))
            out[species] = merged
        return out

    def breakpoints(self):
        pts = set()
        for pieces in self._pieces().values():
            for lo, hi, _ in pieces:
                pts.update((lo, hi))
        return sorted(pts)

    def masses(self):
        """Both masses by adaptive quadrature of each piece."""
        out = []
        for species in ("rho", "eta"):
            total = 0.0
            for lo, hi, func in self._pieces()[species]:
                if hi > lo:
                    total += quad(lambda y: float(func(np.array([y]))[0]), lo, hi,
                                  epsabs=1e-14, epsrel=1e-13)[0]
            out.append(total)
        return tuple(out)

    # -- documents ------------------------------------------------------------

    def to_document(self):
        comps = self.components()
        return {
            "family": self.family,
            "parameters": self._parameters(),
            "support": {k: [list(iv) for iv in v] for k, v in comps.items()},
            "amplitudes": self._amplitudes(),
            "residuals": self._residuals(),
            "speed": float(self.speed),
        }

    def _parameters(self):
        return {}

    def _amplitudes(self):
        return {}

    def _residuals(self):
        return {}


def profile_from_document(doc):
    """Rebuild a profile from :meth:`Profile.to_document` output."""
    try:
        cls = _FAMILIES[doc["family"]]
    except KeyError:
        raise InvalidArgument(f"unknown profile family {doc.get('family')!r}") from None
    return cls._from_document(doc)


def profile_to_json(profile, **kw):
    return json.dumps(profile.to_document(), **kw)


def profile_from_json(text):
    return profile_from_document(json.loads(text))


# -- steady-state verification --------------------------------------------------

@dataclass(frozen=True)
class SteadyStateResidual:
    """Constants of the potentials on the support and the worst deviation.

    ``c1`` and ``c2`` are the constants on the first support component of
    ``rho`` and ``eta`` (0 for an empty support); the per-component values
    are in ``c1_components`` and ``c2_components``.
    """

    c1: float
    c2: float
    max_deviation: float
    c1_components: tuple = ()
    c2_components: tuple = ()


def _convolve_at(x, W, pieces):
    total = 0.0
    for lo, hi, func in pieces:
        if not hi > lo:
            continue
        g = (lambda y, func=func: float(W(x - y)) * float(func(np.array([y]))[0]))
        pts = [x] if lo < x < hi else None
        total += quad(g, lo, hi, points=pts, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return total


def verify_profile(profile, params, speed=None, samples=25):
    """Check that each potential plus ``v x`` is constant on its species' support.

    For ``rho`` the potential is ``W11*rho + W12*eta + eps (rho + eta)`` and
    for ``eta`` it is ``W22*eta + W21*rho + eps (rho + eta)``.  Convolutions
    are evaluated by adaptive quadrature split at every breakpoint of the
    profile and at the evaluation point.  ``speed`` overrides the profile's
    own speed (useful for sensitivity checks).
    """
    v = profile.speed if speed is None else float(speed)
    pieces = profile._pieces()
    comps = profile.components()
    eps = params.epsilon
    W11, W12, W21, W22 = params.potentials
    kernels = {"rho": ((W11, "rho"), (W12, "eta")), "eta": ((W22, "eta"), (W21, "rho"))}
    worst = 0.0
    consts = {"rho": [], "eta": []}
    j = np.arange(samples)
    s = 0.5 - 0.5 * np.cos(np.pi * (j + 0.5) / samples)
    for species in ("rho", "eta"):
        for lo, hi in comps[species]:
            xs = lo + (hi - lo) * s
            r, e = profile.evaluate(xs)
            phi = eps * (r + e) + v * xs
            for k, x in enumerate(xs):
                for W, other in kernels[species]:
                    phi[k] += _convolve_at(x, W, pieces[other])
            mid = 0.5 * (phi.max() + phi.min())
            consts[species].append(float(mid))
            worst = max(worst, float(phi.max() - mid))
    c1 = consts["rho"][0] if consts["rho"] else 0.0
    c2 = consts["eta"][0] if consts["eta"] else 0.0
    return SteadyStateResidual(c1, c2, worst, tuple(consts["rho"]), tuple(consts["eta"]))
