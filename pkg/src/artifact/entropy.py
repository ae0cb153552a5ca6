"""Entropy formulas for commuting pairs driven by Bernoulli words.

Everything is in nats. The metric entropy of the fiber measure is never
estimated from data: the unstable-exponent sums below are either compared
with an analytic value or used as the fiber entropy directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, softmax, xlogy

from .errors import InvalidInputError
from .systems import validate_nu

OPTIMUM_TOL = 1e-12


def unstable_entropy(spectrum) -> float:
    """Sum of lambda * multiplicity over strictly positive exponents.

    Accepts a LyapunovSpectrum or an iterable of (exponent, multiplicity).
    """
    pairs = zip(spectrum.exponents, spectrum.multiplicities) if hasattr(spectrum, "exponents") \
        else spectrum
    return float(sum(lam * m for lam, m in pairs if lam > 0))


def ruelle_bound(h, nu) -> float:
    nu = validate_nu(nu)
    return float(nu[0] * h[0] + nu[1] * h[1])


def srb_lower_bound(splitting, nu) -> float:
    """Weighted sum of positive exponents counted with defect dimensions."""
    if splitting is None:
        raise InvalidInputError("srb_lower_bound needs a joint splitting")
    nu = validate_nu(nu)
    return float(sum(nu[i] * lam * d for i in (0, 1) for lam, _, d in splitting.defect_dims(i)))


def shannon_entropy(nu) -> float:
    nu = validate_nu(nu)
    return float(-np.sum(xlogy(nu, nu)))


def abramov_rokhlin(nu, fiber_entropy: float) -> float:
    if fiber_entropy < 0:
        raise InvalidInputError("fiber entropy must be nonnegative")
    return shannon_entropy(nu) + float(fiber_entropy)


def pressure_bernoulli(j) -> float:
    j = np.asarray(j, float)
    if j.shape != (2,) or not np.all(np.isfinite(j)):
        raise InvalidInputError("J must be a finite pair")
    return float(logsumexp(j))


def optimal_weights(j) -> tuple[float, float]:
    j = np.asarray(j, float)
    if j.shape != (2,) or not np.all(np.isfinite(j)):
        raise InvalidInputError("J must be a finite pair")
    w = softmax(j)
    return float(w[0]), float(1.0 - w[0])


def friedland_formula(h1: float, h2: float) -> float:
    if h1 < 0 or h2 < 0:
        raise InvalidInputError("unstable entropies must be nonnegative")
    return float(logsumexp([h1, h2]))


def friedland_upper_bound(nu, pesin_value: float) -> float:
    return shannon_entropy(nu) + float(pesin_value)


def variational_objective(nu, j) -> float:
    """H(nu) + <nu, J>."""
    return shannon_entropy(nu) + float(np.dot(validate_nu(nu), j))


@dataclass(frozen=True)
class EntropyReport:
    nu: tuple
    per_generator_unstable: tuple
    ruelle_bound: float
    pesin_value: float
    srb_lower: float | None
    shift_entropy: float
    skew_entropy: float
    friedland_value: float
    friedland_upper: float
    optimal_nu: tuple
    h3_holds: bool | None
    provenance: dict = field(default_factory=dict)

    @property
    def at_optimum(self) -> bool:
        return abs(self.friedland_upper - self.friedland_value) <= 1e-10

    @property
    def upper_status(self) -> str:
        # at other weights the value is informational, never a bound
        return "optimal" if self.at_optimum else "below-optimum (informational)"

    def to_dict(self) -> dict:
        return {
            "nu": list(self.nu),
            "per_generator_unstable": list(self.per_generator_unstable),
            "ruelle_bound": self.ruelle_bound,
            "pesin_value": self.pesin_value,
            "srb_lower": self.srb_lower,
            "shift_entropy": self.shift_entropy,
            "skew_entropy": self.skew_entropy,
            "friedland_value": self.friedland_value,
            "friedland_upper": self.friedland_upper,
            "friedland_upper_status": self.upper_status,
            "optimal_nu": list(self.optimal_nu),
            "h3_holds": self.h3_holds,
            "provenance": dict(self.provenance),
        }


def entropy_report(h, nu, splitting=None, provenance: dict | None = None) -> EntropyReport:
    """Assemble every entropy quantity from the generators' unstable entropies.

    ``pesin_value`` is the same weighted sum as ``ruelle_bound``; it is an
    equality claim only when the unstable spaces agree, recorded as
    ``h3_holds`` when a splitting is supplied.
    """
    h = (float(h[0]), float(h[1]))
    nu = validate_nu(nu)
    ruelle = ruelle_bound(h, nu)
    shift = shannon_entropy(nu)
    return EntropyReport(
        nu=nu,
        per_generator_unstable=h,
        ruelle_bound=ruelle,
        pesin_value=ruelle,
        srb_lower=None if splitting is None else srb_lower_bound(splitting, nu),
        shift_entropy=shift,
        skew_entropy=abramov_rokhlin(nu, ruelle),
        friedland_value=friedland_formula(*h),
        friedland_upper=friedland_upper_bound(nu, ruelle),
        optimal_nu=optimal_weights(h),
        h3_holds=None if splitting is None else splitting.h3_holds(),
        provenance=dict(provenance or {}),
    )
