"""Truncated Fock-space primitives: photon-number distributions and
coherent-state expansions.

Everything here is pure and immutable; factorial/binomial arithmetic is
done in log-space so that distributions stay finite well past n = 170,
where a naive n! overflows a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoherentAmplitude:
    """A coherent state parameterized by its mean photon number |alpha|^2.

    The phase is stored for completeness but plays no role in any of the
    phase-insensitive detector models in this package.
    """

    mean_photon: float
    phase: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.mean_photon) or self.mean_photon < 0:
            raise ValueError(
                f"mean photon number must be finite and >= 0, got {self.mean_photon}"
            )


@dataclass(frozen=True)
class FockDistribution:
    """A photon-number probability vector truncated at some maximum n.

    Truncated distributions are deliberately not renormalized: the missing
    mass is exposed through :attr:`tail_mass` so downstream consumers can
    decide how to treat it.
    """

    probs: np.ndarray = field()

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a nonempty 1-d vector")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probs must be finite")
        if np.any(probs < 0):
            raise ValueError("probs must be nonnegative")
        total = float(probs.sum())
        if total > 1 + 1e-12:
            raise ValueError(f"probs sum to {total} > 1")
        object.__setattr__(self, "probs", probs)

    @property
    def truncation(self) -> int:
        """Largest photon number carried by the vector."""
        return self.probs.size - 1

    @property
    def tail_mass(self) -> float:
        """Probability mass lost to truncation, clipped at zero."""
        return max(0.0, 1.0 - float(self.probs.sum()))

    def renormalized(self) -> "FockDistribution":
        """Explicitly rescale the vector to unit mass."""
        total = float(self.probs.sum())
        if total <= 0:
            raise ValueError("cannot renormalize a zero distribution")
        return FockDistribution(self.probs / total)


def default_truncation(max_mean_photon: float) -> int:
    """Truncation cutoff that keeps the Poisson tail below ~1e-9.

    N = ceil(mu + 15*sqrt(mu) + 15) for the largest probe mean mu.
    """
    if max_mean_photon < 0:
        raise ValueError("max_mean_photon must be >= 0")
    return math.ceil(max_mean_photon + 15.0 * math.sqrt(max_mean_photon) + 15.0)


def coherent_fock_distribution(
    amp: CoherentAmplitude, truncation: int, renormalize: bool = False
) -> FockDistribution:
    """Poisson photon-number distribution of a coherent state.

    probs[n] = exp(-mu) mu^n / n! for n = 0..truncation, mu = |alpha|^2,
    evaluated in log-space. Set ``renormalize=True`` to rescale the
    truncated vector to unit mass (off by default; see FockDistribution).
    """
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    mu = amp.mean_photon
    n = np.arange(truncation + 1)
    if mu == 0:
        probs = np.zeros(truncation + 1)
        probs[0] = 1.0
    else:
        log_probs = -mu + n * math.log(mu) - gammaln(n + 1)
        probs = np.exp(log_probs)
    dist = FockDistribution(probs)
    return dist.renormalized() if renormalize else dist


def attenuate(amp: CoherentAmplitude, transmission: float) -> CoherentAmplitude:
    """Attenuate a coherent state; the result is again coherent.

    The mean photon number scales by the intensity transmission; the phase
    is unchanged.
    """
    if not 0 <= transmission <= 1:
        raise ValueError(f"transmission must lie in [0, 1], got {transmission}")
    return CoherentAmplitude(transmission * amp.mean_photon, amp.phase)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) via log-gamma; accurate to ~1e-10 relative for n <= 500."""
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"require 0 <= k <= n, got n={n}, k={k}")
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
