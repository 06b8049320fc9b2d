"""Forward experiment simulation: exact per-probe outcome probabilities,
seeded finite-shot multinomial sampling, and response curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calibration import ProbeSet
from .detectors import PovmSet, outcome_probabilities
from .fock import CoherentAmplitude, _frozen_array, coherent_fock_distribution


@dataclass(frozen=True)
class TomographyDataset:
    """Per-probe relative outcome frequencies.

    shots_per_probe = 0 marks exact probabilities; the seed is recorded so
    sampled datasets are reproducible.
    """

    probes: ProbeSet
    frequencies: np.ndarray
    shots_per_probe: int = 0
    seed: int = 0

    def __post_init__(self):
        freqs = _frozen_array(self.frequencies)
        if freqs.ndim != 2 or freqs.shape[0] != len(self.probes):
            raise ValueError("frequencies must be a (probe x outcome) matrix")
        if np.any(freqs < 0):
            raise ValueError("frequencies must be nonnegative")
        if np.any(np.abs(freqs.sum(axis=1) - 1) > 1e-12):
            raise ValueError("each frequency row must sum to 1")
        if self.shots_per_probe < 0:
            raise ValueError("shots_per_probe must be >= 0")
        object.__setattr__(self, "frequencies", freqs)

    @property
    def n_outcomes(self) -> int:
        return self.frequencies.shape[1]


@dataclass(frozen=True)
class ResponseCurve:
    """Probability of one outcome against the probe mean photon number."""

    mean_photons: np.ndarray
    probability: np.ndarray
    outcome_label: int

    def __post_init__(self):
        means = _frozen_array(self.mean_photons)
        probs = _frozen_array(self.probability)
        if means.shape != probs.shape or means.ndim != 1:
            raise ValueError("mean_photons and probability must be matching vectors")
        if np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "mean_photons", means)
        object.__setattr__(self, "probability", probs)


def _probe_distributions(detector: PovmSet, probes: ProbeSet, max_tail_mass, renormalize):
    truncation = detector.truncation
    dists = []
    for i, probe in enumerate(probes.probes):
        dist = coherent_fock_distribution(probe.amplitude, truncation, renormalize)
        if dist.tail_mass > max_tail_mass:
            raise ValueError(
                f"probe {i} (mean photon {probe.mean_photon:g}) loses "
                f"{dist.tail_mass:.3g} probability mass at truncation "
                f"{truncation}; increase the detector truncation"
            )
        dists.append(dist)
    return dists


def exact_dataset(
    detector: PovmSet,
    probes: ProbeSet,
    max_tail_mass: float = 1e-6,
    renormalize: bool = False,
) -> TomographyDataset:
    """Exact outcome probabilities for every probe (no sampling noise).

    Refuses probes whose Poisson tail above the detector truncation
    exceeds ``max_tail_mass``, naming the offender. ``renormalize``
    rescales each truncated probe distribution to unit mass, which makes
    the rows sum to exactly 1 even at tight truncations.
    """
    dists = _probe_distributions(detector, probes, max_tail_mass, renormalize)
    rows = np.array([outcome_probabilities(detector, d) for d in dists])
    # completeness makes each row sum to the probe mass; scrub the float dust
    rows = rows / rows.sum(axis=1, keepdims=True)
    return TomographyDataset(probes, rows, shots_per_probe=0, seed=0)


def _multinomial_counts(rng: np.random.Generator, shots: int, probs: np.ndarray):
    """One multinomial draw via sequential conditional binomials."""
    counts = np.zeros(probs.size, dtype=np.int64)
    remaining_shots = shots
    remaining_mass = 1.0
    for j in range(probs.size - 1):
        if remaining_shots == 0:
            break
        p = probs[j] / remaining_mass if remaining_mass > 0 else 1.0
        counts[j] = rng.binomial(remaining_shots, min(1.0, max(0.0, p)))
        remaining_shots -= counts[j]
        remaining_mass -= probs[j]
    counts[-1] += remaining_shots
    return counts


def sample_dataset(
    detector: PovmSet,
    probes: ProbeSet,
    shots: int,
    seed: int,
    max_tail_mass: float = 1e-6,
    renormalize: bool = False,
) -> TomographyDataset:
    """Finite-statistics dataset: one multinomial of size ``shots`` per probe.

    Each probe draws from its own substream derived from (seed, probe
    index), so the result is identical whether probes are processed
    serially or in parallel.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    exact = exact_dataset(detector, probes, max_tail_mass, renormalize)
    rows = np.empty_like(exact.frequencies)
    for i in range(len(probes)):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,))
        )
        counts = _multinomial_counts(rng, shots, exact.frequencies[i])
        rows[i] = counts / shots
    return TomographyDataset(probes, rows, shots_per_probe=shots, seed=seed)


def response_curve(
    detector: PovmSet, outcome: int, mean_photon_grid
) -> ResponseCurve:
    """Exact probability of one outcome across a grid of probe strengths."""
    if not 0 <= outcome < detector.n_outcomes:
        raise ValueError(
            f"outcome {outcome} out of range for a {detector.n_outcomes}-outcome detector"
        )
    grid = np.asarray(mean_photon_grid, dtype=float)
    diag = detector.elements[outcome].diag
    probs = np.empty(grid.size)
    for i, mean in enumerate(grid):
        dist = coherent_fock_distribution(CoherentAmplitude(float(mean)), detector.truncation)
        probs[i] = float(diag @ dist.probs)
    return ResponseCurve(grid, np.clip(probs, 0.0, 1.0), outcome_label=outcome)
