"""Calibrated coherent probes: optical power <-> mean photon number, probe
set construction, and the determinant test for tomographic completeness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import CoherentAmplitude, coherent_fock_distribution

#: CODATA values.
PLANCK = 6.62607015e-34  # J s
LIGHT_SPEED = 299792458.0  # m / s

#: Default probe grid used throughout: 400 probes evenly spaced on
#: mean photon number in [0, 40].
DEFAULT_PROBE_COUNT = 400
DEFAULT_MAX_MEAN_PHOTON = 40.0


def power_to_mean_photon(power: float, wavelength: float, rep_rate: float) -> float:
    """Mean photon number per pulse from time-averaged power.

    |alpha|^2 = P lambda / (h c f).
    """
    if power < 0:
        raise ValueError("power must be >= 0")
    if wavelength <= 0 or rep_rate <= 0:
        raise ValueError("wavelength and rep_rate must be > 0")
    return power * wavelength / (PLANCK * LIGHT_SPEED * rep_rate)


def mean_photon_to_power(mean_photon: float, wavelength: float, rep_rate: float) -> float:
    """Time-averaged power of a pulsed coherent source: P = <n> h c f / lambda."""
    if mean_photon < 0:
        raise ValueError("mean_photon must be >= 0")
    if wavelength <= 0 or rep_rate <= 0:
        raise ValueError("wavelength and rep_rate must be > 0")
    return mean_photon * PLANCK * LIGHT_SPEED * rep_rate / wavelength


@dataclass(frozen=True)
class CoherentProbe:
    """One calibrated probe pulse.

    The power and mean-photon parameterizations are redundant and must
    agree; use from_mean_photon / from_power to construct consistently.
    """

    amplitude: CoherentAmplitude
    wavelength: float
    rep_rate: float
    avg_power: float

    def __post_init__(self):
        if self.wavelength <= 0 or self.rep_rate <= 0:
            raise ValueError("wavelength and rep_rate must be > 0")
        if self.avg_power < 0:
            raise ValueError("avg_power must be >= 0")
        expected = mean_photon_to_power(
            self.amplitude.mean_photon, self.wavelength, self.rep_rate
        )
        scale = max(abs(expected), abs(self.avg_power), 1e-300)
        if abs(expected - self.avg_power) > 1e-9 * scale:
            raise ValueError(
                f"avg_power {self.avg_power} inconsistent with mean photon "
                f"number {self.amplitude.mean_photon} (expected {expected})"
            )

    @classmethod
    def from_mean_photon(
        cls, mean_photon: float, wavelength: float, rep_rate: float, phase: float = 0.0
    ) -> "CoherentProbe":
        power = mean_photon_to_power(mean_photon, wavelength, rep_rate)
        return cls(CoherentAmplitude(mean_photon, phase), wavelength, rep_rate, power)

    @classmethod
    def from_power(
        cls,
        power: float,
        wavelength: float,
        rep_rate: float,
        calibration_factor: float = 1.0,
        phase: float = 0.0,
    ) -> "CoherentProbe":
        """Build a probe from a power reading.

        ``calibration_factor`` models the pick-off beamsplitter monitor: the
        reading is multiplied by it before conversion, so a relative
        systematic error epsilon corresponds to a factor 1 + epsilon.
        """
        if calibration_factor <= 0:
            raise ValueError("calibration_factor must be > 0")
        effective = power * calibration_factor
        mean = power_to_mean_photon(effective, wavelength, rep_rate)
        return cls(CoherentAmplitude(mean, phase), wavelength, rep_rate, effective)

    @property
    def mean_photon(self) -> float:
        return self.amplitude.mean_photon


@dataclass(frozen=True)
class ProbeSet:
    """An ordered probe ensemble sharing one laser (wavelength, rep rate).

    ``dimension`` is the Fock truncation + 1 used for completeness
    analysis.
    """

    probes: tuple = field()
    dimension: int = 0

    def __post_init__(self):
        probes = tuple(self.probes)
        if not probes:
            raise ValueError("a probe set needs at least one probe")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        wavelengths = {p.wavelength for p in probes}
        rates = {p.rep_rate for p in probes}
        if len(wavelengths) != 1 or len(rates) != 1:
            raise ValueError("all probes must share wavelength and rep_rate")
        object.__setattr__(self, "probes", probes)

    def __len__(self) -> int:
        return len(self.probes)

    @property
    def mean_photons(self) -> np.ndarray:
        return np.array([p.mean_photon for p in self.probes])

    @property
    def wavelength(self) -> float:
        return self.probes[0].wavelength

    @property
    def rep_rate(self) -> float:
        return self.probes[0].rep_rate

    def rescaled(self, factor: float) -> "ProbeSet":
        """Multiply every probe power (hence mean photon number) by ``factor``.

        Models a common systematic power-calibration error.
        """
        if factor <= 0:
            raise ValueError("factor must be > 0")
        probes = tuple(
            CoherentProbe.from_mean_photon(
                factor * p.mean_photon, p.wavelength, p.rep_rate, p.amplitude.phase
            )
            for p in self.probes
        )
        return ProbeSet(probes, self.dimension)


def linspace_probes(
    start: float,
    stop: float,
    count: int,
    dimension: int,
    wavelength: float = 800e-9,
    rep_rate: float = 1e5,
) -> ProbeSet:
    """Probe set with mean photon numbers evenly spaced on [start, stop]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    means = np.linspace(start, stop, count)
    probes = tuple(
        CoherentProbe.from_mean_photon(float(m), wavelength, rep_rate) for m in means
    )
    return ProbeSet(probes, dimension)


def constant_probes(
    mean_photon: float,
    count: int,
    dimension: int,
    wavelength: float = 800e-9,
    rep_rate: float = 1e5,
) -> ProbeSet:
    """``count`` identical probes (useful as a degenerate test case)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    probes = tuple(
        CoherentProbe.from_mean_photon(mean_photon, wavelength, rep_rate)
        for _ in range(count)
    )
    return ProbeSet(probes, dimension)


def default_probe_set(dimension: int = 30) -> ProbeSet:
    """The standard simulation grid: 400 probes on mean photon [0, 40]."""
    return linspace_probes(0.0, DEFAULT_MAX_MEAN_PHOTON, DEFAULT_PROBE_COUNT, dimension)


def completeness_matrix(probes: ProbeSet) -> np.ndarray:
    """Stacked diagonal probe matrix M[i][n] = exp(-mu_i) mu_i^n / n!.

    Row i is the truncated Poisson vector of probe i over n = 0..d-1; the
    probe count must equal the analysis dimension d so the matrix is
    square.
    """
    d = probes.dimension
    if len(probes) != d:
        raise ValueError(
            f"completeness analysis needs exactly d={d} probes, got {len(probes)}"
        )
    rows = [
        coherent_fock_distribution(p.amplitude, d - 1).probs for p in probes.probes
    ]
    return np.array(rows)


@dataclass(frozen=True)
class CompletenessReport:
    determinant: float
    condition_number: float
    complete: bool


def completeness_check(probes: ProbeSet) -> CompletenessReport:
    """Determinant test for tomographic completeness of a probe set.

    The verdict follows the determinant criterion alone; the condition
    number is reported as well because a formally complete set can still
    be numerically useless for inversion.
    """
    matrix = completeness_matrix(probes)
    determinant = float(np.linalg.det(matrix))
    condition_number = float(np.linalg.cond(matrix))
    complete = abs(determinant) > 1e-300 and math.isfinite(condition_number)
    return CompletenessReport(determinant, condition_number, complete)
