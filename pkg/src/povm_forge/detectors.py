"""Forward models of the two photon counters.

The avalanche photodiode (APD) is a binary click/no-click detector with a
two-element diagonal POVM. The time-multiplexing detector (TMD) splits a
pulse over B bins, each read out by an APD, and reports the total click
count; its POVM diagonals are the rows of the product C.L of a bin
convolution matrix and a beam-splitter loss matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .fock import FockDistribution, _frozen_array, log_binomial

#: Identifier of the shipped 8-bin TMD convolution matrix, measured with
#: classical light (entries rounded to 3 decimals at the source).
PAPER_TMD_8BIN = "paper-tmd-8bin"

# Rows are click counts k = 0..8, columns photon numbers n = 0..8. The
# n = 6 column sums to 1.001 -- a rounding artifact of the published
# 3-decimal entries, hence the loose 0.005 stochasticity tolerance used
# wherever this raw matrix is checked.
_PAPER_TMD_8BIN_RAW = np.array([
    [1, 0, 0,     0,     0,     0,     0,     0,     0],
    [0, 1, 0.128, 0.017, 0.000, 0.000, 0.000, 0.000, 0.000],
    [0, 0, 0.872, 0.334, 0.101, 0.028, 0.008, 0.002, 0.001],
    [0, 0, 0,     0.649, 0.496, 0.265, 0.123, 0.053, 0.022],
    [0, 0, 0,     0,     0.402, 0.509, 0.422, 0.290, 0.181],
    [0, 0, 0,     0,     0,     0.198, 0.375, 0.444, 0.423],
    [0, 0, 0,     0,     0,     0,     0.073, 0.193, 0.308],
    [0, 0, 0,     0,     0,     0,     0,     0.018, 0.063],
    [0, 0, 0,     0,     0,     0,     0,     0,     0.002],
])


@dataclass(frozen=True)
class LossMatrix:
    """Binomial beam-splitter loss map on photon-number statistics.

    entries[n_out][n_in] is the probability that n_out of n_in photons
    survive when each is lost independently with probability
    ``loss_fraction``. Columns are stochastic; the matrix is upper-left
    triangular (no photon gain).
    """

    entries: np.ndarray
    loss_fraction: float

    def __post_init__(self):
        entries = _frozen_array(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("loss matrix must be square")
        if not 0 <= self.loss_fraction <= 1:
            raise ValueError(f"loss_fraction must lie in [0, 1], got {self.loss_fraction}")
        if np.any(entries < -1e-15) or np.any(entries > 1 + 1e-12):
            raise ValueError("loss matrix entries must lie in [0, 1]")
        if np.any(np.abs(entries.sum(axis=0) - 1) > 1e-12):
            raise ValueError("loss matrix columns must sum to 1")
        if np.any(np.tril(entries, k=-1) != 0):
            raise ValueError("loss matrix must vanish for n_out > n_in")
        object.__setattr__(self, "entries", entries)

    @property
    def truncation(self) -> int:
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class ConvolutionMatrix:
    """Click-count statistics of n photons scattered over B bins.

    entries[k][n] is the probability that n photons, each independently
    landing in bin b with probability bin_probs[b], occupy exactly k
    distinct bins. Shape is (B+1) x (N+1); columns are stochastic and
    entries vanish for k > min(n, B).
    """

    entries: np.ndarray
    bin_probs: np.ndarray

    def __post_init__(self):
        entries = _frozen_array(self.entries)
        bin_probs = _frozen_array(self.bin_probs)
        _validate_bin_probs(bin_probs)
        if entries.ndim != 2 or entries.shape[0] != bin_probs.size + 1:
            raise ValueError("entries must have B + 1 rows")
        if np.any(entries < -1e-15) or np.any(entries > 1 + 1e-12):
            raise ValueError("convolution entries must lie in [0, 1]")
        if np.any(np.abs(entries.sum(axis=0) - 1) > 1e-10):
            raise ValueError("convolution columns must sum to 1")
        for n in range(entries.shape[1]):
            if np.any(entries[min(n, self.bins) + 1:, n] != 0):
                raise ValueError("entries must vanish for k > min(n, B)")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "bin_probs", bin_probs)

    @property
    def bins(self) -> int:
        return self.bin_probs.size

    @property
    def max_photons(self) -> int:
        return self.entries.shape[1] - 1


@dataclass(frozen=True)
class PovmElement:
    """Diagonal of one POVM element in the photon-number basis."""

    diag: np.ndarray
    outcome_label: int

    def __post_init__(self):
        diag = _frozen_array(self.diag)
        if diag.ndim != 1 or diag.size == 0:
            raise ValueError("diag must be a nonempty 1-d vector")
        if np.any(diag < -1e-12) or np.any(diag > 1 + 1e-12):
            raise ValueError("POVM element diagonal must lie in [0, 1]")
        object.__setattr__(self, "diag", diag)

    @property
    def truncation(self) -> int:
        return self.diag.size - 1


@dataclass(frozen=True)
class PovmSet:
    """An ordered complete set of diagonal POVM elements.

    Completeness means the element diagonals sum to the all-ones vector:
    for every photon number the outcome probabilities add up to one.
    """

    elements: tuple = field()

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise ValueError("a POVM set needs at least one element")
        sizes = {e.diag.size for e in elements}
        if len(sizes) != 1:
            raise ValueError("all elements must share one truncation")
        total = np.sum([e.diag for e in elements], axis=0)
        if np.any(np.abs(total - 1) > 1e-10):
            raise ValueError("element diagonals must sum to 1 for every photon number")
        object.__setattr__(self, "elements", elements)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    @property
    def truncation(self) -> int:
        return self.elements[0].truncation

    def as_matrix(self) -> np.ndarray:
        """Stack the diagonals into an (outcomes x photon-number) array."""
        return np.array([e.diag for e in self.elements])


def _validate_bin_probs(bin_probs: np.ndarray) -> None:
    if bin_probs.ndim != 1 or bin_probs.size == 0:
        raise ValueError("bin_probs must be a nonempty 1-d vector")
    if np.any(bin_probs < 0):
        raise ValueError("bin probabilities must be nonnegative")
    if abs(float(bin_probs.sum()) - 1) > 1e-9:
        raise ValueError(f"bin probabilities must sum to 1, got {bin_probs.sum()}")


def apd_povm(efficiency: float, truncation: int) -> PovmSet:
    """Two-outcome POVM of an avalanche photodiode.

    no-click diag[n] = (1 - eta)^n and click diag[n] = 1 - (1 - eta)^n,
    with eta the per-photon detection efficiency.
    """
    if not 0 <= efficiency <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {efficiency}")
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    n = np.arange(truncation + 1)
    no_click = (1.0 - efficiency) ** n
    return PovmSet((
        PovmElement(no_click, outcome_label=0),
        PovmElement(1.0 - no_click, outcome_label=1),
    ))


def loss_matrix(loss_fraction: float, truncation: int) -> LossMatrix:
    """Build the binomial loss matrix for a given loss fraction.

    entries[n_out][n_in] = C(n_in, n_out) (1-eta)^n_out eta^(n_in-n_out),
    i.e. each photon survives with probability 1 - loss_fraction.
    """
    if not 0 <= loss_fraction <= 1:
        raise ValueError(f"loss_fraction must lie in [0, 1], got {loss_fraction}")
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    size = truncation + 1
    entries = np.zeros((size, size))
    survive = 1.0 - loss_fraction
    for n in range(size):
        for n_out in range(n + 1):
            entries[n_out, n] = (
                math.exp(log_binomial(n, n_out))
                * survive ** n_out
                * loss_fraction ** (n - n_out)
            )
        # squash the log-space rounding so columns are exactly stochastic
        entries[: n + 1, n] /= entries[: n + 1, n].sum()
    return LossMatrix(entries, loss_fraction)


def convolution_matrix(bin_probs, max_photons: int) -> ConvolutionMatrix:
    """Occupied-bin count distribution via a dynamic program over bins.

    The DP state after processing bins 1..b is h[m][k], the probability
    that those bins hold m photons occupying k of them, with the photon
    total fixed at n afterwards by binomial splitting: appending bin b
    contributes C(m, j) p_b^j photons j at a time. This is O(B n^2 k) and
    agrees with the literal route-counting sum (see
    convolution_closed_form) and with exhaustive enumeration.
    """
    bin_probs = np.asarray(bin_probs, dtype=float)
    _validate_bin_probs(bin_probs)
    if max_photons < 0:
        raise ValueError("max_photons must be >= 0")
    n_bins = bin_probs.size
    n_max = max_photons
    # h[m, k]: sum over assignments of m labeled photons to the processed
    # bins with k occupied, of the assignment probabilities.
    h = np.zeros((n_max + 1, n_bins + 1))
    h[0, 0] = 1.0
    binom = np.zeros((n_max + 1, n_max + 1))
    for m in range(n_max + 1):
        for j in range(m + 1):
            binom[m, j] = math.exp(log_binomial(m, j))
    for p in bin_probs:
        new = np.zeros_like(h)
        new[:, :] = h  # j = 0: bin stays empty
        pw = np.array([p ** j for j in range(n_max + 1)])
        for m in range(1, n_max + 1):
            for j in range(1, m + 1):
                contrib = binom[m, j] * pw[j] * h[m - j, :-1]
                new[m, 1:] += contrib
        h = new
    entries = h.T  # rows k = 0..B, columns n = 0..N
    # clean tiny negatives and renormalize away accumulated rounding
    entries = np.clip(entries, 0.0, None)
    entries /= entries.sum(axis=0, keepdims=True)
    return ConvolutionMatrix(entries, bin_probs)


def convolution_bruteforce(bin_probs, photons: int) -> np.ndarray:
    """Exact click-count distribution by enumerating all B^n assignments.

    Kept deliberately independent of convolution_matrix as a test oracle;
    refuses more than 8 photons because the enumeration is exponential.
    """
    bin_probs = np.asarray(bin_probs, dtype=float)
    _validate_bin_probs(bin_probs)
    if photons < 0:
        raise ValueError("photons must be >= 0")
    if photons > 8:
        raise ValueError(f"refusing brute-force enumeration for {photons} > 8 photons")
    n_bins = bin_probs.size
    result = np.zeros(n_bins + 1)
    for assignment in itertools.product(range(n_bins), repeat=photons):
        weight = 1.0
        for b in assignment:
            weight *= bin_probs[b]
        result[len(set(assignment))] += weight
    return result


def _partitions_into_k_parts(n: int, k: int):
    """Non-increasing tuples of k positive integers summing to n."""

    def rec(remaining, parts_left, cap):
        if parts_left == 0:
            if remaining == 0:
                yield ()
            return
        lo = math.ceil(remaining / parts_left)
        for first in range(min(cap, remaining - parts_left + 1), lo - 1, -1):
            for rest in rec(remaining - first, parts_left - 1, first):
                yield (first,) + rest

    yield from rec(n, k, n)


def _equal_run_permutations(parts) -> float:
    """Product of factorials of the multiplicities of equal parts."""
    out = 1.0
    for _, group in itertools.groupby(parts):
        out *= math.factorial(len(list(group)))
    return out


def convolution_closed_form(bin_probs, photons: int) -> np.ndarray:
    """Literal route-counting evaluation of the click-count distribution.

    Sums over ordered tuples of distinct bins and partitions of the photon
    number into occupied-bin occupancies, dividing by the permutations of
    equally occupied bins. Exponential in the bin count; used as a second
    oracle against the dynamic program.
    """
    bin_probs = np.asarray(bin_probs, dtype=float)
    _validate_bin_probs(bin_probs)
    if photons < 0:
        raise ValueError("photons must be >= 0")
    n_bins = bin_probs.size
    result = np.zeros(n_bins + 1)
    if photons == 0:
        result[0] = 1.0
        return result
    for k in range(1, min(photons, n_bins) + 1):
        total = 0.0
        for bins in itertools.permutations(range(n_bins), k):
            for parts in _partitions_into_k_parts(photons, k):
                coeff = 1.0
                remaining = photons
                for c in parts:
                    coeff *= math.comb(remaining, c)
                    remaining -= c
                coeff /= _equal_run_permutations(parts)
                for b, c in zip(bins, parts):
                    coeff *= bin_probs[b] ** c
                total += coeff
        result[k] = total
    return result


def builtin_convolution_raw(name: str = PAPER_TMD_8BIN) -> np.ndarray:
    """Verbatim copy of a shipped measured convolution matrix.

    The entries are exactly as published (3 decimals); columns are only
    stochastic to within 0.005, so this raw form is not a
    ConvolutionMatrix. Use builtin_convolution_matrix for a usable model.
    """
    if name != PAPER_TMD_8BIN:
        raise ValueError(f"unknown built-in dataset {name!r}")
    return _PAPER_TMD_8BIN_RAW.copy()


def builtin_convolution_matrix(
    name: str = PAPER_TMD_8BIN, max_photons: int = 8
) -> ConvolutionMatrix:
    """Shipped 8-bin convolution matrix, column-normalized and extendable.

    Columns n <= 8 come from the measured dataset with each column
    rescaled to exact unit sum (the raw entries are rounded to 3
    decimals). The measured single-photon bin probabilities were never
    published, so columns beyond n = 8 are generated from the equal-bin
    model (p_b = 1/8), which matches the measured n = 2 column to ~0.003.
    """
    raw = builtin_convolution_raw(name)
    n_bins = raw.shape[0] - 1
    if max_photons < 0:
        raise ValueError("max_photons must be >= 0")
    entries = np.zeros((n_bins + 1, max_photons + 1))
    measured_cols = min(max_photons, raw.shape[1] - 1)
    entries[:, : measured_cols + 1] = raw[:, : measured_cols + 1]
    entries[:, : measured_cols + 1] /= entries[:, : measured_cols + 1].sum(
        axis=0, keepdims=True
    )
    if max_photons > measured_cols:
        uniform = np.full(n_bins, 1.0 / n_bins)
        model = convolution_matrix(uniform, max_photons)
        entries[:, measured_cols + 1:] = model.entries[:, measured_cols + 1:]
    return ConvolutionMatrix(entries, np.full(n_bins, 1.0 / n_bins))


def tmd_povm(conv: ConvolutionMatrix, loss: LossMatrix) -> PovmSet:
    """Assemble the TMD POVM diagonals as the rows of C.L."""
    if conv.max_photons != loss.truncation:
        raise ValueError(
            f"convolution matrix covers n <= {conv.max_photons} but loss matrix "
            f"covers n <= {loss.truncation}"
        )
    product = conv.entries @ loss.entries
    product = np.clip(product, 0.0, 1.0)
    return PovmSet(tuple(
        PovmElement(product[k], outcome_label=k) for k in range(product.shape[0])
    ))


def outcome_probabilities(povm: PovmSet, state: FockDistribution) -> np.ndarray:
    """Outcome probabilities p_j = sum_n diag_j[n] sigma_n.

    The entries sum to 1 minus the POVM-weighted tail deficit of the
    truncated state; for a unit-mass state the deficit (1 - sum of the
    returned vector) is zero because the POVM is complete.
    """
    if povm.truncation != state.truncation:
        raise ValueError(
            f"POVM truncation {povm.truncation} != state truncation {state.truncation}"
        )
    return povm.as_matrix() @ state.probs
