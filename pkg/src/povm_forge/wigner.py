"""Phase-space (Wigner) representation of diagonal Fock-space operators.

For a diagonal operator with weights w_n the Wigner function is the
weighted sum of Fock-state Wigner functions

    W(x, p) = sum_n w_n ((-1)^n / (pi hbar)) exp(-r^2/hbar) L_n(2 r^2/hbar)

with r^2 = x^2 + p^2 and L_n the degree-n Laguerre polynomial, evaluated
through the stable three-term upward recurrence. With this convention the
double integral of W equals the operator trace, and outcome probabilities
are the 2*pi*hbar weighted overlap of state and detector fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detectors import PovmElement
from .fock import FockDistribution, _frozen_array


@dataclass(frozen=True)
class WignerGrid:
    """A rectangular quadrature-space sampling grid."""

    x_min: float = -6.0
    x_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    points_per_axis: int = 301
    hbar: float = 1.0

    def __post_init__(self):
        if self.x_min >= self.x_max or self.p_min >= self.p_max:
            raise ValueError("grid bounds must be ordered")
        if self.points_per_axis < 2:
            raise ValueError("need at least 2 points per axis")
        if self.hbar <= 0:
            raise ValueError("hbar must be > 0")

    def x_axis(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points_per_axis)

    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.points_per_axis)

    def mesh(self):
        return np.meshgrid(self.x_axis(), self.p_axis(), indexing="ij")


@dataclass(frozen=True)
class WignerField:
    """Sampled W(x, p) values for one operator; values[i, j] = W(x_i, p_j)."""

    grid: WignerGrid
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = _frozen_array(self.values)
        expected = (self.grid.points_per_axis, self.grid.points_per_axis)
        if values.shape != expected:
            raise ValueError(f"values must have shape {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("Wigner values must be finite")
        object.__setattr__(self, "values", values)

    def volume(self) -> float:
        """Trapezoid-rule integral of W over the grid (equals the trace for
        a well-contained operator)."""
        inner = np.trapezoid(self.values, self.grid.p_axis(), axis=1)
        return float(np.trapezoid(inner, self.grid.x_axis()))


def _laguerre_sum(weights: np.ndarray, z: np.ndarray) -> np.ndarray:
    """sum_n weights[n] (-1)^n L_n(z), via the upward recurrence

    (k+1) L_{k+1}(z) = (2k + 1 - z) L_k(z) - k L_{k-1}(z).
    """
    total = np.zeros_like(z)
    prev = np.ones_like(z)  # L_0
    total += weights[0] * prev
    if weights.size == 1:
        return total
    curr = 1.0 - z  # L_1
    total -= weights[1] * curr
    sign = 1.0
    for k in range(1, weights.size - 1):
        prev, curr = curr, ((2 * k + 1 - z) * curr - k * prev) / (k + 1)
        total += sign * weights[k + 1] * curr
        sign = -sign
    return total


def diagonal_wigner(weights, grid: WignerGrid, label: str = "") -> WignerField:
    """Wigner field of the diagonal operator sum_n weights[n] |n><n|."""
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("weights must be a nonempty vector")
    x, p = grid.mesh()
    r2 = x * x + p * p
    envelope = np.exp(-r2 / grid.hbar) / (np.pi * grid.hbar)
    values = envelope * _laguerre_sum(weights, 2.0 * r2 / grid.hbar)
    return WignerField(grid, values, label)


def fock_wigner(n: int, x, p, hbar: float = 1.0):
    """Wigner function of the Fock state |n><n| at quadrature point(s) (x, p)."""
    if n < 0:
        raise ValueError("photon number must be >= 0")
    if hbar <= 0:
        raise ValueError("hbar must be > 0")
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = x * x + p * p
    weights = np.zeros(n + 1)
    weights[n] = 1.0
    envelope = np.exp(-r2 / hbar) / (np.pi * hbar)
    out = envelope * _laguerre_sum(weights, 2.0 * r2 / hbar)
    return float(out) if out.ndim == 0 else out


def povm_wigner(element: PovmElement, grid: WignerGrid) -> WignerField:
    """Wigner field of one diagonal POVM element (generally unnormalized)."""
    return diagonal_wigner(element.diag, grid, label=f"outcome-{element.outcome_label}")


def state_wigner(state: FockDistribution, grid: WignerGrid, label: str = "state") -> WignerField:
    """Wigner field of a phase-averaged state with the given number statistics."""
    return diagonal_wigner(state.probs, grid, label)


def wigner_overlap(state_field: WignerField, detector_field: WignerField) -> float:
    """Outcome probability as the 2*pi*hbar weighted overlap integral."""
    if state_field.grid != detector_field.grid:
        raise ValueError("fields must share one grid")
    grid = state_field.grid
    product = state_field.values * detector_field.values
    inner = np.trapezoid(product, grid.p_axis(), axis=1)
    integral = float(np.trapezoid(inner, grid.x_axis()))
    return 2.0 * np.pi * grid.hbar * integral


def radial_profile(weights, r_max: float, samples: int, hbar: float = 1.0):
    """(r, W(r, 0)) along the positive x axis for a diagonal operator."""
    if r_max <= 0:
        raise ValueError("r_max must be > 0")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    weights = np.asarray(weights, dtype=float)
    r = np.linspace(0.0, r_max, samples)
    r2 = r * r
    envelope = np.exp(-r2 / hbar) / (np.pi * hbar)
    values = envelope * _laguerre_sum(weights, 2.0 * r2 / hbar)
    return r, values


def radial_nodes(
    element: PovmElement, r_max: float, samples: int, hbar: float = 1.0
) -> int:
    """Count sign changes of W along the radius r in (0, r_max].

    A change is counted only when both flanking samples exceed
    1e-9 * max|W| in magnitude, suppressing spurious crossings from
    floating-point noise near true zeros.
    """
    if samples < 100:
        raise ValueError("need at least 100 radial samples")
    _, values = radial_profile(element.diag, r_max, samples, hbar)
    floor = 1e-9 * float(np.max(np.abs(values)))
    if floor == 0:
        return 0
    significant = values[np.abs(values) > floor]
    return int(np.sum(np.sign(significant[1:]) != np.sign(significant[:-1])))
