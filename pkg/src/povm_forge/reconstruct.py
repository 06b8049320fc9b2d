"""Constrained least-squares inversion of the forward model.

Estimates the diagonal POVM matrix Theta (outcomes x photon numbers) from
probe frequencies P and the Poisson design matrix F by minimizing

    || P - F Theta^T ||_F^2  +  w * sum_j sum_n (Theta[j,n+1] - Theta[j,n])^2

subject to Theta >= 0 entrywise and sum_j Theta[j,n] = 1 for every n. The
feasible set is a product of simplices (one per photon-number column), so
projection is exact and cheap.

The design matrix of a coherent-probe experiment is severely
ill-conditioned at realistic truncations (cond ~ 1e14 at d = 30): its
trailing singular directions carry less signal than either float rounding
or sampling noise, and fitting them amplifies that noise without bound.
The solver therefore regularizes by spectral truncation: the design is
replaced by its best rank-k approximation, with k chosen by the
discrepancy principle (smallest rank whose truncation residual falls below
the estimated noise level, with the customary safety factor). The
truncated least-squares solution, projected onto the feasible set, seeds
an accelerated projected-gradient refinement that handles whatever
inequality constraints become active.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .calibration import ProbeSet, completeness_check
from .detectors import PovmElement, PovmSet
from .fock import _frozen_array, coherent_fock_distribution
from .simulate import TomographyDataset

MAX_ITERATIONS = 50_000
#: Converged when the relative objective decrease over this many
#: iterations falls below PLATEAU_TOL.
PLATEAU_WINDOW = 50
PLATEAU_TOL = 1e-12
#: Morozov safety factor: the discrepancy targets are this multiple of the
#: estimated noise level, so an unlucky noise realization does not force
#: extra (noise-dominated) singular modes into the fit.
DISCREPANCY_SAFETY = 1.1
#: Relative (to ||data||_F^2) residual floors. RANK_FLOOR keeps every
#: singular mode that carries a resolvable signal when the data are exact;
#: STOP_FLOOR declares convergence once the relative rms residual reaches
#: float-precision territory (1e-9), below which descent chases rounding.
RANK_FLOOR = 1e-22
STOP_FLOOR = 1e-18


@dataclass(frozen=True)
class ReconstructionProblem:
    """Design matrix, data matrix, and regularization weight."""

    design: np.ndarray  # (probes x d) Poisson probe weights
    data: np.ndarray  # (probes x outcomes) relative frequencies
    dimension: int
    outcomes: int
    smoothing_weight: float = 0.0
    #: shots behind each data row; 0 means exact probabilities. Used to
    #: estimate the sampling-noise level for the discrepancy criteria.
    shots_per_probe: int = 0

    def __post_init__(self):
        design = _frozen_array(self.design)
        data = _frozen_array(self.data)
        if design.ndim != 2 or design.shape[1] != self.dimension:
            raise ValueError("design must be (probes x dimension)")
        if data.ndim != 2 or data.shape != (design.shape[0], self.outcomes):
            raise ValueError("data must be (probes x outcomes)")
        if np.any(design < 0) or np.any(design.sum(axis=1) > 1 + 1e-9):
            raise ValueError("design rows must be nonnegative with sum <= 1")
        if np.any(np.abs(data.sum(axis=1) - 1) > 1e-9):
            raise ValueError("data rows must sum to 1")
        if self.smoothing_weight < 0:
            raise ValueError("smoothing_weight must be >= 0")
        if self.shots_per_probe < 0:
            raise ValueError("shots_per_probe must be >= 0")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class ReconstructedPovm:
    povm: PovmSet
    residual: float  # rms of P - F Theta^T over all entries
    iterations: int
    converged: bool


def build_problem(
    dataset: TomographyDataset,
    dimension: int,
    smoothing_weight: float = 0.0,
    renormalize: bool = False,
) -> ReconstructionProblem:
    """Assemble the inversion problem from a dataset.

    The design row for probe alpha is its Poisson vector truncated at
    dimension - 1 (renormalized to unit mass only if asked). Warns, but
    proceeds, when the probe set is not tomographically complete at this
    dimension or when a probe loses more than 1e-6 mass to truncation.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    probes = dataset.probes
    rows = []
    worst_tail = 0.0
    for probe in probes.probes:
        dist = coherent_fock_distribution(probe.amplitude, dimension - 1, renormalize)
        worst_tail = max(worst_tail, dist.tail_mass)
        rows.append(dist.probs)
    design = np.array(rows)
    if worst_tail > 1e-6:
        warnings.warn(
            f"largest probe loses {worst_tail:.3g} probability mass above "
            f"photon number {dimension - 1}; the truncated design is biased",
            stacklevel=2,
        )
    means = probes.mean_photons
    if np.unique(means).size < means.size:
        warnings.warn("probe set contains duplicate mean photon numbers", stacklevel=2)
    if len(probes) == dimension:
        report = completeness_check(ProbeSet(probes.probes, dimension))
        if not report.complete:
            warnings.warn(
                "probe set is not tomographically complete at this dimension",
                stacklevel=2,
            )
    return ReconstructionProblem(
        design,
        dataset.frequencies,
        dimension,
        dataset.n_outcomes,
        smoothing_weight,
        dataset.shots_per_probe,
    )


def project_columns_to_simplex(theta: np.ndarray) -> np.ndarray:
    """Euclidean projection of every column onto the probability simplex.

    Sort-based algorithm, vectorized across columns.
    """
    d_out, d_cols = theta.shape
    sorted_desc = -np.sort(-theta, axis=0)
    cumsum = np.cumsum(sorted_desc, axis=0)
    k = np.arange(1, d_out + 1)[:, None]
    candidate = (cumsum - 1.0) / k
    is_positive = sorted_desc - candidate > 0
    rho = d_out - 1 - np.argmax(is_positive[::-1], axis=0)
    tau = candidate[rho, np.arange(d_cols)]
    return np.maximum(theta - tau, 0.0)


def _objective(theta, design, data, weight):
    residual = design @ theta.T - data
    value = float(np.sum(residual * residual))
    if weight > 0:
        diff = np.diff(theta, axis=1)
        value += weight * float(np.sum(diff * diff))
    return value


def _gradient(theta, design, data, weight):
    grad = 2.0 * (design @ theta.T - data).T @ design
    if weight > 0:
        diff = np.diff(theta, axis=1)
        smooth = np.zeros_like(theta)
        smooth[:, :-1] -= diff
        smooth[:, 1:] += diff
        grad += 2.0 * weight * smooth
    return grad


def _truncated_design(design, data, noise_floor):
    """Rank-truncated design and the seed iterate.

    Chooses the smallest rank k whose truncation residual
    ||P - F_k F_k^+ P||_F^2 falls below the discrepancy target (the noise
    floor when the data are sampled, the float floor when exact), then
    returns the rank-k design together with the truncated least-squares
    solution. The residual tail is accumulated smallest-first so it stays
    accurate far below ||P||_F^2.
    """
    total = float(np.sum(data * data))
    rank_target = max(DISCREPANCY_SAFETY * noise_floor, RANK_FLOOR * total)
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    coefs = u.T @ data
    energy = np.sum(coefs * coefs, axis=1)
    outside = data - u @ coefs  # component off the design's column space
    tail = np.cumsum(energy[::-1])[::-1]  # tail[i] = energy of modes i..r-1
    residual = float(np.sum(outside * outside)) + np.append(tail[1:], 0.0)
    below = np.nonzero(residual <= rank_target)[0]
    k = int(below[0]) + 1 if below.size else s.size
    # never divide by a numerically-zero singular value
    k = min(k, max(1, int(np.sum(s > 1e-13 * s[0]))))
    design_k = (u[:, :k] * s[:k]) @ vt[:k]
    seed = (vt[:k].T @ (coefs[:k] / s[:k, None])).T
    return design_k, seed, float(s[0])


def reconstruct(
    problem: ReconstructionProblem, max_iterations: int = MAX_ITERATIONS
) -> ReconstructedPovm:
    """Solve the constrained least-squares problem.

    The rank-truncated least-squares solution (see _truncated_design),
    projected onto the feasible set, seeds an accelerated projected
    gradient loop (fixed step 1/L, restart on objective increase) run
    against the truncated design, so noise-dominated singular directions
    are never driven by the data. Convergence is declared when the
    objective reaches the discrepancy target, or when it plateaus;
    converged=False is returned (with the last iterate) only when neither
    happens within the iteration cap.
    """
    design, data, weight = problem.design, problem.data, problem.smoothing_weight
    d_out, dim = problem.outcomes, problem.dimension
    if d_out < 1 or dim < 1:
        raise ValueError("infeasible dimensions")

    if d_out == 1:
        # completeness forces the all-ones row regardless of the data
        theta = np.ones((1, dim))
        povm = PovmSet((PovmElement(np.ones(dim), 0),))
        residual = _rms_residual(theta, design, data)
        return ReconstructedPovm(povm, residual, iterations=0, converged=True)

    noise_floor = 0.0
    if problem.shots_per_probe > 0:
        variances = data * (1.0 - data) / problem.shots_per_probe
        noise_floor = float(variances.sum())
    stop_target = max(
        DISCREPANCY_SAFETY * noise_floor, STOP_FLOOR * float(np.sum(data * data))
    )

    design_k, seed, sigma_max = _truncated_design(design, data, noise_floor)
    theta = project_columns_to_simplex(seed)
    uniform = np.full((d_out, dim), 1.0 / d_out)
    if _objective(uniform, design_k, data, weight) < _objective(
        theta, design_k, data, weight
    ):
        theta = uniform  # the seed lost too much to the projection

    # Lipschitz constant of the gradient: 2 (||F_k||_2^2 + 4 w)
    step = 1.0 / (2.0 * (sigma_max**2 + 4.0 * weight) + 1e-30)
    momentum = theta.copy()
    t_accel = 1.0
    prev_value = _objective(theta, design_k, data, weight)
    history = [prev_value]
    converged = prev_value <= stop_target
    iterations = 0

    while not converged and iterations < max_iterations:
        iterations += 1
        grad = _gradient(momentum, design_k, data, weight)
        theta_next = project_columns_to_simplex(momentum - step * grad)
        value = _objective(theta_next, design_k, data, weight)
        if value > prev_value:
            # restart the momentum sequence from the last good iterate
            t_accel = 1.0
            momentum = theta.copy()
            grad = _gradient(momentum, design_k, data, weight)
            theta_next = project_columns_to_simplex(momentum - step * grad)
            value = _objective(theta_next, design_k, data, weight)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_accel * t_accel))
        momentum = theta_next + ((t_accel - 1.0) / t_next) * (theta_next - theta)
        theta = theta_next
        t_accel = t_next
        prev_value = value
        history.append(value)
        if value <= stop_target:
            converged = True
        elif len(history) > PLATEAU_WINDOW:
            drop = history[-PLATEAU_WINDOW - 1] - value
            if (
                drop <= PLATEAU_TOL * max(history[-PLATEAU_WINDOW - 1], 1e-30)
                or drop <= 1e-6 * stop_target
            ):
                converged = True

    povm = PovmSet(tuple(
        PovmElement(np.clip(theta[j], 0.0, 1.0), outcome_label=j) for j in range(d_out)
    ))
    return ReconstructedPovm(
        povm, _rms_residual(theta, design, data), iterations, converged
    )


def _rms_residual(theta, design, data):
    residual = design @ theta.T - data
    return float(np.sqrt(np.mean(residual * residual)))


def povm_distance(a: PovmSet, b: PovmSet) -> tuple[float, float]:
    """(max_abs, worst_case_probability_gap) between two POVM sets.

    max_abs is the largest entrywise diagonal difference. The worst-case
    probability gap is max_j max_sigma |p_j(sigma) - p'_j(sigma)| over all
    valid photon-number distributions sigma; since p_j is linear in sigma
    the maximum is attained at a vertex sigma = |n><n|, so the gap equals
    max_j max_n |diag_j[n] - diag'_j[n]| as well. Both numbers are
    reported for interface stability should the gap metric ever tighten.
    """
    if a.n_outcomes != b.n_outcomes or a.truncation != b.truncation:
        raise ValueError("POVM sets must share outcome count and truncation")
    diff = np.abs(a.as_matrix() - b.as_matrix())
    max_abs = float(diff.max())
    gap = float(diff.max(axis=1).max())
    return max_abs, gap
