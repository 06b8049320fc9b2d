"""Simulation and reconstruction toolkit for photon-counting detector
tomography: diagonal Fock-space POVM models, calibrated coherent probes,
Monte Carlo click statistics, constrained least-squares reconstruction,
and Wigner-function visualization.
"""

from .calibration import (
    CoherentProbe,
    CompletenessReport,
    ProbeSet,
    completeness_check,
    completeness_matrix,
    default_probe_set,
    linspace_probes,
    mean_photon_to_power,
    power_to_mean_photon,
)
from .detectors import (
    PAPER_TMD_8BIN,
    ConvolutionMatrix,
    LossMatrix,
    PovmElement,
    PovmSet,
    apd_povm,
    builtin_convolution_matrix,
    builtin_convolution_raw,
    convolution_bruteforce,
    convolution_closed_form,
    convolution_matrix,
    loss_matrix,
    outcome_probabilities,
    tmd_povm,
)
from .fock import (
    CoherentAmplitude,
    FockDistribution,
    attenuate,
    coherent_fock_distribution,
    default_truncation,
    log_binomial,
)
from .reconstruct import (
    ReconstructedPovm,
    ReconstructionProblem,
    build_problem,
    povm_distance,
    reconstruct,
)
from .simulate import (
    ResponseCurve,
    TomographyDataset,
    exact_dataset,
    response_curve,
    sample_dataset,
)
from .wigner import (
    WignerField,
    WignerGrid,
    diagonal_wigner,
    fock_wigner,
    povm_wigner,
    radial_nodes,
    radial_profile,
    state_wigner,
    wigner_overlap,
)

__version__ = "0.1.0"
