"""Reproducibility bounds for noisy single-qubit test circuits.

Decide whether a device reproduces the uniform-superposition circuit within
a Hellinger-distance tolerance: model the noise, sample the protocol,
estimate the parameters, and test the composite bias gamma_D against the
closed-form ceiling gamma_max(n, delta).
"""

from ._version import __version__
from .bounds import (
    LemmaA1Report,
    ReproVerdict,
    SamplePlan,
    delta_star,
    exact_hellinger_1q,
    gamma_device,
    gamma_max,
    lemma_a1_check,
    min_delta,
    normal_quantile,
    plan_samples,
    verdict,
)
from .distance import (
    Distribution,
    GammaVector,
    bc_uniform_closed_form,
    bhattacharyya,
    empirical_distribution,
    hellinger,
    product_noisy,
    uniform_ideal,
)
from .estimator import (
    CharacterizationEstimate,
    characterize,
    characterize_qubit,
    estimate_f0,
    estimate_f1,
    estimate_pr,
    hellinger_single,
    invert_theta,
    population_stats,
)
from .noise_model import (
    DerivedReadout,
    QubitNoiseParams,
    ReadoutMatrix,
    SingleQubitState,
    control_error_operator,
    gamma_of,
    kraus_readout,
    noisy_hadamard,
    observed_probs,
    pre_readout_probs,
    readout_matrix,
)
from .sampler import (
    CircuitKind,
    ExperimentPlan,
    PlanQubit,
    RunArchive,
    ShotBlock,
    block_stream,
    load_archive,
    run_circuit_c,
    run_plan,
    run_spam0,
    run_spam1,
    save_archive,
)

__all__ = [
    "__version__",
    "CharacterizationEstimate",
    "CircuitKind",
    "DerivedReadout",
    "Distribution",
    "ExperimentPlan",
    "GammaVector",
    "LemmaA1Report",
    "PlanQubit",
    "QubitNoiseParams",
    "ReadoutMatrix",
    "ReproVerdict",
    "RunArchive",
    "SamplePlan",
    "ShotBlock",
    "SingleQubitState",
    "bc_uniform_closed_form",
    "bhattacharyya",
    "block_stream",
    "characterize",
    "characterize_qubit",
    "control_error_operator",
    "delta_star",
    "empirical_distribution",
    "estimate_f0",
    "estimate_f1",
    "estimate_pr",
    "exact_hellinger_1q",
    "gamma_device",
    "gamma_max",
    "gamma_of",
    "hellinger",
    "hellinger_single",
    "invert_theta",
    "kraus_readout",
    "lemma_a1_check",
    "load_archive",
    "min_delta",
    "noisy_hadamard",
    "normal_quantile",
    "observed_probs",
    "plan_samples",
    "population_stats",
    "pre_readout_probs",
    "product_noisy",
    "readout_matrix",
    "run_circuit_c",
    "run_plan",
    "run_spam0",
    "run_spam1",
    "save_archive",
    "uniform_ideal",
    "verdict",
]
