"""Entanglement-depth certification of W-type states from photon counting."""

from .states import (
    ModeWeights,
    TruncatedState,
    inner_product,
    make_biseparable,
    make_w_state,
    make_weighted_w,
    sector_populations,
)
from .bootstrap import BootstrapResult, bootstrap_pipeline, confidence_and_intervals, resample
from .data import AodConfig, AodKind, CountsDataset, CountsRecord, EventProbabilities
from .inference import (
    CalibrationTable,
    PopulationEstimate,
    fidelity_lower_bound,
    full_pipeline,
    higher_order_correction,
    photonic_populations,
    retrieval_efficiency,
    spinwave_populations,
    three_photon_alpha,
)
from .simulator import (
    ExperimentModel,
    default_plan,
    event_probabilities,
    ground_truth,
    run_campaign,
    sample_counts,
)
from .witness import (
    BisepPoint,
    DepthCertificate,
    MinResult,
    OptimizeResult,
    WitnessParams,
    certify_depth,
    f_value,
    is_feasible,
    min_f,
    optimize_params,
    stationary_iterate,
    witness_value,
)

__all__ = [
    "AodConfig",
    "AodKind",
    "BootstrapResult",
    "CalibrationTable",
    "CountsDataset",
    "CountsRecord",
    "EventProbabilities",
    "ExperimentModel",
    "PopulationEstimate",
    "bootstrap_pipeline",
    "confidence_and_intervals",
    "default_plan",
    "event_probabilities",
    "fidelity_lower_bound",
    "full_pipeline",
    "ground_truth",
    "higher_order_correction",
    "photonic_populations",
    "resample",
    "retrieval_efficiency",
    "run_campaign",
    "sample_counts",
    "spinwave_populations",
    "three_photon_alpha",
    "ModeWeights",
    "TruncatedState",
    "inner_product",
    "make_biseparable",
    "make_w_state",
    "make_weighted_w",
    "sector_populations",
    "BisepPoint",
    "DepthCertificate",
    "MinResult",
    "OptimizeResult",
    "WitnessParams",
    "certify_depth",
    "f_value",
    "is_feasible",
    "min_f",
    "optimize_params",
    "stationary_iterate",
    "witness_value",
]

__version__ = "0.1.0"
