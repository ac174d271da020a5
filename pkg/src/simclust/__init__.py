"""Clustering of simulation output distributions with regularized optimal transport."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .barycenter import Barycenter, BarycenterConfig, fixed_support_weights, free_support_barycenter
from .clustering import (
    Clustering, Dendrogram, DistanceMatrix, adjusted_rand_index, agglomerate,
    pairwise_distances, select_clustering, silhouette_index,
)
from .distributions import (
    CostMatrix, EmpiricalDistribution, NormalizationParams, cost_matrix, fit_normalization,
    from_samples,
)
from .errors import NumericalError, SimclustError, ValidationError
from .monitoring import (
    LabeledStateLibrary, StateScenario, Verdict, build_state_scenarios, collect_states,
    knn_classify, monitor_timeline,
)
from .simulation import (
    CallCenterConfig, ReplicationOutput, RngPolicy, Staffing, crn_distance_study,
    enumerate_budget, enumerate_fixed_total, run_scenarios, simulate_day, uniform_subset,
)
from .transport import (
    SinkhornConfig, SinkhornResult, TransportPlan, exact_wasserstein, plan_entropy, sinkhorn,
)

__all__ = [
    "BACKEND", "Barycenter", "BarycenterConfig", "CallCenterConfig", "Clustering", "CostMatrix",
    "Dendrogram", "DistanceMatrix", "EmpiricalDistribution", "LabeledStateLibrary",
    "NormalizationParams", "NumericalError", "ReplicationOutput", "RngPolicy", "SimclustError",
    "SinkhornConfig", "SinkhornResult", "Staffing", "StateScenario", "TransportPlan",
    "ValidationError", "Verdict", "adjusted_rand_index", "agglomerate", "build_state_scenarios",
    "collect_states", "cost_matrix", "crn_distance_study", "enumerate_budget",
    "enumerate_fixed_total", "exact_wasserstein", "fit_normalization", "fixed_support_weights",
    "free_support_barycenter", "from_samples", "knn_classify", "monitor_timeline",
    "pairwise_distances", "plan_entropy", "run_scenarios", "select_clustering",
    "silhouette_index", "simulate_day", "sinkhorn", "uniform_subset",
]
