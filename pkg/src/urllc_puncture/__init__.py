"""Similarity-aware puncturing of eMBB traffic by URLLC traffic.

Submodules: ``constellation`` (QAM, detection, channel SER), ``similarity``
(similarity regions), ``analytic`` (closed-form SER and loss), ``scheduler``
(search and mapping), ``simulator`` (Monte Carlo), ``cli``.
"""
__version__ = "0.1.0"

from .constellation import (
    SnrPoint,
    build_constellation,
    channel_ser,
    channel_ser_awgn,
    channel_ser_rayleigh,
    decision_matrix,
    ml_detect,
)
from .similarity import EpsilonPolicy, Similarity, build_similarity_map, classify_pair, eta
from .analytic import (
    LoadProfile,
    embb_loss,
    embb_ser,
    embb_ser_high_snr,
    expected_similarity,
    reliability,
    urllc_power_loss_db,
    urllc_ser,
)
from .scheduler import PuncturingPlan, SearchSpace, apply_plan, segmented_search, select_mapper, similarity_search
from .simulator import ExperimentConfig, benchmark_search, run_experiment

__all__ = [
    "SnrPoint", "build_constellation", "channel_ser", "channel_ser_awgn", "channel_ser_rayleigh",
    "decision_matrix", "ml_detect", "EpsilonPolicy", "Similarity", "build_similarity_map", "classify_pair",
    "eta", "LoadProfile", "embb_loss", "embb_ser", "embb_ser_high_snr", "expected_similarity", "reliability",
    "urllc_power_loss_db", "urllc_ser", "PuncturingPlan", "SearchSpace", "apply_plan", "segmented_search",
    "select_mapper", "similarity_search", "ExperimentConfig", "benchmark_search", "run_experiment",
]
