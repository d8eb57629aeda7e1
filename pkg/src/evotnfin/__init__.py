"""Evolving Tsukamoto neuro-fuzzy classification trained by Cat Swarm Optimization."""

from .cso import CsoConfig, CsoReport, adaptive_inertia, minimize, train_tnfin_cso
from .estimator import TnfinClassifier
from .glcm import GlcmFeatureExtractor, compute_glcm, extract_features, preprocess
from .metrics import confusion, decide_class, metrics
from .network import (
    TnfinNetwork,
    decode_params,
    encode_params,
    forward,
    init_network,
    loss,
    predict,
    train_gd,
)
from .stats import kruskal_wallis, mann_whitney_u

__version__ = "0.1.0"

__all__ = [
    "CsoConfig",
    "CsoReport",
    "GlcmFeatureExtractor",
    "TnfinClassifier",
    "TnfinNetwork",
    "adaptive_inertia",
    "compute_glcm",
    "confusion",
    "decide_class",
    "decode_params",
    "encode_params",
    "extract_features",
    "forward",
    "init_network",
    "kruskal_wallis",
    "loss",
    "mann_whitney_u",
    "metrics",
    "minimize",
    "predict",
    "preprocess",
    "train_gd",
    "train_tnfin_cso",
]
