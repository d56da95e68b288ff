"""Fractional wavelet scattering features with a PCA subspace classifier.

Object-level segmentation scores live in :mod:`frscat.metrics`.
"""

from .classifier import (
    EvalProtocol,
    ErrorTable,
    PcaClassModel,
    SplitError,
    classify,
    evaluate,
    train_models,
    train_pca,
)
from .features import FeatureTensor, LabeledPatch, assemble_q, extract_patches, default_order_grid
from .filterbank import FilterBank, FilterBankSpec, LPReport, build_morlet_bank, littlewood_paley
from .frwt import frac_convolve, frwt
from .grid import FractionalOrderPair, chirp
from .kernels import BACKEND
from .metrics import evaluate_masks, object_dice, object_hausdorff, rank_aggregate
from .scattering import Path, ScatteringResult, energy_report, enumerate_paths, scatter, scatter_reduce

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EvalProtocol",
    "ErrorTable",
    "FeatureTensor",
    "FilterBank",
    "FilterBankSpec",
    "FractionalOrderPair",
    "LPReport",
    "LabeledPatch",
    "Path",
    "PcaClassModel",
    "ScatteringResult",
    "SplitError",
    "assemble_q",
    "build_morlet_bank",
    "chirp",
    "classify",
    "energy_report",
    "enumerate_paths",
    "evaluate",
    "evaluate_masks",
    "extract_patches",
    "frac_convolve",
    "frwt",
    "littlewood_paley",
    "object_dice",
    "object_hausdorff",
    "default_order_grid",
    "rank_aggregate",
    "scatter",
    "scatter_reduce",
    "train_models",
    "train_pca",
]
