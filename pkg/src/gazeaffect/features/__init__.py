from .channels import CHANNEL_KINDS, FeatureChannel, FeatureParams, build_channel
from .congruency import (
    CenterBiasModel,
    InsufficientData,
    IOVCScore,
    fit_center_bias,
    fixated_cells,
    iovc,
    normalize_locations,
    roc_auc,
)
from .density import (
    ContractViolation,
    DensityEntropy,
    DensityMap,
    EmptyFixationSet,
    FixationDensityMap,
    density_entropy,
    fixation_density_map,
)
from .summary import HISTOGRAM_SPECS, EventHistogram, MeanStd, bin_edges, histogram_rep, summary_rep

__all__ = [
    "CHANNEL_KINDS",
    "CenterBiasModel",
    "ContractViolation",
    "DensityEntropy",
    "DensityMap",
    "EmptyFixationSet",
    "EventHistogram",
    "FeatureChannel",
    "FeatureParams",
    "FixationDensityMap",
    "HISTOGRAM_SPECS",
    "IOVCScore",
    "InsufficientData",
    "MeanStd",
    "bin_edges",
    "build_channel",
    "density_entropy",
    "fit_center_bias",
    "fixated_cells",
    "fixation_density_map",
    "histogram_rep",
    "iovc",
    "normalize_locations",
    "roc_auc",
    "summary_rep",
]
