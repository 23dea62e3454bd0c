"""Fixed-length time-series (ECG beat) to fused GAF/RP/MTF image pipeline."""

from .classifier import (
    SoftmaxModel,
    TrainConfig,
    forward,
    loss_and_grad,
    predict,
    stratified_split,
    train,
)
from .dataset import (
    MITBIH_CLASSES,
    PTB_CLASSES,
    BeatDataset,
    SmoteConfig,
    balance_targets,
    encode_dataset,
    load_csv,
    smote,
)
from .encoders import (
    CHANNEL_ORDER,
    VALUE_RANGES,
    EncoderConfig,
    FusedImage,
    GrayImage,
    MtfModel,
    PolarEncoding,
    RescaledSeries,
    TimeSeries,
    encode_fused,
    fuse,
    gasf,
    mtf_fit,
    mtf_image,
    polar_encode,
    recurrence_plot,
    rescale_unit,
    resize_bilinear,
)
from .metrics import EvalReport, evaluate, format_ablation_table

__version__ = "0.1.0"

__all__ = [
    "BeatDataset",
    "CHANNEL_ORDER",
    "EncoderConfig",
    "EvalReport",
    "FusedImage",
    "GrayImage",
    "MITBIH_CLASSES",
    "MtfModel",
    "PTB_CLASSES",
    "PolarEncoding",
    "RescaledSeries",
    "SmoteConfig",
    "SoftmaxModel",
    "TimeSeries",
    "TrainConfig",
    "VALUE_RANGES",
    "balance_targets",
    "encode_dataset",
    "encode_fused",
    "evaluate",
    "format_ablation_table",
    "forward",
    "fuse",
    "gasf",
    "load_csv",
    "loss_and_grad",
    "mtf_fit",
    "mtf_image",
    "polar_encode",
    "predict",
    "recurrence_plot",
    "rescale_unit",
    "resize_bilinear",
    "smote",
    "stratified_split",
    "train",
]
