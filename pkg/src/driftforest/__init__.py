"""Streaming deep forests for drifting data."""

from .adf import AdaptiveDeepForest, AdfConfig, aggregate_output, scan, select_depth
from .adwin import Adwin, adwin_bound
from .evaluation import ConfusionMatrix, kappa, run_prequential
from .forest import AdaptiveRandomForest
from .ranking import average_ranks, bonferroni_dunn
from .stream import (
    DriftConfigError,
    GaussianMixtureGenerator,
    Instance,
    StreamFormatError,
    StreamSpec,
    load_csv_stream,
    make_class_shift_stream,
    make_gradual_sigmoid_drift,
    make_incremental_drift,
    make_sudden_drift,
    pad_instance,
    write_csv_stream,
)
from .tree import HoeffdingTree, hoeffding_bound

__version__ = "0.1.0"

__all__ = [
    "AdaptiveDeepForest", "AdfConfig", "aggregate_output", "scan", "select_depth",
    "Adwin", "adwin_bound", "ConfusionMatrix", "kappa", "run_prequential",
    "AdaptiveRandomForest", "average_ranks", "bonferroni_dunn",
    "DriftConfigError", "GaussianMixtureGenerator", "Instance", "StreamFormatError", "StreamSpec",
    "load_csv_stream", "make_class_shift_stream", "make_gradual_sigmoid_drift", "make_incremental_drift",
    "make_sudden_drift", "pad_instance", "write_csv_stream", "HoeffdingTree", "hoeffding_bound",
]
