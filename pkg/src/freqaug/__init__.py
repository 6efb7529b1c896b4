"""Frequency-domain data augmentation and OOD-robustness toolkit.

Core idea: an image's low/high frequency bands can be split, swapped
between same-class images, or recombined with a dataset-mean amplitude,
and a classifier's behavior under those transforms measures how much it
leans on each band. The package bundles the transforms, a desk-scale
classifier, corruption benchmarks, confidence-based OOD scoring, a CLI,
and an HTTP service exposing the stateless pieces.
"""

from .augment import (
    AugmentConfig,
    CorruptionSpec,
    apr_recombine,
    augment_batch,
    corrupt,
    corrupt_collection,
    online_hook,
    rfc_swap,
)
from .classifier import ClassifierState, SgdSchedule, load_model, save_model, train
from .errors import (
    DomainError,
    FormatError,
    LabelError,
    ShapeError,
    ToolkitError,
    TrainingDiverged,
)
from .manifest import TOOLKIT_VERSION
from .oodval import RocReport, ScoreSet, auroc, detect_at_threshold, evaluate_ood, score_dataset
from .probe import MeanAmplitude, ProbeKind, band_probe, mean_amplitude, phase_only, probe_table
from .spectral import FreqMask, Spectrum, band_split, dft2, idft2, make_masks
from .tensorio import ImageTensor, LabeledDataset, load_cifar_binary, write_cifar_binary

__version__ = TOOLKIT_VERSION

__all__ = [
    "AugmentConfig",
    "ClassifierState",
    "CorruptionSpec",
    "DomainError",
    "FormatError",
    "FreqMask",
    "ImageTensor",
    "LabelError",
    "LabeledDataset",
    "MeanAmplitude",
    "ProbeKind",
    "RocReport",
    "ScoreSet",
    "SgdSchedule",
    "ShapeError",
    "Spectrum",
    "ToolkitError",
    "TrainingDiverged",
    "apr_recombine",
    "augment_batch",
    "auroc",
    "band_probe",
    "band_split",
    "corrupt",
    "corrupt_collection",
    "detect_at_threshold",
    "dft2",
    "evaluate_ood",
    "idft2",
    "load_cifar_binary",
    "load_model",
    "make_masks",
    "mean_amplitude",
    "online_hook",
    "phase_only",
    "probe_table",
    "rfc_swap",
    "save_model",
    "score_dataset",
    "train",
    "write_cifar_binary",
    "__version__",
]
