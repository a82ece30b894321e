"""Localized-discrepancy image forensics.

Feature extraction (local gradient autocorrelation and local variation
patterns), a small from-scratch convolutional detector, evaluation metrics,
a synthetic corpus, a robustness-perturbation suite, and a CLI tying them
into reproducible experiments.
"""

__version__ = "0.1.0"

from .classifier import (
    AdamState,
    ModelParams,
    TrainConfig,
    adam_step,
    backward,
    bce_loss,
    concat_features,
    forward,
    global_average_pool,
    load_checkpoint,
    predict,
    predict_proba,
    save_checkpoint,
    train,
)
from .config import RunConfig, parse_config_file, resolve_config
from .corpus import (
    DEFAULT_PERTURBATIONS,
    ManifestEntry,
    PerturbSpec,
    SynthConfig,
    decode_image,
    emit_image,
    gaussian_blur,
    generate_corpus,
    jpeg_roundtrip,
    load_manifest,
    resize,
    save_manifest,
    split_manifest,
    synth_pair,
)
from .detector import LdrNetDetector
from .errors import (
    ConfigError,
    DecodeError,
    DimensionError,
    DomainError,
    GradientCacheError,
    LdrNetError,
    ManifestError,
    UnsupportedConfigurationError,
)
from .lga import (
    GradientOperator,
    LgaConfig,
    LgaFeature,
    LgaTransform,
    autocorrelation,
    directional_gradients,
    extract_lga,
    gradient_kernels,
    gradient_magnitude,
    mean_abs_lga,
)
from .lvp import (
    NEIGHBOR_OFFSETS,
    LvpFeature,
    LvpTransform,
    LvpWeights,
    code_histogram,
    encode_patch,
    extract_lvp,
    pattern_entropy,
    with_weights,
)
from .metrics import (
    EvalReport,
    ScoredSample,
    accuracy,
    average_precision,
    evaluate,
    make_samples,
    pr_curve,
)
from .records import ExperimentRecord
from .storage import load_feature_stack, save_feature_stack
from .tensor_core import (
    Padding,
    add,
    check_kernel,
    check_tensor,
    correlate2d,
    gaussian_kernel,
    hypot_eps,
    iter_images,
    pad_spatial,
    subtract,
    zip_map,
)
