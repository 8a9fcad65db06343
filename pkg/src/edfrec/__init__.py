"""Writer-independent online handwritten stroke recognition using
extended directional features."""

from importlib import resources

from .classifier import (
    METHOD1,
    METHOD2,
    RecognitionResult,
    classify,
    classify_method1,
    classify_method2,
)
from .dtw import DtwConfig, direction_cost, dtw_distance
from .features import (
    CurvaturePointSet,
    EdfVector,
    FeatureConfig,
    extract_curvature_points,
    extract_edf,
    pair_angle,
    quantize_direction,
    sign_diff,
    stroke_features,
)
from .ink import (
    OOV_LABEL,
    Dataset,
    DatasetError,
    Point,
    Stroke,
    load_vocabulary,
    parse_dataset,
    write_dataset,
)
from .smoothing import SmoothingConfig, dwt_smooth_sequence, smooth_stroke
from .trainer import (
    ModelError,
    Reference,
    ReferenceModel,
    TauSearch,
    TrainerConfig,
    build_model,
    cluster_primitive,
    find_tau,
    load_model,
    save_model,
)

__version__ = "0.1.0"


def default_vocabulary() -> list[str]:
    text = resources.files("edfrec.data").joinpath("vocab_20.txt").read_text("utf-8")
    return load_vocabulary(text)


def default_templates():
    from .evaluate import load_templates

    text = resources.files("edfrec.data").joinpath("templates_20.json").read_text("utf-8")
    return load_templates(text)
