"""Ambiguity-aware adaptive-margin contrastive learning for point clouds."""

from ._core import (
    ConfigError,
    DataError,
    Model,
    NumericError,
    PointCloud,
    ablation_presets,
    ambiguity,
    ambiguity_gray,
    closeness,
    compute_metrics,
    config_text,
    cosine_sim,
    evaluate,
    fps,
    generate_scene,
    inverse_sigmoid,
    knn,
    layer_loss,
    margin_contrastive_loss,
    margins,
    preset,
    regime,
    run_cli,
    supervised_contrastive_loss,
    train,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
