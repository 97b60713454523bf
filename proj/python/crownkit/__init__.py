"""Canopy height extraction, allometry, metrics, losses and prediction heads."""

from ._crownkit import (
    CrownkitError,
    GridRef,
    PixelMask,
    RotatedRect,
    __version__,
    buffer_mask,
    characteristic_length,
    classification_metrics,
    cross_entropy,
    crown_radius,
    dwa_weights,
    extract_height,
    fit_allometry,
    focal_loss,
    generate_scene,
    gradient_check,
    min_rotated_rect,
    pcgrad,
    percentile,
    predict_height,
    rasterize_polygon,
    regression_metrics,
    run_cli,
    smooth_l1,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
