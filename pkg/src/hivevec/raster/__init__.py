"""Differentiable rasterization of vector scenes."""

from hivevec.raster._backend import active as active_backend
from hivevec.raster._backend import available as available_backends
from hivevec.raster._backend import set_backend, using
from hivevec.raster.core import (
    DEFAULT_CONFIG,
    ParamGradients,
    PathGradient,
    RasterConfig,
    Scene,
    backward,
    backward_from_tape,
    coverage,
    forward_with_tape,
    render,
    sample_vertices,
    scale_scene,
    signed_distance,
)

__all__ = [
    "DEFAULT_CONFIG",
    "ParamGradients",
    "PathGradient",
    "RasterConfig",
    "Scene",
    "active_backend",
    "available_backends",
    "backward",
    "backward_from_tape",
    "coverage",
    "forward_with_tape",
    "render",
    "sample_vertices",
    "scale_scene",
    "set_backend",
    "signed_distance",
    "using",
]
