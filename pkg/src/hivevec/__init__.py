"""Layered image vectorization with differentiable rasterization.

Typical use::

    from hivevec import RunConfig, run_vectorize
    scene, trace = run_vectorize(target_rgba, cfg=RunConfig(total_iters=300))
"""

from hivevec.geometry import VectorPath
from hivevec.masks import MaskSet
from hivevec.optimize import NumericalError, RunConfig, run_vectorize
from hivevec.raster import RasterConfig, Scene, backward, render
from hivevec.styles import StyleClass, style_preset

__version__ = "0.1.0"

__all__ = [
    "MaskSet",
    "NumericalError",
    "RasterConfig",
    "RunConfig",
    "Scene",
    "StyleClass",
    "VectorPath",
    "backward",
    "render",
    "run_vectorize",
    "style_preset",
]
