"""Vector primitive styles and the parameter constraints each one imposes."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class StyleClass(str, enum.Enum):
    ICONOGRAPHY = "iconography"
    PIXEL_ART = "pixelart"
    LOW_POLY = "lowpoly"
    PAINTING = "painting"
    SKETCHING = "sketching"
    INK_WASH = "inkwash"

    @classmethod
    def parse(cls, name: str) -> "StyleClass":
        key = name.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        for style in cls:
            if style.value == key:
                return style
        raise ValueError(f"unknown style {name!r}; expected one of {[s.value for s in cls]}")


@dataclass(frozen=True)
class StylePreset:
    """Trainability flags and primitive kind for one style.

    Every attribute of a path is either listed as trainable here or frozen.
    ``polygon`` paths keep straight edges: their Bezier handles are derived
    from the corner points and never optimized directly.
    """

    style: StyleClass
    closed: bool
    filled: bool
    polygon: bool
    train_points: bool
    train_rgb: bool
    train_alpha: bool
    train_width: bool
    default_width: float = 0.0
    fixed_rgb: tuple[float, float, float] | None = None

    @property
    def stroked(self) -> bool:
        return not self.filled


_PRESETS = {
    StyleClass.ICONOGRAPHY: StylePreset(
        StyleClass.ICONOGRAPHY, closed=True, filled=True, polygon=False,
        train_points=True, train_rgb=True, train_alpha=True, train_width=False,
    ),
    StyleClass.PIXEL_ART: StylePreset(
        StyleClass.PIXEL_ART, closed=True, filled=True, polygon=True,
        train_points=False, train_rgb=True, train_alpha=True, train_width=False,
    ),
    StyleClass.LOW_POLY: StylePreset(
        StyleClass.LOW_POLY, closed=True, filled=True, polygon=True,
        train_points=True, train_rgb=True, train_alpha=True, train_width=False,
    ),
    StyleClass.PAINTING: StylePreset(
        StyleClass.PAINTING, closed=False, filled=False, polygon=False,
        train_points=True, train_rgb=True, train_alpha=True, train_width=True,
        default_width=4.0,
    ),
    StyleClass.SKETCHING: StylePreset(
        StyleClass.SKETCHING, closed=False, filled=False, polygon=False,
        train_points=True, train_rgb=False, train_alpha=True, train_width=False,
        default_width=1.5, fixed_rgb=(0.0, 0.0, 0.0),
    ),
    StyleClass.INK_WASH: StylePreset(
        StyleClass.INK_WASH, closed=False, filled=False, polygon=False,
        train_points=True, train_rgb=False, train_alpha=True, train_width=True,
        default_width=3.0, fixed_rgb=(0.0, 0.0, 0.0),
    ),
}


def style_preset(style: StyleClass | str) -> StylePreset:
    if isinstance(style, str):
        style = StyleClass.parse(style)
    return _PRESETS[style]
