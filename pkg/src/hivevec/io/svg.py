"""SVG read/write for the absolute ``M``/``C``/``Z`` path subset.

Consecutive paths that share an object (and part) are wrapped in
``<g data-object=...>`` / ``<g data-part=...>`` groups. Groups are never
reordered, so paint order survives a round trip. Polygon styles are written
as degenerate cubics, so the same parser reads every style.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from itertools import groupby

import numpy as np

from hivevec.geometry import VectorPath
from hivevec.raster import Scene
from hivevec.styles import StyleClass, style_preset

SVG_NS = "http://www.w3.org/2000/svg"
_TOKEN = re.compile(r"\s*(?:([A-Za-z])|([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))\s*,?")
_SHAPES = {"circle", "ellipse", "line", "polyline", "polygon", "text", "image", "use"}


class SvgParseError(ValueError):
    def __init__(self, message: str, element: str | None = None, offset: int | None = None,
                 command: str | None = None):
        where = []
        if element is not None:
            where.append(f"element {element}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))
        self.element = element
        self.offset = offset
        self.command = command


def _num(v: float) -> str:
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _hex(color: np.ndarray) -> str:
    r, g, b = (int(round(float(np.clip(c, 0.0, 1.0)) * 255)) for c in color[:3])
    return f"#{r:02x}{g:02x}{b:02x}"


def _opacity(a: float) -> str:
    s = f"{float(np.clip(a, 0.0, 1.0)):.4f}".rstrip("0").rstrip(".")
    return s or "0"


def path_data(path: VectorPath) -> str:
    pts = path.points
    parts = [f"M {_num(pts[0, 0])} {_num(pts[0, 1])}"]
    for k in range(1, len(pts), 3):
        trio = pts[k:k + 3]
        parts.append("C " + " ".join(f"{_num(x)} {_num(y)}" for x, y in trio))
    if path.closed:
        parts.append("Z")
    return " ".join(parts)


def _path_element(path: VectorPath) -> str:
    attrs = [f'id="p{path.uid}"', f'data-style="{path.style.value}"', f'd="{path_data(path)}"']
    if path.fill is not None:
        attrs += [f'fill="{_hex(path.fill)}"', f'fill-opacity="{_opacity(path.fill[3])}"', 'stroke="none"']
    else:
        attrs += ['fill="none"', f'stroke="{_hex(path.stroke)}"', f'stroke-opacity="{_opacity(path.stroke[3])}"',
                  f'stroke-width="{_num(path.stroke_width)}"', 'stroke-linecap="round"', 'stroke-linejoin="round"']
    return "<path " + " ".join(attrs) + "/>"


def write_svg(scene: Scene, object_grouping: dict | None = None) -> str:
    """Serialize ``scene``; ``object_grouping`` maps uid -> (object, part) overrides."""
    def group_of(p: VectorPath):
        if object_grouping and p.uid in object_grouping:
            return tuple(object_grouping[p.uid])
        return (p.object_id, p.part_id if p.object_id is not None else None)

    w, h = scene.width, scene.height
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{SVG_NS}" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'  <rect id="background" x="0" y="0" width="{w}" height="{h}" '
        f'fill="{_hex(scene.background)}" fill-opacity="{_opacity(scene.background[3])}"/>',
    ]
    for (obj, part), run in groupby(scene.paths, key=group_of):
        run = list(run)
        if obj is None:
            lines.extend("  " + _path_element(p) for p in run)
            continue
        lines.append(f'  <g data-object="{obj}">')
        for part_id, inner in groupby(run, key=lambda p: group_of(p)[1]):
            if part_id is None:
                lines.extend("    " + _path_element(p) for p in inner)
            else:
                lines.append(f'    <g data-part="{part_id}">')
                lines.extend("      " + _path_element(p) for p in inner)
                lines.append("    </g>")
        lines.append("  </g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def parse_path_data(d: str, element: str | None = None) -> tuple[np.ndarray, bool]:
    """Parse ``M x y (C x1 y1 x2 y2 x y)+ [Z]`` into control points and closed flag."""
    pos = 0
    tokens = []
    while pos < len(d):
        m = _TOKEN.match(d, pos)
        if not m or m.end() == pos:
            if d[pos:].strip() == "":
                break
            raise SvgParseError(f"unexpected character {d[pos]!r} in path data", element, pos)
        tokens.append((m.group(1), m.group(2), m.start()))
        pos = m.end()

    points = []
    closed = False
    cmd = None
    pending = []
    for letter, number, offset in tokens:
        if letter is not None:
            if letter not in ("M", "C", "Z", "z"):
                raise SvgParseError(f"unsupported path command {letter!r}", element, offset, letter)
            if pending:
                raise SvgParseError(f"incomplete coordinates for command {cmd!r}", element, offset, cmd)
            if closed:
                raise SvgParseError("path data continues after Z", element, offset, letter)
            if letter == "M" and points:
                raise SvgParseError("multiple subpaths are not supported", element, offset, letter)
            if letter != "M" and not points:
                raise SvgParseError("path data must start with M", element, offset, letter)
            if letter in ("Z", "z"):
                closed = True
            cmd = letter
            continue
        if cmd not in ("M", "C"):
            raise SvgParseError("number outside a coordinate command", element, offset, cmd)
        pending.append(float(number))
        need = 2 if cmd == "M" else 6
        if len(pending) == need:
            points.extend(zip(pending[0::2], pending[1::2]))
            pending = []
            if cmd == "M":
                # extra pairs after M would be implicit line-tos, outside the subset
                cmd = None
    if pending:
        raise SvgParseError(f"incomplete coordinates for command {cmd!r}", element, len(d), cmd)
    if len(points) < 4 or len(points) % 3 != 1:
        raise SvgParseError(f"path has {len(points)} points; need M followed by at least one C", element)
    return np.array(points, dtype=np.float64), closed


def _parse_color(value: str | None, opacity: str | None, element: str) -> np.ndarray | None:
    if value is None or value.strip().lower() == "none":
        return None
    v = value.strip()
    if not re.fullmatch(r"#[0-9a-fA-F]{6}", v):
        raise SvgParseError(f"unsupported color {value!r}; expected #rrggbb", element)
    rgb = [int(v[i:i + 2], 16) / 255.0 for i in (1, 3, 5)]
    a = float(opacity) if opacity is not None else 1.0
    return np.array(rgb + [a])


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_svg(text: str) -> Scene:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise SvgParseError(f"malformed XML: {exc}") from None
    if _local(root.tag) != "svg":
        raise SvgParseError("root element is not <svg>")
    try:
        width = int(round(float(root.get("width"))))
        height = int(round(float(root.get("height"))))
    except (TypeError, ValueError):
        raise SvgParseError("svg width/height missing or not numeric") from None
    scene = Scene(width, height)
    counter = [0]

    def visit(node, obj, part):
        for child in node:
            tag = _local(child.tag)
            counter[0] += 1
            label = child.get("id") or f"<{tag}> #{counter[0]}"
            if tag == "g":
                o = child.get("data-object")
                p = child.get("data-part")
                visit(child,
                      int(o) if o is not None else obj,
                      int(p) if p is not None else part)
            elif tag == "rect":
                if child.get("id") != "background":
                    raise SvgParseError("only the background <rect> is supported", label)
                color = _parse_color(child.get("fill"), child.get("fill-opacity"), label)
                scene.background = color if color is not None else np.zeros(4)
            elif tag == "path":
                scene.add(_parse_path(child, label, obj, part))
            elif tag in _SHAPES:
                raise SvgParseError(f"unsupported element <{tag}>", label)

    visit(root, None, None)
    return scene


def _parse_path(el, label: str, obj, part) -> VectorPath:
    d = el.get("d")
    if d is None:
        raise SvgParseError("path without d attribute", label)
    points, closed = parse_path_data(d, label)
    fill = _parse_color(el.get("fill"), el.get("fill-opacity"), label)
    stroke = _parse_color(el.get("stroke"), el.get("stroke-opacity"), label)
    width = float(el.get("stroke-width", "0"))
    style_name = el.get("data-style")
    if style_name is not None:
        style = StyleClass.parse(style_name)
    else:
        style = StyleClass.ICONOGRAPHY if fill is not None else StyleClass.PAINTING
    uid = -1
    ident = el.get("id", "")
    if re.fullmatch(r"p\d+", ident):
        uid = int(ident[1:])
    path = VectorPath(points, closed=closed, fill=fill, stroke=stroke, stroke_width=width,
                      style=style, uid=uid, object_id=obj, part_id=part if obj is not None else None)
    problems = path.violations()
    if problems:
        raise SvgParseError("invalid path: " + "; ".join(problems), label)
    if style_preset(style).closed != closed:
        raise SvgParseError(f"style {style.value} does not match closed={closed}", label)
    return path


def read_svg(path) -> Scene:
    with open(path, encoding="utf-8") as fh:
        return parse_svg(fh.read())


def save_svg(scene: Scene, path, object_grouping: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_svg(scene, object_grouping))
