"""Command-line driver: ``hivevec vectorize | render | trace-report | validate-masks``.

Every option can also come from an environment variable named
``HIVEVEC_<COMMAND>_<OPTION>``, e.g. ``HIVEVEC_VECTORIZE_SEED=3``.

Exit status is 0 on success, 1 when the loss turns non-finite and 2 for any
input or usage problem. Failures print exactly one line to stderr::

    hivevec: error[<kind>]: <message>
"""

from __future__ import annotations

import logging
import re
import sys
from pathlib import Path

import click
import numpy as np

from hivevec import masks as masklib
from hivevec.io.config import SECTIONS, ConfigError, build_config, convert, parse_config_text
from hivevec.io.png import PngError, read_gray, read_mask, read_png, write_png
from hivevec.io.svg import SvgParseError, read_svg, save_svg
from hivevec.io.trace import TraceError, read_trace, report, write_trace
from hivevec.optimize import NumericalError, RunConfig, run_vectorize
from hivevec.raster import render as render_scene
from hivevec.raster import scale_scene
from hivevec.styles import StyleClass, style_preset

ENV_PREFIX = "HIVEVEC"
_OBJECT = re.compile(r"^object_(\d+)\.png$")
_PART = re.compile(r"^part_(\d+)_(\d+)\.png$")


class CliFailure(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _usage(message: str) -> CliFailure:
    return CliFailure(2, "usage", message)


def _input(message: str) -> CliFailure:
    return CliFailure(2, "input", message)


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def load_mask_dir(directory) -> masklib.MaskSet:
    """Read ``object_<i>.png`` and ``part_<i>_<j>.png`` files from ``directory``.

    Indices must run 0, 1, 2, ... without gaps.
    """
    root = Path(directory)
    if not root.is_dir():
        raise _input(f"masks directory {root} does not exist")
    objects: dict[int, Path] = {}
    parts: dict[int, dict[int, Path]] = {}
    for f in sorted(root.iterdir()):
        if m := _OBJECT.match(f.name):
            objects[int(m.group(1))] = f
        elif m := _PART.match(f.name):
            parts.setdefault(int(m.group(1)), {})[int(m.group(2))] = f
    if not objects:
        raise _input(f"no object_<i>.png masks in {root}")
    if sorted(objects) != list(range(len(objects))):
        raise _input(f"object mask indices in {root} must be 0..{len(objects) - 1}, got {sorted(objects)}")
    stray = sorted(set(parts) - set(objects))
    if stray:
        raise _input(f"part masks reference missing objects {stray}")
    part_lists = []
    for i in range(len(objects)):
        found = parts.get(i, {})
        if sorted(found) != list(range(len(found))):
            raise _input(f"part mask indices for object {i} must be 0..{len(found) - 1}, got {sorted(found)}")
        part_lists.append([read_mask(found[j]) for j in range(len(found))])
    object_masks = [read_mask(objects[i]) for i in range(len(objects))]
    shape = object_masks[0].shape
    bad = [i for i, m in enumerate(object_masks) if m.shape != shape]
    if bad:
        raise _input(f"object masks {bad} differ in size from object_0.png {shape}")
    return masklib.MaskSet(object_masks, part_lists, masklib.derive_background(object_masks))


def _parse_set(items) -> dict[str, dict[str, object]]:
    out: dict[str, dict[str, object]] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise _usage(f"--set expects section.key=value, got {item!r}")
        section = section.lower()
        if section not in SECTIONS:
            raise _usage(f"--set: unknown section {section!r}")
        try:
            value = convert(section, name, raw)
        except KeyError:
            raise _usage(f"--set: unknown key {name!r} in [{section}]") from None
        except ValueError as exc:
            raise _usage(f"--set {key}: {exc}") from None
        if name in out.get(section, {}):
            raise _usage(f"--set {key} given twice")
        out.setdefault(section, {})[name] = value
    return out


def resolve_config(config_path, overrides: list[str], flags: dict[str, tuple[str, str, object]]) -> RunConfig:
    """Defaults, then the config file, then ``--set`` values and dedicated flags.

    ``flags`` maps option name to ``(section, key, value)``; ``None`` values
    are left alone. A dedicated flag and a ``--set`` for the same key conflict.
    """
    values: dict[str, dict[str, object]] = {}
    if config_path is not None:
        try:
            values = parse_config_text(Path(config_path).read_text(encoding="utf-8"))
        except ConfigError as exc:
            raise _input(f"{config_path}: {exc}") from None
        except OSError as exc:
            raise _input(f"{config_path}: {exc.strerror or exc}") from None
    cli_values = _parse_set(overrides)
    for option, (section, key, value) in flags.items():
        if value is None:
            continue
        if key in cli_values.get(section, {}):
            raise _usage(f"--{option} conflicts with --set {section}.{key}")
        cli_values.setdefault(section, {})[key] = value
    for section, entries in cli_values.items():
        values.setdefault(section, {}).update(entries)
    try:
        return build_config(values)
    except (TypeError, ValueError) as exc:
        raise _usage(f"invalid configuration: {exc}") from None


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="Log progress (repeat for debug output).")
def cli(verbose: int) -> None:
    """Fit and inspect layered vector graphics."""
    if verbose:
        logging.basicConfig(level=logging.DEBUG if verbose > 1 else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@cli.command()
@click.argument("target", type=click.Path(dir_okay=False))
@click.option("--masks", "masks_dir", type=click.Path(file_okay=False),
              help="Directory of object_<i>.png / part_<i>_<j>.png masks.")
@click.option("--importance", type=click.Path(dir_okay=False), help="Grayscale importance map PNG.")
@click.option("--style", type=click.Choice([s.value for s in StyleClass]), help="Primitive style.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Run configuration file.")
@click.option("--out", type=click.Path(dir_okay=False), help="Output SVG; the trace goes next to it as .trace.")
@click.option("--seed", type=int, help="Random seed.")
@click.option("--mode", type=click.Choice(["sive", "hive"]), help="Loss mode.")
@click.option("--iters", type=int, help="Number of optimization iterations.")
@click.option("--control/--no-control", default=None, help="Enable or disable adaptive path control.")
@click.option("--paths", type=int, help="Initial paths per region.")
@click.option("--segments", type=int, help="Cubic segments per path.")
@click.option("--stroke-width", type=float, help="Initial stroke width (stroked styles only).")
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
              help="Override any configuration value; repeatable.")
def vectorize(target, masks_dir, importance, style, config_path, out, seed, mode, iters, control,
              paths, segments, stroke_width, overrides):
    """Fit vector paths to TARGET (a PNG) and write an SVG plus a run trace."""
    flags = {
        "seed": ("run", "seed", seed),
        "mode": ("run", "mode", mode),
        "iters": ("run", "total_iters", iters),
        "control": ("run", "adaptive_control", control),
        "style": ("init", "style", StyleClass.parse(style) if style else None),
        "paths": ("init", "num_paths_per_region", paths),
        "segments": ("init", "segments_per_path", segments),
        "stroke-width": ("init", "stroke_width", stroke_width),
    }
    # checked before the config is built so the message names the flags
    if stroke_width is not None and style is not None and style_preset(StyleClass.parse(style)).filled:
        raise _usage(f"--stroke-width conflicts with --style {style}: the style has no stroke")
    cfg = resolve_config(config_path, list(overrides), flags)
    if cfg.mode == "hive" and masks_dir is None:
        raise _usage("HIVE mode requires --masks (a directory of object_<i>.png masks)")

    image = _read_png(target)
    maskset = load_mask_dir(masks_dir) if masks_dir is not None else None
    if maskset is not None:
        problems = masklib.validate(maskset)
        if problems:
            raise _input("masks invalid: " + "; ".join(f"{p.kind} {p.where}: {p.detail}" for p in problems))
        if tuple(maskset.shape) != image.shape[:2]:
            raise _input(f"masks are {maskset.shape[1]}x{maskset.shape[0]} but target is "
                         f"{image.shape[1]}x{image.shape[0]}")
    imp = None
    if importance is not None:
        try:
            imp = masklib.as_importance(_read(read_gray, importance))
        except ValueError as exc:
            raise _input(f"{importance}: {exc}") from None
        if imp.shape != image.shape[:2]:
            raise _input(f"importance map {importance} does not match the target size")

    out_path = Path(out) if out else Path(target).with_suffix(".svg")
    try:
        scene, trace = run_vectorize(image, maskset, imp, cfg)
    except NumericalError as exc:
        raise CliFailure(1, "numerical", str(exc)) from None
    except ValueError as exc:
        raise _input(str(exc)) from None
    save_svg(scene, out_path)
    trace_path = out_path.with_suffix(".trace")
    write_trace(trace, trace_path)
    psnr = trace.final_psnr
    click.echo(f"wrote {out_path} ({len(scene.paths)} paths, final psnr "
               f"{'exact' if psnr == float('inf') else f'{psnr:.2f} dB'}) and {trace_path}")


def _read(reader, path):
    try:
        return reader(path)
    except FileNotFoundError:
        raise _input(f"{path}: no such file") from None
    except PngError as exc:
        raise _input(str(exc)) from None


def _read_png(path) -> np.ndarray:
    return _read(read_png, path)


@cli.command("render")
@click.argument("svg", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), help="Output PNG (default: SVG name with .png).")
@click.option("--scale", type=float, default=1.0, show_default=True, help="Resolution multiplier.")
@click.option("--supersample", type=click.IntRange(1, 16), default=1, show_default=True,
              help="Samples per pixel along each axis for anti-aliasing.")
def render_cmd(svg, out, scale, supersample):
    """Rasterize SVG (the subset written by vectorize) to PNG."""
    if not scale > 0:
        raise _usage("--scale must be positive")
    try:
        scene = read_svg(svg)
    except FileNotFoundError:
        raise _input(f"{svg}: no such file") from None
    except SvgParseError as exc:
        raise _input(f"{svg}: {exc}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise _input(f"{svg}: {exc}") from None
    if scale != 1.0:
        scene = scale_scene(scene, scale)
    if scene.width < 1 or scene.height < 1:
        raise _usage(f"--scale {scale} leaves an empty canvas")
    img = render_scene(scene, supersample=supersample)
    alpha = img[..., 3:4]
    straight = np.where(alpha > 0, img[..., :3] / np.maximum(alpha, 1e-12), 0.0)
    out_path = Path(out) if out else Path(svg).with_suffix(".png")
    write_png(out_path, np.concatenate([straight, alpha], axis=2))
    click.echo(f"wrote {out_path} ({scene.width}x{scene.height})")


@cli.command("trace-report")
@click.argument("trace_file", type=click.Path(dir_okay=False))
def trace_report(trace_file):
    """Summarize a run trace: loss statistics and per-event path counts."""
    try:
        trace = read_trace(trace_file)
    except FileNotFoundError:
        raise _input(f"{trace_file}: no such file") from None
    except TraceError as exc:
        raise _input(f"{trace_file}: {exc}") from None
    click.echo(report(trace), nl=False)


@cli.command("validate-masks")
@click.argument("directory", type=click.Path(file_okay=False))
def validate_masks(directory):
    """Check a masks directory; exits 2 listing every violation."""
    maskset = load_mask_dir(directory)
    problems = masklib.validate(maskset)
    if problems:
        raise _input(f"{len(problems)} violation(s): "
                     + "; ".join(f"{p.kind} {p.where}: {p.detail}" for p in problems))
    h, w = maskset.shape
    click.echo(f"ok: {maskset.num_objects} objects, {maskset.num_parts} parts, {w}x{h}")


def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="hivevec", standalone_mode=False, auto_envvar_prefix=ENV_PREFIX)
    except CliFailure as exc:
        click.echo(f"hivevec: error[{exc.kind}]: {_one_line(exc)}", err=True)
        return exc.code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        click.echo(f"hivevec: error[usage]: {_one_line(exc.format_message())}", err=True)
        return 2
    except click.Abort:
        click.echo("hivevec: error[usage]: aborted", err=True)
        return 2
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
