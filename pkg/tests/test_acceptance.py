"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
values; the lines are repeated in the terminal summary. Run with ``-s`` to see
them inline.
"""

import time

import numpy as np
from scipy import stats

import fdcheck
from conftest import ACCEPTANCE_LINES, ALL_STYLES, blob_points, random_scene, rect_path
from hivevec import geometry
from hivevec.control import ControlConfig, area_threshold, control_step
from hivevec.geometry import VectorPath
from hivevec.initialization import InitConfig, sample_initial_paths
from hivevec.io.svg import parse_svg, write_svg
from hivevec.io.trace import path_ledger
from hivevec.loss import hive_loss, sive_loss
from hivevec.masks import MaskSet, derive_background, validate
from hivevec.optimize import RunConfig, point_lr, run_vectorize
from hivevec.raster import ParamGradients, Scene, render
from hivevec.styles import StyleClass


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_1_gradient_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(2001)
    total = good = 0
    seen = set()
    for k in range(50):
        # rotate a guaranteed style through the scenes so every style appears
        styles = [ALL_STYLES[k % 6]] if k < 12 else ALL_STYLES
        scene = random_scene(rng, 64, 64, max_paths=8, styles=styles)
        seen |= {p.style for p in scene.paths}
        samples = fdcheck.check(scene, rng.standard_normal((64, 64, 4)), fdcheck.parameters(scene))
        total += len(samples)
        good += sum(s.ok for s in samples)
    elapsed = time.perf_counter() - start
    frac = good / total
    verdict(1, frac >= 0.95 and len(seen) == 6 and elapsed <= 300,
            f"{good}/{total} parameters agree ({100 * frac:.2f}%), {len(seen)} styles, {elapsed:.0f}s")


def oracle_scene(seed=0, size=256) -> Scene:
    rng = np.random.default_rng(seed)
    scene = Scene(size, size)
    for _ in range(16):
        center = rng.uniform(0.15 * size, 0.85 * size, 2)
        scene.add(VectorPath(blob_points(rng, center, rng.uniform(0.06, 0.18) * size, segments=4),
                             fill=np.array([*rng.uniform(0.05, 0.95, 3), 1.0]), style=StyleClass.ICONOGRAPHY))
    return scene


def test_2_oracle_reconstruction():
    start = time.perf_counter()
    target = render(oracle_scene())
    size = target.shape[0]
    rows = []
    for seed in range(5):
        _, with_control = run_vectorize(target, cfg=RunConfig(seed=seed, init=InitConfig(num_paths_per_region=16)))
        # poor init: uniform placement and neutral gray paint, then 16 fixed paths
        poor = Scene(size, size, sample_initial_paths(np.ones((size, size)), None,
                                                      InitConfig(num_paths_per_region=16), seed=seed))
        _, fixed = run_vectorize(target, init_scene=poor, cfg=RunConfig(seed=seed, adaptive_control=False))
        rows.append((with_control.final_psnr, fixed.final_psnr))
    elapsed = time.perf_counter() - start
    ok = all(a >= 25.0 and b < a for a, b in rows) and elapsed <= 600
    detail = ", ".join(f"seed {i}: {a:.2f} vs {b:.2f} dB" for i, (a, b) in enumerate(rows))
    verdict(2, ok, f"{detail}; {elapsed:.0f}s")


def test_3_control_fidelity():
    failures = []
    cfg = ControlConfig()
    if cfg.tau_opacity != 0.05 or area_threshold(1024, 1024) != 20000:
        failures.append("thresholds")

    # (a) opacity floor after every step, on random states
    for seed in range(100):
        rng = np.random.default_rng(seed)
        scene = random_scene(rng, 64, 64, styles=ALL_STYLES)
        for p in scene.paths:
            p.paint[3] = rng.choice([0.01, 0.049, 0.05, 0.3])
        grads = ParamGradients.zeros(scene)
        for g in grads.paths:
            g.points[:] = rng.standard_normal(g.points.shape)
        gi = rng.standard_normal((64, 64, 4))
        out, _ = control_step(scene, grads, gi, cfg, seed=seed)
        if any(p.opacity < 0.05 for p in out.paths):
            failures.append(f"opacity seed {seed}")

    # (b) split iff area above the threshold at 1024
    for w, h in [(100, 199), (100, 200), (100, 201), (141, 142), (150, 200), (60, 60)]:
        scene = Scene(1024, 1024, [rect_path(100, 100, 100 + w, 100 + h)])
        grads = ParamGradients.zeros(scene)
        grads.paths[0].points[:] = 1.0
        gi = np.zeros((1024, 1024, 4))
        gi[140:150, 140:150, 0] = 1.0
        _, event = control_step(scene, grads, gi, cfg, seed=1)
        area = geometry.path_area(scene.paths[0])
        if bool(event.split) != (area > 20000):
            failures.append(f"split at area {area}")

    # (c) cadence and (d) ledger over a full run
    target = np.ones((64, 64, 4))
    target[:32, :, :3] = (0.9, 0.2, 0.1)
    target[32:, :, :3] = (0.1, 0.3, 0.8)
    _, trace = run_vectorize(target, cfg=RunConfig(total_iters=700, seed=0, init=InitConfig(num_paths_per_region=8)))
    fired = [e["iteration"] for e in trace.events]
    if fired != list(range(200, 700, 25)):
        failures.append(f"cadence {fired}")
    ledger = path_ledger(trace)
    if not ledger["balanced"]:
        failures.append(f"ledger {ledger}")
    verdict(3, not failures, f"{len(fired)} events, ledger {ledger['initial']}+{ledger['cloned']}"
                             f"+{ledger['split']}-{ledger['pruned']}={ledger['final']}; failures {failures}")


def test_4_loss_identities():
    rng = np.random.default_rng(4)
    h, w = 16, 20
    objs = [rng.random((h, w)) < 0.5 for _ in range(2)]
    masks = MaskSet.from_objects(objs, [[], []])
    zero_parts = MaskSet.from_objects(objs, [[np.zeros((h, w), bool)], []])
    x, t = rng.random((2, h, w, 4))
    per_obj = list(rng.random((2, h, w, 4)))
    zero = sive_loss(t, t, masks).total == 0.0 and hive_loss(t, t, [t, t], [t, t], zero_parts).total == 0.0
    s = sive_loss(x, t, masks).total
    gap = max(abs(hive_loss(x, t, per_obj, per_obj[::-1], m).total - s) for m in (masks, zero_parts))

    worst = 0.0
    rep = sive_loss(x, t, zero_parts)
    eps = 1e-6
    for _ in range(60):
        i = (int(rng.integers(h)), int(rng.integers(w)), int(rng.integers(3)))
        hi, lo = x.copy(), x.copy()
        hi[i] += eps
        lo[i] -= eps
        fd = (sive_loss(hi, t, zero_parts).total - sive_loss(lo, t, zero_parts).total) / (2 * eps)
        if fd != 0.0:
            worst = max(worst, abs(rep.grad_image[i] - fd) / abs(fd))
    verdict(4, zero and gap <= 1e-9 and worst <= 1e-4,
            f"exact zero {zero}, hive/sive gap {gap:.1e}, worst relative FD error {worst:.1e}")


def test_5_schedule():
    vals = point_lr(0), point_lr(50), point_lr(699)
    ok = abs(vals[0] - 0.01) < 1e-12 and abs(vals[1] - 0.8) < 1e-12 and abs(vals[2] - 0.4) <= 1e-3
    verdict(5, ok, "point_lr(0, 50, 699) = " + ", ".join(f"{v:.6f}" for v in vals))


def test_6_determinism_and_round_trip():
    target = np.zeros((32, 32, 3))
    target[8:24, 8:24] = (0.9, 0.6, 0.1)
    cfg = RunConfig(total_iters=60, seed=9, init=InitConfig(num_paths_per_region=4))
    a = write_svg(run_vectorize(target, cfg=cfg)[0])
    b = write_svg(run_vectorize(target, cfg=cfg)[0])
    same = a.encode() == b.encode()

    rng = np.random.default_rng(6)
    coord = pixel = 0.0
    for _ in range(100):
        scene = random_scene(rng)
        back = parse_svg(write_svg(scene))
        coord = max(coord, max(float(np.abs(p.points - q.points).max()) for p, q in zip(scene.paths, back.paths)))
        pixel = max(pixel, float(np.abs(render(scene) - render(back)).max()))
    verdict(6, same and coord <= 1e-4 and pixel <= 1 / 255,
            f"identical bytes {same}, max coordinate error {coord:.1e}, max pixel error {pixel * 255:.3f}/255")


def test_7_mask_algebra():
    rng = np.random.default_rng(7)
    law_failures = 0
    for _ in range(100):
        h, w = rng.integers(4, 40, 2)
        stack = [rng.random((h, w)) < rng.uniform(0.05, 0.6) for _ in range(rng.integers(1, 6))]
        bg = derive_background(stack)
        union = np.logical_or.reduce(stack)
        if not (np.array_equal(~bg, union) and not any((bg & m).any() for m in stack)):
            law_failures += 1

    missed = trials = 0
    for seed in range(400):
        rng = np.random.default_rng(seed)
        kind = ["dimension", "subset", "background", "count"][seed % 4]
        h, w = rng.integers(8, 24, 2)
        objects = [rng.random((h, w)) < 0.5 for _ in range(rng.integers(1, 4))]
        objects[0][0, 0] = False
        parts = [[o & (rng.random((h, w)) < 0.5)] for o in objects]
        ms = MaskSet.from_objects(objects, parts)
        if validate(ms):
            missed += 1  # a false positive on a clean set also counts against us
        if kind == "dimension":
            ms.object_masks[0] = np.zeros((h + 1, w), bool)
        elif kind == "subset":
            ms.part_masks[0].append(~objects[0])
        elif kind == "background":
            ms.background_mask = ~ms.background_mask
        else:
            ms.part_masks.append([])
        trials += 1
        missed += kind not in {v.kind for v in validate(ms)}
    verdict(7, law_failures == 0 and missed == 0,
            f"complement law failures {law_failures}/100, missed violations {missed}/{trials}")


def test_8_initialization_statistics():
    imp = np.zeros((512, 512))
    imp[10, 10] = 1.0
    paths = sample_initial_paths(imp, None, InitConfig(num_paths_per_region=64, radius_fraction=0.0005), seed=1)
    radius = 0.0005 * 512
    at_delta = all(np.array_equal(p.points[0], (10.5, 10.5)) for p in paths)
    spread = max(float(np.hypot(*(p.points[1:] - p.points[0]).T).max()) for p in paths)

    uniform = sample_initial_paths(np.ones((64, 64)), None,
                                   InitConfig(num_paths_per_region=10_000, segments_per_path=1), seed=7)
    firsts = np.array([p.points[0] for p in uniform])
    counts, _, _ = np.histogram2d(firsts[:, 0], firsts[:, 1], bins=8, range=[[0, 64], [0, 64]])
    p_value = stats.chisquare(counts.ravel()).pvalue
    verdict(8, at_delta and spread <= radius and p_value > 0.01,
            f"first points at delta {at_delta}, max spread {spread:.4f} <= {radius:.4f}, chi-square p {p_value:.3f}")
