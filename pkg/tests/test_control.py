import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ALL_STYLES, random_scene, rect_path
from hivevec import geometry
from hivevec.control import (
    ControlConfig,
    ControlEvent,
    apply_event,
    area_threshold,
    control_step,
    gradient_intensity_map,
    plan_event,
    sample_indicator_points,
    should_fire,
)
from hivevec.raster import ParamGradients, Scene
from hivevec.styles import StyleClass


def test_intensity_map_examples(rng):
    assert not gradient_intensity_map(np.zeros((8, 8, 4))).any()
    g = np.zeros((20, 20, 4))
    g[:10, :10] = rng.standard_normal((10, 10, 4))
    m = gradient_intensity_map(g)
    assert m[:10, :10].sum() >= 0.99 * m.sum()
    r = rng.standard_normal((9, 7, 4))
    norm = np.sqrt((r**2).sum(axis=2))
    np.testing.assert_allclose(gradient_intensity_map(r), norm / norm.max(), atol=1e-6)


def test_indicator_points_examples():
    delta = np.zeros((10, 10))
    delta[3, 7] = 1.0
    pts = sample_indicator_points(delta, 16, 0)
    assert np.all(pts == (7.5, 3.5))
    assert sample_indicator_points(np.zeros((4, 4)), 16, 0).shape == (0, 2)
    two = np.zeros((10, 10))
    two[1, 1] = 3.0
    two[8, 8] = 1.0
    pts = sample_indicator_points(two, 10_000, 1)
    a = np.sum(pts[:, 0] == 1.5)
    b = np.sum(pts[:, 0] == 8.5)
    assert a + b == 10_000
    assert a / b == pytest.approx(3.0, rel=0.1)


def test_should_fire_cadence():
    cfg = ControlConfig()
    assert should_fire(200, cfg) and should_fire(225, cfg) and should_fire(250, cfg)
    assert not should_fire(199, cfg) and not should_fire(224, cfg) and not should_fire(0, cfg)


def test_area_threshold_reference_values():
    assert area_threshold(1024, 1024) == 20000
    assert area_threshold(768, 768) == 10000
    assert area_threshold(512, 512) == pytest.approx(5000)


def grads_everywhere(scene, value=1.0):
    grads = ParamGradients.zeros(scene)
    for g in grads.paths:
        g.points[:] = value
    return grads


def test_faint_path_pruned():
    scene = Scene(64, 64, [rect_path(5, 5, 20, 20, (1, 0, 0, 0.01)), rect_path(30, 30, 50, 50)])
    faint = scene.paths[0].uid
    out, event = control_step(scene, ParamGradients.zeros(scene), np.zeros((64, 64, 4)), ControlConfig(), seed=0)
    assert event.pruned == [faint]
    assert [p.uid for p in out.paths] == [scene.paths[1].uid]


def test_zero_gradients_no_event():
    scene = Scene(64, 64, [rect_path(5, 5, 20, 20), rect_path(30, 30, 50, 50)])
    out, event = control_step(scene, ParamGradients.zeros(scene), np.zeros((64, 64, 4)), ControlConfig(), seed=0)
    assert event.is_empty
    assert len(out.paths) == 2
    for a, b in zip(out.paths, scene.paths):
        np.testing.assert_array_equal(a.points, b.points)


def candidate_scene(side):
    scene = Scene(1024, 1024, [rect_path(100, 100, 100 + side[0], 100 + side[1])])
    grad_image = np.zeros((1024, 1024, 4))
    grad_image[150:180, 150:180, 0] = 1.0
    return scene, grads_everywhere(scene), grad_image


def test_large_candidate_splits():
    scene, grads, gi = candidate_scene((150, 200))  # area 30000 > 20000
    out, event = control_step(scene, grads, gi, ControlConfig(), seed=3)
    assert event.split == [scene.paths[0].uid] and event.cloned == []
    assert len(out.paths) == 2


def test_small_candidate_clones():
    scene, grads, gi = candidate_scene((100, 100))  # area 10000 < 20000
    out, event = control_step(scene, grads, gi, ControlConfig(), seed=3)
    assert event.split == [] and len(event.cloned) == 1
    assert len(out.paths) == 2
    np.testing.assert_array_equal(out.paths[0].points, scene.paths[0].points)


def test_clone_moves_down_the_gradient():
    scene, grads, gi = candidate_scene((100, 100))
    for g in grads.paths:
        g.points[:] = (-1.0, 0.0)
    _, event = control_step(scene, grads, gi, ControlConfig(), seed=3)
    assert event.cloned[0][1] == pytest.approx((1.0, 0.0))


def test_max_paths_caps_growth():
    scene, grads, gi = candidate_scene((100, 100))
    out, event = control_step(scene, grads, gi, ControlConfig(max_paths=1), seed=3)
    assert event.is_empty and len(out.paths) == 1


def test_event_record_round_trip():
    ev = ControlEvent(225, pruned=[1], split=[2, 3], cloned=[(4, (0.6, -0.8))], new_uids=[9, 10, 11, 12, 13],
                      paths_before=5, paths_after=7)
    assert ControlEvent.from_record(ev.to_record()) == ev


def random_state(seed):
    rng = np.random.default_rng(seed)
    scene = random_scene(rng, 64, 64, styles=ALL_STYLES)
    for p in scene.paths:
        p.paint[3] = rng.choice([0.01, 0.04, 0.3, 0.9])
    grads = ParamGradients.zeros(scene)
    for g in grads.paths:
        g.points[:] = rng.standard_normal(g.points.shape) * rng.choice([0.0, 1e-7, 1.0])
    grad_image = rng.standard_normal((64, 64, 4)) * (rng.random((64, 64, 1)) < 0.3)
    return scene, grads, grad_image


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), cap=st.one_of(st.none(), st.integers(1, 12)),
       tau_a=st.sampled_from([None, 50.0, 500.0]))
def test_control_step_properties(seed, cap, tau_a):
    scene, grads, grad_image = random_state(seed)
    cfg = ControlConfig(max_paths=cap, tau_a=tau_a)
    before = [p.copy() for p in scene.paths]
    out, event = control_step(scene, grads, grad_image, cfg, seed=[seed, 1])

    # the input scene is untouched
    for a, b in zip(before, scene.paths):
        assert a.points.tobytes() == b.points.tobytes()
    # faint paths gone
    assert all(p.opacity >= cfg.tau_opacity for p in out.paths)
    # growth bounded by the cap; pruning alone never grows the scene
    if cap is not None:
        assert len(out.paths) <= max(cap, len(scene.paths) - len(event.pruned))
    if not event.split and not event.cloned:
        assert len(out.paths) <= len(scene.paths)
    assert len(out.paths) == len(scene.paths) - len(event.pruned) + len(event.split) + len(event.cloned)
    assert out.violations() == []
    # split iff closed and larger than the threshold
    threshold = cfg.area_threshold(scene)
    for uid in event.split:
        parent = scene.paths[scene.index_of(uid)]
        assert parent.closed and geometry.path_area(parent) > threshold
    for uid, _ in event.cloned:
        parent = scene.paths[scene.index_of(uid)]
        assert not parent.closed or geometry.path_area(parent) <= threshold
    # determinism and replay
    again, event2 = control_step(scene, grads, grad_image, cfg, seed=[seed, 1])
    assert event2 == event
    replay = apply_event(scene, ControlEvent.from_record(event.to_record()))
    assert [p.uid for p in replay.paths] == [p.uid for p in out.paths]
    for a, b, c in zip(out.paths, again.paths, replay.paths):
        assert a.points.tobytes() == b.points.tobytes() == c.points.tobytes()
        assert a.style == c.style


def test_split_children_inherit_style():
    scene, grads, gi = candidate_scene((150, 200))
    scene.paths[0].style = StyleClass.LOW_POLY
    out, event = control_step(scene, grads, gi, ControlConfig(), seed=3)
    assert all(p.style == StyleClass.LOW_POLY for p in out.paths)
    assert out.violations() == []


def test_plan_rejects_incongruent_gradients():
    scene, grads, gi = candidate_scene((100, 100))
    with pytest.raises(ValueError):
        plan_event(scene, ParamGradients([]), gi, ControlConfig(), seed=0)
