import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from microbeam.array import steering_vector
from microbeam.errors import ConfigurationError, DomainError
from microbeam.scene import (DatasetConfig, RadarParams, SceneSpec, WalkerSpec, dataset_plan,
                             example_seeds, make_dataset, scatterer_tracks, scene_from_walkers,
                             signal_power, static_scatterer, synthesize, walker_state)


def walker(**kw):
    base = dict(azimuth_deg=80.0, initial_range_m=1.5, radial_speed_mps=-0.5, gait_hz=1.0,
                torso_rcs=1.0, limb_rcs=0.4, limb_sway_mps=0.12, phase_seed=3)
    base.update(kw)
    return WalkerSpec(**base)


def test_default_params_match_full_scale_grid():
    p = RadarParams()
    assert (p.samples_per_pri, p.num_pri, p.num_rx) == (512, 12000, 4)
    assert p.num_samples == 6_144_000
    assert p.duration_s == pytest.approx(12.0)
    assert p.max_unambiguous_speed_mps == pytest.approx(0.9734, abs=1e-4)
    assert p.range_bin_m == pytest.approx(0.03, abs=1e-4)


@pytest.mark.parametrize("kw", [dict(samples_per_pri=500), dict(pri_s=0.0), dict(num_rx=0),
                                dict(noise_variance=-1.0)])
def test_radar_params_invariants(kw):
    with pytest.raises(ConfigurationError):
        RadarParams(**kw)


def test_torso_starts_at_initial_range():
    states = walker_state(walker(limb_sway_mps=0.0), 0.0, duration_s=4.0)
    assert states[0][0] == 1.5
    assert len(states) == 3


def test_constant_velocity_without_sway_or_bob():
    w = walker(limb_sway_mps=0.0, torso_bob_mps=0.0)
    for t in (0.0, 0.37, 1.0, 3.9):
        r, v, _ = walker_state(w, t)[0]
        assert r == 1.5 + (-0.5) * t
        assert v == -0.5


def test_walker_state_window():
    with pytest.raises(DomainError):
        walker_state(walker(), -0.1)
    with pytest.raises(DomainError):
        walker_state(walker(), 5.0, duration_s=4.0)


@given(st.floats(0, 10), st.floats(0, 0.3), st.floats(0.5, 3.0), st.integers(0, 2**32))
def test_limb_velocity_bounded_around_torso(t, sway, gait, seed):
    w = walker(limb_sway_mps=sway, gait_hz=gait, phase_seed=seed)
    _, v, _ = scatterer_tracks(w, [t])
    assert np.all(np.abs(v[1:] - v[0]) <= sway + 1e-12)


def test_velocity_integrates_to_range():
    w = walker()
    t = np.linspace(0, 4, 40001)
    r, v, _ = scatterer_tracks(w, t)
    # trapezoid integral of velocity reproduces range
    integral = np.concatenate([np.zeros((3, 1)), np.cumsum(0.5 * (v[:, 1:] + v[:, :-1]) * np.diff(t), axis=1)], axis=1)
    np.testing.assert_allclose(r - r[:, :1], integral, atol=1e-6)


def test_empty_noiseless_scene_is_zero(small_radar):
    cube = synthesize(scene_from_walkers(small_radar, []), small_radar)
    assert cube.data.shape == (64 * 512, 4)
    assert not np.any(cube.data)


def test_static_scatterer_channel_ratios_follow_steering(small_radar):
    cube = synthesize(scene_from_walkers(small_radar, [static_scatterer(60.0, 2.0)]), small_radar)
    a = steering_vector(small_radar.geometry, 60.0).elements
    ratio = cube.data / cube.data[:, :1]
    np.testing.assert_allclose(ratio, np.broadcast_to(a, ratio.shape), atol=1e-9)


def test_noise_variance_per_channel():
    params = RadarParams(adc_rate_sps=64e3, samples_per_pri=64, num_pri=1024, noise_variance=1.0)
    cube = synthesize(scene_from_walkers(params, [], noise_seed=11), params)
    var = np.mean(np.abs(cube.data) ** 2, axis=0)
    # standard error of the estimator is 1/sqrt(65536) ~ 0.4%, so 5% is > 10 sigma
    np.testing.assert_allclose(var, 1.0, rtol=0.05)
    assert abs(np.mean(cube.data)) < 0.02


def test_superposition(small_radar):
    a, b = walker(azimuth_deg=75.0), walker(azimuth_deg=105.0, initial_range_m=1.0, radial_speed_mps=0.6, phase_seed=9)
    both = synthesize(scene_from_walkers(small_radar, [a, b]), small_radar).data
    sum_ = (synthesize(scene_from_walkers(small_radar, [a]), small_radar).data
            + synthesize(scene_from_walkers(small_radar, [b]), small_radar).data)
    assert np.linalg.norm(both - sum_) <= 1e-9 * np.linalg.norm(sum_)


def test_energy_scaling(small_radar):
    w = walker()
    w2 = dataclasses.replace(w, torso_rcs=2 * w.torso_rcs, limb_rcs=2 * w.limb_rcs)
    e1 = np.sum(np.abs(synthesize(scene_from_walkers(small_radar, [w]), small_radar).data) ** 2)
    e2 = np.sum(np.abs(synthesize(scene_from_walkers(small_radar, [w2]), small_radar).data) ** 2)
    assert e2 == pytest.approx(4 * e1, rel=1e-12)


def test_determinism():
    params = RadarParams(adc_rate_sps=64e3, samples_per_pri=64, num_pri=256, noise_variance=0.3)
    scene = scene_from_walkers(params, [walker()], noise_seed=5)
    np.testing.assert_array_equal(synthesize(scene, params).data, synthesize(scene, params).data)


def test_doppler_ambiguity_rejected(small_radar):
    with pytest.raises(ConfigurationError, match="ambiguous"):
        synthesize(scene_from_walkers(small_radar, [walker(radial_speed_mps=-0.9)]), small_radar)


def test_negative_range_rejected(small_radar):
    with pytest.raises(ConfigurationError, match="non-positive"):
        synthesize(scene_from_walkers(small_radar, [walker(initial_range_m=0.1)]), small_radar)


def test_duration_must_match_grid(small_radar):
    scene = SceneSpec(walkers=(walker(),), duration_s=3.0)
    with pytest.raises(ConfigurationError, match="duration"):
        synthesize(scene, small_radar)


def test_label_direction_consistency():
    approach, recede = walker(radial_speed_mps=-0.5), walker(radial_speed_mps=0.5)
    SceneSpec(walkers=(approach, recede), class_label=1)
    SceneSpec(walkers=(recede, approach), class_label=2)
    with pytest.raises(ConfigurationError):
        SceneSpec(walkers=(recede, approach), class_label=1)


def test_signal_power():
    scene = SceneSpec(walkers=(walker(), walker(torso_rcs=2.0, limb_rcs=0.0)))
    assert signal_power(scene) == pytest.approx(1 + 2 * 0.16 + 4)


def test_example_seeds_are_deterministic_and_distinct():
    s = example_seeds(42, 100)
    assert s == example_seeds(42, 100)
    assert len(set(s)) == 100
    assert s != example_seeds(43, 100)
    assert all(0 <= x < 2**63 for x in s)


def test_plan_counts_and_labels(small_radar):
    cfg = DatasetConfig(class_counts=(60, 60), near_range_m=(1.0, 1.2), far_range_m=(2.0, 2.2))
    plan = dataset_plan(cfg, small_radar)
    assert len(plan) == 120
    assert [p.label for p in plan].count(1) == 60
    assert [p.label for p in plan].count(2) == 60


def test_single_class1_example_has_approaching_first_walker(small_radar):
    cfg = DatasetConfig(class_counts=(1, 0), near_range_m=(1.0, 1.2), far_range_m=(2.0, 2.2))
    (plan,) = dataset_plan(cfg, small_radar)
    first, second = plan.scene.walkers
    assert plan.label == 1
    assert first.azimuth_deg == 75.0 and first.radial_speed_mps < 0
    assert second.azimuth_deg == 105.0 and second.radial_speed_mps > 0
    (cube,) = make_dataset(cfg, small_radar)
    assert cube.label == 1


def test_class2_reverses_directions(small_radar):
    cfg = DatasetConfig(class_counts=(0, 3), near_range_m=(1.0, 1.2), far_range_m=(2.0, 2.2))
    for plan in dataset_plan(cfg, small_radar):
        assert plan.scene.walkers[0].radial_speed_mps > 0 > plan.scene.walkers[1].radial_speed_mps


def test_dataset_bit_identical_for_same_seed(small_radar):
    params = dataclasses.replace(small_radar, noise_variance=0.2)
    cfg = DatasetConfig(class_counts=(2, 2), near_range_m=(1.0, 1.2), far_range_m=(2.0, 2.2), master_seed=7)
    first, second = make_dataset(cfg, params), make_dataset(cfg, params)
    for a, b in zip(first, second):
        assert a.data.tobytes() == b.data.tobytes()


def test_zero_examples_rejected(small_radar):
    with pytest.raises(DomainError):
        dataset_plan(DatasetConfig(class_counts=(0, 0)), small_radar)


def test_jitter_within_ranges(small_radar):
    cfg = DatasetConfig(class_counts=(10, 10), near_range_m=(1.0, 1.2), far_range_m=(2.0, 2.2))
    for plan in dataset_plan(cfg, small_radar):
        for w in plan.scene.walkers:
            assert 0.4 <= abs(w.radial_speed_mps) <= 0.8
            assert 0.8 <= w.gait_hz <= 1.2
            lo, hi = (2.0, 2.2) if w.radial_speed_mps < 0 else (1.0, 1.2)
            assert lo <= w.initial_range_m <= hi
