import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beambandits import (
    ChannelParams,
    DegenerateGaps,
    InvalidProfile,
    build_los_instance,
    build_lower_bound_family,
    extract_gaps,
    lower_bound_value,
    phase_count_real,
    ub3_error_upper_bound,
)
from beambandits.bounds import lower_bound_budget_ok
from beambandits.channel import is_unimodal


def test_extract_gaps_example():
    profile = extract_gaps(np.array([0.1, 0.3, 0.6, 0.4]))
    assert np.allclose(profile.per_pair_gaps, [0.2, 0.3, 0.2])
    assert profile.min_gap == pytest.approx(0.2)


def test_extract_gaps_degenerate():
    with pytest.raises(DegenerateGaps):
        extract_gaps(np.array([0.5, 0.5]))


def test_extract_gaps_from_los_instance():
    params = ChannelParams(num_beams=16, distance_m=20.0, spatial_angle=0.03)
    instance = build_los_instance(params, seed=0)
    profile = extract_gaps(instance)
    assert profile.min_gap > 0
    assert profile.per_pair_gaps.size == 15


def test_upper_bound_known_value():
    # 50-digit evaluation of the four-term bound at T1=1000, K=16, gap 0.1
    value = ub3_error_upper_bound(1000, 16, 0.1)
    assert value == pytest.approx(3.6563629460716273, rel=1e-12)


def test_upper_bound_formula_direct():
    # recompute from the displayed formula with a real-valued phase count
    T1, K, D = 2000, 32, 0.07
    L = phase_count_real(K)
    t = T1 * D * D
    direct = (
        2 * math.exp(-t / 18)
        + 2 * math.exp(-t * K / 32)
        + 2 * math.exp(-t * K / 72)
        + 2 * (L - 2) * math.exp(-t / 16)
    )
    assert ub3_error_upper_bound(T1, K, D) == pytest.approx(direct, rel=1e-14)


def test_upper_bound_integer_phase_variant():
    T1, K, D = 1000, 16, 0.1
    t = T1 * D * D
    direct = (
        2 * math.exp(-t / 18)
        + 2 * math.exp(-t * K / 32)
        + 2 * math.exp(-t * K / 72)
        + 2 * 3 * math.exp(-t / 16)  # ceil phase count is 5
    )
    assert ub3_error_upper_bound(T1, K, D, integer_phases=True) == pytest.approx(direct)


def test_upper_bound_reward_range_normalization():
    assert ub3_error_upper_bound(1000, 16, 0.2, reward_range=2.0) == pytest.approx(
        ub3_error_upper_bound(1000, 16, 0.1), rel=1e-14
    )


def test_upper_bound_vanishes_for_large_gap():
    assert ub3_error_upper_bound(1000, 16, 50.0) < 1e-10


def test_upper_bound_decreasing_in_budget():
    values = [ub3_error_upper_bound(t1, 16, 0.1) for t1 in range(100, 5000, 100)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_upper_bound_k_growth_at_most_logarithmic():
    # the K-dependent terms shrink with K; only the phase-count factor grows,
    # and that factor is affine in log2(K)
    base = ub3_error_upper_bound(1000, 16, 0.1)
    for K in (32, 64, 128):
        ratio = ub3_error_upper_bound(1000, K, 0.1) / base
        cap = (phase_count_real(K) - 2) / (phase_count_real(16) - 2)
        assert ratio <= cap + 1e-9


def test_upper_bound_validation():
    with pytest.raises(ValueError):
        ub3_error_upper_bound(0, 16, 0.1)
    with pytest.raises(ValueError):
        ub3_error_upper_bound(100, 3, 0.1)
    with pytest.raises(ValueError):
        ub3_error_upper_bound(100, 16, 0.0)


K5_PROFILE = [0.30, 0.40, 0.50, 0.45, 0.35]


def test_family_example_k5():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    assert family.flip_arms == (2, 3, 4)
    assert np.allclose(family.gaps_to_peak(), [0.20, 0.10, 0.0, 0.05, 0.15])
    flipped = family.flipped_means(2)
    assert flipped[1] == pytest.approx(0.60)
    assert np.allclose(family.flipped_means(3), K5_PROFILE)  # peak flip is a no-op
    assert family.complexity(2) == pytest.approx(1 / 0.30**2 + 1 / 0.10**2)
    assert family.complexity(2) == pytest.approx(111.111111, rel=1e-6)


def test_family_rejects_outside_flips():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    for bad in (1, 5):
        with pytest.raises(InvalidProfile):
            family.flipped_means(bad)


def test_family_instances_unimodal():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    instances = family.instances()
    assert len(instances) == 4
    for key, inst in instances.items():
        if key != 3:  # the peak flip reproduces the base's tied shape
            assert is_unimodal(inst.means())


def test_family_validation():
    with pytest.raises(InvalidProfile):
        build_lower_bound_family(5, 3, [0.1, 0.4, 0.5, 0.45, 0.35])  # below 1/4
    with pytest.raises(InvalidProfile):
        build_lower_bound_family(5, 3, [0.30, 0.40, 0.49, 0.45, 0.35])  # peak != 1/2
    with pytest.raises(InvalidProfile):
        build_lower_bound_family(5, 3, [0.40, 0.30, 0.50, 0.45, 0.35])  # not unimodal
    with pytest.raises(InvalidProfile):
        build_lower_bound_family(5, 1, [0.50, 0.45, 0.40, 0.35, 0.30])  # edge peak
    with pytest.raises(InvalidProfile):
        build_lower_bound_family(4, 3, K5_PROFILE)  # length mismatch


def test_neighborhood_weight_example():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    d = family.gaps_to_peak()
    expected = sum(
        1.0 / (d[i - 1] ** 2 * family.complexity(i)) for i in (2, 4)
    )
    assert family.neighborhood_weight() == pytest.approx(expected)
    assert family.neighborhood_weight() >= 8.0 / 5.0


def _random_profile(rng):
    K = int(rng.integers(5, 17))
    k_star = int(rng.integers(2, K))
    drops = rng.uniform(0.0, 0.25 / max(k_star - 1, K - k_star, 1), size=K)
    p = np.empty(K)
    p[k_star - 1] = 0.5
    for i in range(k_star - 2, -1, -1):
        p[i] = max(p[i + 1] - drops[i], 0.25)
    for i in range(k_star, K):
        p[i] = max(p[i - 1] - drops[i], 0.25)
    return K, k_star, p


def test_neighborhood_weight_floor_random_profiles():
    rng = np.random.default_rng(88)
    for _ in range(300):
        K, k_star, p = _random_profile(rng)
        family = build_lower_bound_family(K, k_star, p)
        if np.any(family.gaps_to_peak()[np.arange(K) != k_star - 1] == 0.0):
            continue  # flat shoulders make the weight infinite, trivially above the floor
        assert family.neighborhood_weight() >= 8.0 / 5.0 - 1e-12


def test_lower_bound_value_closed_form():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    t1 = 100
    expected = max(
        math.exp(-75.0 * t1 / family.complexity(i)) / 6.0 for i in (2, 4)
    )
    assert lower_bound_value(family, t1, "neighborhood") == pytest.approx(expected)
    penalty = 2.0 * math.sqrt(t1 * math.log(18.0 * t1))
    expected_peak = math.exp(-60.0 * t1 / family.complexity(3) - penalty) / 6.0
    assert lower_bound_value(family, t1, "peak") == pytest.approx(expected_peak)
    hbar = family.neighborhood_weight()
    expected_weighted = max(
        math.exp(-60.0 * t1 / (hbar * family.complexity(i)) - penalty) / 6.0
        for i in (2, 4)
    )
    assert lower_bound_value(family, t1, "weighted") == pytest.approx(expected_weighted)


def test_lower_bound_value_decreasing_and_bounded():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    values = [lower_bound_value(family, t1, "neighborhood") for t1 in (50, 200, 800, 3200)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 / 6.0 for v in values)


def test_lower_bound_variant_validation():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    with pytest.raises(ValueError):
        lower_bound_value(family, 100, "nope")
    with pytest.raises(ValueError):
        lower_bound_value(family, 0, "neighborhood")


def test_budget_feasibility_check_runs():
    family = build_lower_bound_family(5, 3, K5_PROFILE)
    assert lower_bound_budget_ok(family, 10_000_000) is True
    assert lower_bound_budget_ok(family, 10) is False
