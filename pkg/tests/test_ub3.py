import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beambandits import (
    UB3,
    ArmWindow,
    KTooSmall,
    Quadruple,
    WindowTooSmall,
    bernoulli_instance,
    build_schedule,
    eliminate,
    exact_instance,
    phase_count,
    phase_count_real,
    phase_shares,
    seeded_stream,
    select_quadruple,
)
from beambandits.ub3 import min_budget, run_interval_elimination, worst_case_survivors

from reference import reference_ub3


def test_phase_count_16():
    assert phase_count_real(16) == pytest.approx(4.1285338740543643)
    assert phase_count(16) == 5


def test_schedule_900_16():
    sched = build_schedule(900, 16)
    assert sched.budgets == (88, 88, 88, 132, 200, 304)
    assert sched.total == 900
    assert sched.remainder == 4
    assert sched.num_elimination_phases == 5


def test_schedule_exact_three_phase_split():
    # with three elimination phases the shares of 81 slots are the exact
    # integers 18, 18, 18, 27 and no slot is left over
    shares = phase_shares(3)
    assert [s * 81 for s in shares] == [18, 18, 18, 27]
    assert sum(shares) == 1


def test_terminal_share_is_one_third():
    for L in range(2, 14):
        assert phase_shares(L)[-1] == Fraction(1, 3)
    # a single elimination phase splits the budget in half instead
    assert phase_shares(1) == [Fraction(1, 2), Fraction(1, 2)]


def test_share_identity_in_floats():
    for L in range(1, 21):
        assert abs(float(sum(phase_shares(L))) - 1.0) < 1e-12


def test_first_two_shares_equal():
    for L in range(1, 14):
        shares = phase_shares(L)
        assert shares[0] == shares[1]


def test_schedule_rejects():
    with pytest.raises(KTooSmall):
        build_schedule(100, 3)
    from beambandits import BudgetTooSmall

    with pytest.raises(BudgetTooSmall):
        build_schedule(min_budget(16) - 1, 16)


@given(K=st.integers(4, 256), extra=st.integers(0, 3000))
def test_schedule_properties(K, extra):
    budget = min_budget(K) + extra
    sched = build_schedule(budget, K)
    assert sum(sched.budgets) == budget
    assert len(sched.budgets) == phase_count(K) + 1
    for nl in sched.budgets[:-1]:
        assert nl >= 4 and nl % 4 == 0
    assert sched.budgets[-1] >= 3


def test_quadruple_examples():
    assert select_quadruple(ArmWindow(1, 16)) == Quadruple(1, 6, 10, 16)
    assert select_quadruple(ArmWindow(6, 16)) == Quadruple(6, 9, 12, 16)
    assert select_quadruple(ArmWindow(1, 4)) == Quadruple(1, 2, 2, 4)


def test_quadruple_window_too_small():
    with pytest.raises(WindowTooSmall):
        select_quadruple(ArmWindow(5, 7))


def test_eliminate_examples():
    w = ArmWindow(1, 16)
    q = select_quadruple(w)
    assert eliminate(w, q, 6) == ArmWindow(1, 10)
    assert eliminate(w, q, 16) == ArmWindow(6, 16)
    assert eliminate(w, q, 10) == ArmWindow(6, 16)
    # arm 8 sits between kA and kB and survives every branch
    for winner in (1, 6, 10, 16):
        survived = eliminate(w, q, winner)
        assert survived.lo <= 8 <= survived.hi


def test_eliminate_coincident_middle_probe_shrinks_right():
    # in a 4-arm window the unprobed third arm may be the peak; a win at the
    # coincident middle probe must keep it
    w = ArmWindow(1, 4)
    q = select_quadruple(w)
    assert q.kA == q.kB == 2
    assert eliminate(w, q, 2) == ArmWindow(2, 4)
    assert eliminate(w, q, 1) == ArmWindow(1, 2)
    assert eliminate(w, q, 4) == ArmWindow(2, 4)


def test_eliminate_rejects_non_member():
    w = ArmWindow(1, 16)
    q = select_quadruple(w)
    with pytest.raises(ValueError):
        eliminate(w, q, 7)


@given(lo=st.integers(1, 100), j=st.integers(4, 200), branch=st.booleans())
def test_window_shrink_bounds(lo, j, branch):
    w = ArmWindow(lo, lo + j - 1)
    q = select_quadruple(w)
    winner = q.kM if branch else q.kN
    new = eliminate(w, q, winner)
    removed = w.size - new.size
    assert math.ceil(j / 3) - 1 <= removed <= math.ceil(j / 3)
    # survivor containment: [kA, kB] transfers whole
    assert new.lo <= q.kA and q.kB <= new.hi


def test_worst_case_survivors_bounded():
    assert all(worst_case_survivors(K) <= 5 for K in range(4, 600))
    assert worst_case_survivors(15) == 5


def test_solve_zero_noise_k16():
    means = [1.0 - 0.4 * abs(k - 7) / 16 for k in range(1, 17)]
    run = UB3().solve(exact_instance(means), 200, seeded_stream(0, 0))
    assert run.output_arm == 7
    assert run.samples_used == 200


def test_solve_tiny_arm_counts():
    for K in (2, 3):
        means = [0.4 + 0.1 * k for k in range(K)]
        run = UB3().solve(exact_instance(means), 30, seeded_stream(0, 0))
        assert run.output_arm == K
        assert run.samples_used == 30


def test_min_budget_values():
    assert min_budget(4) == 8
    assert min_budget(16) == 41
    assert min_budget(64) == 137
    assert min_budget(128) == 308


def test_safe_elimination_zero_noise():
    # exact comparisons never evict the peak, any K, any peak position
    for K in range(4, 25):
        for peak in range(1, K + 1):
            means = [1.0 - 0.5 * abs(k - peak) / K for k in range(1, K + 1)]
            env = exact_instance(means)
            run = UB3().solve(env, min_budget(K), seeded_stream(0, 0))
            assert run.output_arm == peak, (K, peak, run.output_arm)


@settings(max_examples=30)
@given(trial=st.integers(0, 10_000))
def test_matches_reference_trial_for_trial(trial):
    env = bernoulli_instance([0.30, 0.35, 0.40, 0.45, 0.38, 0.33])
    run = UB3().solve(env, 600, seeded_stream(600, trial))
    expected = reference_ub3(env, 600, seeded_stream(600, trial))
    assert run.output_arm == expected


def test_matches_reference_many_shapes():
    for K, budget in ((4, 8), (5, 40), (7, 50), (16, 900), (23, 555), (64, 1000)):
        rng_means = np.random.default_rng(K * budget)
        peak = int(rng_means.integers(1, K + 1))
        means = np.clip(0.8 - 0.4 * np.abs(np.arange(1, K + 1) - peak) / K, 0.05, 0.95)
        env = bernoulli_instance(means)
        for trial in range(25):
            run = UB3().solve(env, budget, seeded_stream(budget, trial))
            expected = reference_ub3(env, budget, seeded_stream(budget, trial))
            assert run.output_arm == expected, (K, budget, trial)


def test_engine_rolls_unused_budget_into_terminal_phase():
    # a window that collapses early must still consume the whole budget
    means = [1.0, 0.9, 0.2, 0.1]  # first probe win shrinks [1,4] to [1,2]
    env = exact_instance(means)
    run = run_interval_elimination(env, (8, 8, 9), seeded_stream(0, 0))
    assert run.samples_used == 25
    assert run.output_arm == 1
