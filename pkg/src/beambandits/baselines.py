"""Comparison policies: Sequential Halving and discrete-arm Line Search Elimination."""

from __future__ import annotations

import math

import numpy as np

from .core import BudgetTooSmall, Environment, PolicyRun, split_evenly
from .ub3 import KTooSmall, phase_count, run_interval_elimination, worst_case_survivors


class SequentialHalving:
    """Structure-free pure exploration: halve the candidate set each round.

    Runs ceil(log2 K) rounds.  Each round samples every surviving arm
    floor(budget / (|surviving| * rounds)) times and keeps the top half
    (ceiling) by that round's empirical means, ties to the lowest index.
    Leftover slots from the floor division are discarded, the standard
    accounting for this scheme, so ``samples_used`` can fall short of the
    budget but never exceeds it.
    """

    name = "seqhalv"

    def min_budget(self, arm_count: int) -> int:
        # Every arm needs at least one sample in the first (widest) round.
        if arm_count < 2:
            raise KTooSmall("need at least 2 arms")
        return arm_count * math.ceil(math.log2(arm_count))

    def solve(
        self,
        env: Environment,
        budget: int,
        rng: np.random.Generator,
        record_trace: bool = False,
    ) -> PolicyRun:
        K = env.arm_count
        if budget < self.min_budget(K):
            raise BudgetTooSmall(
                f"budget {budget} below feasibility threshold {self.min_budget(K)} for K={K}"
            )
        rounds = math.ceil(math.log2(K))
        surviving = list(range(1, K + 1))
        counts: dict[int, int] = {}
        trace: list[tuple[int, int, float]] | None = [] if record_trace else None
        slot = 0
        for _ in range(rounds):
            per_arm = budget // (len(surviving) * rounds)
            means = []
            for arm in surviving:
                block = env.sample_block(arm, per_arm, rng)
                counts[arm] = counts.get(arm, 0) + per_arm
                if trace is not None:
                    for r in block:
                        slot += 1
                        trace.append((slot, arm, float(r)))
                else:
                    slot += per_arm
                means.append(float(block.mean()))
            keep = math.ceil(len(surviving) / 2)
            order = sorted(range(len(surviving)), key=lambda i: (-means[i], surviving[i]))
            surviving = sorted(surviving[i] for i in order[:keep])
        assert len(surviving) == 1
        return PolicyRun(
            output_arm=surviving[0],
            samples_used=slot,
            per_arm_counts=counts,
            trace=trace,
        )


class LineSearchElimination:
    """Interval elimination with a flat schedule: every phase gets the same budget.

    Window, probe-arm, and elimination mechanics are shared with
    :class:`~beambandits.ub3.UB3`; only the schedule differs.  Each of the
    ``L + 1`` phases receives floor(budget / (L + 1)) slots (elimination
    phases floored to a multiple of 4); leftover slots roll into the terminal
    phase so the full budget is consumed.
    """

    name = "lse"

    def min_budget(self, arm_count: int) -> int:
        # The per-phase base must cover 4 probe arms and, in the terminal
        # phase, the worst-case number of survivors (up to 5 for some K).
        if arm_count < 2:
            raise KTooSmall("need at least 2 arms")
        if arm_count <= 3:
            return arm_count
        per_phase = max(4, worst_case_survivors(arm_count))
        return per_phase * (phase_count(arm_count) + 1)

    def equal_schedule(self, budget: int, arm_count: int) -> tuple[int, ...]:
        num_phases = phase_count(arm_count)
        base = budget // (num_phases + 1)
        elim = [base // 4 * 4] * num_phases
        return tuple(elim + [budget - sum(elim)])

    def solve(
        self,
        env: Environment,
        budget: int,
        rng: np.random.Generator,
        record_trace: bool = False,
    ) -> PolicyRun:
        K = env.arm_count
        if budget < self.min_budget(K):
            raise BudgetTooSmall(
                f"budget {budget} below feasibility threshold {self.min_budget(K)} for K={K}"
            )
        if K <= 3:
            budgets: tuple[int, ...] = (budget,)
        else:
            budgets = self.equal_schedule(budget, K)
        return run_interval_elimination(env, budgets, rng, record_trace)
