"""UB3 (Unimodal Bandit for Best Beam): fixed-budget interval elimination.

The policy spends its budget in ``L + 1`` phases.  During each of the first
``L`` phases it samples four probe arms of the current contiguous window (the
two endpoints and two interior arms at one-third and two-thirds), then discards
the third of the window on the far side of the winning probe.  Unimodality of
the mean profile guarantees the discarded third cannot contain the best arm
when comparisons are exact.  The final phase splits its budget evenly over the
few surviving arms and returns the empirical argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    BudgetTooSmall,
    Environment,
    KTooSmall,
    PolicyRun,
    WindowTooSmall,
    argmax_lowest,
    split_evenly,
)


def phase_count_real(arm_count: int) -> float:
    """Number of elimination phases as a real value, log2(K/3) / log2(3/2)."""
    if arm_count < 1:
        raise KTooSmall("arm_count must be positive")
    return math.log2(arm_count / 3) / math.log2(1.5)


def phase_count(arm_count: int) -> int:
    """Integer elimination-phase count: the ceiling of :func:`phase_count_real`.

    The ceiling guarantees at most a handful of arms (never more than five)
    survive into the terminal phase for every K; any slack is absorbed by
    transferring unused phase budget to the terminal phase.
    """
    return math.ceil(phase_count_real(arm_count))


def worst_case_survivors(arm_count: int) -> int:
    """Largest window size that can enter the terminal phase for this K.

    A shrink keeps either floor(2j/3) or j - ceil(j/3) + 1 arms; iterating
    both choices over the ceiling phase count bounds every elimination path.
    The result is 3 for most K but reaches 5 for some (the terminal phase must
    be able to give each survivor at least one sample).
    """
    sizes = {arm_count}
    for _ in range(phase_count(arm_count)):
        nxt = set()
        for j in sizes:
            if j <= 3:
                nxt.add(j)
            else:
                nxt.add((2 * j) // 3)
                nxt.add(j - math.ceil(j / 3) + 1)
        sizes = nxt
    return max(sizes)


def phase_shares(num_phases: int) -> list[Fraction]:
    """Exact budget fractions per phase for a given elimination-phase count L.

    Shares are ``2^(L-2) / 3^(L-1)`` for the first two phases and
    ``2^(L-(l-1)) / 3^(L-(l-2))`` for phases ``l = 3 .. L+1``; they sum to 1
    exactly.  After the first two phases each share grows by a factor 3/2, so
    later phases, which compare closer means, get more samples.
    """
    if num_phases < 1:
        raise ValueError("num_phases must be >= 1")
    L = num_phases
    first = Fraction(2) ** (L - 2) / Fraction(3) ** (L - 1)
    shares = [first, first]
    for l in range(3, L + 2):
        shares.append(Fraction(2) ** (L - (l - 1)) / Fraction(3) ** (L - (l - 2)))
    return shares


@dataclass(frozen=True)
class PhaseSchedule:
    """Integer per-phase sample budgets derived from (budget, arm_count).

    ``budgets[l]`` for ``l < L`` is the floored-to-multiple-of-4 share of
    elimination phase ``l + 1``; ``budgets[-1]`` is the terminal-phase share
    floored to a multiple of 3 plus every leftover slot (``remainder``), so
    ``sum(budgets) == total`` exactly.
    """

    budgets: tuple[int, ...]
    total: int
    remainder: int

    @property
    def num_elimination_phases(self) -> int:
        return len(self.budgets) - 1


def min_budget(arm_count: int) -> int:
    """Smallest budget for which every elimination phase keeps at least 4
    slots after rounding and the terminal phase keeps at least 3."""
    if arm_count < 2:
        raise KTooSmall("need at least 2 arms")
    if arm_count <= 3:
        return arm_count
    shares = phase_shares(phase_count(arm_count))
    need = max(Fraction(4) / min(shares[:-1]), Fraction(3) / shares[-1])
    return math.ceil(need)


def build_schedule(budget: int, arm_count: int) -> PhaseSchedule:
    """Phase budgets for ``arm_count`` arms under a total of ``budget`` slots.

    Raises :class:`KTooSmall` for fewer than 4 arms (elimination is bypassed
    entirely there) and :class:`BudgetTooSmall` below :func:`min_budget`.
    """
    if arm_count < 4:
        raise KTooSmall("interval elimination needs at least 4 arms")
    need = min_budget(arm_count)
    if budget < need:
        raise BudgetTooSmall(
            f"budget {budget} below feasibility threshold {need} for K={arm_count}"
        )
    shares = phase_shares(phase_count(arm_count))
    elim = [int(s * budget) // 4 * 4 for s in shares[:-1]]
    final = int(shares[-1] * budget) // 3 * 3
    remainder = budget - sum(elim) - final
    return PhaseSchedule(
        budgets=tuple(elim + [final + remainder]), total=budget, remainder=remainder
    )


@dataclass(frozen=True)
class ArmWindow:
    """Contiguous surviving-arm range [lo, hi], inclusive, 1-based."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    def arms(self) -> list[int]:
        return list(range(self.lo, self.hi + 1))


@dataclass(frozen=True)
class Quadruple:
    """Probe arms of one phase: window endpoints plus the one-third and
    two-thirds positions (ceil and floor respectively)."""

    kM: int
    kA: int
    kB: int
    kN: int

    def distinct(self) -> list[int]:
        """Probe arms without duplicates, ascending; kA == kB in 4-arm windows."""
        return sorted(set((self.kM, self.kA, self.kB, self.kN)))


def select_quadruple(window: ArmWindow) -> Quadruple:
    """Probe arms at window-relative positions 1, ceil(j/3), floor(2j/3), j."""
    j = window.size
    if j < 4:
        raise WindowTooSmall(f"window {window} has {j} < 4 arms")
    return Quadruple(
        kM=window.lo,
        kA=window.lo + math.ceil(j / 3) - 1,
        kB=window.lo + (2 * j) // 3 - 1,
        kN=window.hi,
    )


def eliminate(window: ArmWindow, quad: Quadruple, winner: int) -> ArmWindow:
    """Shrink the window away from the losing side of the winning probe arm.

    A win at kM or kA discards everything right of kB; a win at kB or kN
    discards everything left of kA.  Arms strictly between kA and kB survive
    either way.  The kB/kN branch is checked first: in a 4-arm window kA and
    kB coincide, and a win there must keep the right part, because the arm
    between kB and kN was never probed and can still be the peak, while kM
    was probed and lost.
    """
    if winner in (quad.kB, quad.kN):
        return ArmWindow(quad.kA, quad.kN)
    if winner in (quad.kM, quad.kA):
        return ArmWindow(quad.kM, quad.kB)
    raise ValueError(f"winner {winner} is not a member of {quad}")


def run_interval_elimination(
    env: Environment,
    phase_budgets: tuple[int, ...] | list[int],
    rng: np.random.Generator,
    record_trace: bool = False,
) -> PolicyRun:
    """Execute elimination phases under the given budgets, then the terminal phase.

    Every slot in ``phase_budgets`` is consumed.  Within a phase the budget is
    split as evenly as possible over the distinct probe arms (duplicate probes
    in 4-arm windows are sampled once).  If the window collapses to 3 or fewer
    arms before the elimination budgets run out, the unused budgets roll into
    the terminal phase.  Empirical means are per phase, never pooled across
    phases.
    """
    counts: dict[int, int] = {}
    trace: list[tuple[int, int, float]] | None = [] if record_trace else None
    slot = 0

    def draw(arm: int, n: int) -> float:
        nonlocal slot
        block = env.sample_block(arm, n, rng)
        counts[arm] = counts.get(arm, 0) + n
        if trace is not None:
            for r in block:
                slot += 1
                trace.append((slot, arm, float(r)))
        else:
            slot += n
        return float(block.mean())

    window = ArmWindow(1, env.arm_count)
    final_budget = phase_budgets[-1]
    for phase_idx, nl in enumerate(phase_budgets[:-1]):
        if window.size <= 3:
            final_budget += sum(phase_budgets[phase_idx:-1])
            break
        quad = select_quadruple(window)
        members = quad.distinct()
        means = [draw(arm, n) for arm, n in zip(members, split_evenly(nl, len(members)))]
        window = eliminate(window, quad, argmax_lowest(means, members))

    survivors = window.arms()
    final_means = [
        draw(arm, n) for arm, n in zip(survivors, split_evenly(final_budget, len(survivors)))
    ]
    return PolicyRun(
        output_arm=argmax_lowest(final_means, survivors),
        samples_used=slot,
        per_arm_counts=counts,
        trace=trace,
    )


class UB3:
    """Interval-elimination policy on the geometric phase schedule."""

    name = "ub3"

    def min_budget(self, arm_count: int) -> int:
        return min_budget(arm_count)

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
            # Too few arms for probe quadruples: the terminal phase already is
            # the mechanism for <=3 arms, so it gets the whole budget.
            budgets: tuple[int, ...] = (budget,)
        else:
            budgets = build_schedule(budget, K).budgets
        return run_interval_elimination(env, budgets, rng, record_trace)
