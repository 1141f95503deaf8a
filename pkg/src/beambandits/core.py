"""Shared abstractions: environments, policies, seeded streams, and the run loop.

Beams are identified by 1-based integer indices ``1..K`` (antenna-port style
numbering); vectors such as the per-beam mean array are plain numpy arrays in
which beam ``k`` lives at position ``k - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np


class BanditError(Exception):
    """Base class for feasibility and construction errors."""


class BudgetTooSmall(BanditError):
    """The sampling budget cannot feasibly run the policy; raise the budget or reduce K."""


class KTooSmall(BanditError):
    """The operation needs more arms than the instance provides."""


class WindowTooSmall(BanditError):
    """A quadruple was requested from a window with fewer than 4 arms."""


@runtime_checkable
class Environment(Protocol):
    """A frozen stochastic instance that policies can sample from.

    Draws from a given arm are i.i.d. across calls.  ``mean``/``means`` and
    ``optimal_arm`` are oracle accessors intended for tests and metrics, not
    for policies.
    """

    @property
    def arm_count(self) -> int: ...

    @property
    def bound_interval(self) -> tuple[float, float]: ...

    def sample_block(self, arm: int, n: int, rng: np.random.Generator) -> np.ndarray: ...

    def mean(self, arm: int) -> float: ...

    def means(self) -> np.ndarray: ...

    def optimal_arm(self) -> int: ...


@dataclass
class PolicyRun:
    """One completed execution of a policy on an environment.

    ``per_arm_counts`` holds only the arms that were sampled at least once and
    always sums to ``samples_used``.  ``trace`` is populated only when trace
    recording was requested: 1000-trial sweeps must not pay its memory cost.
    """

    output_arm: int
    samples_used: int
    per_arm_counts: dict[int, int] = field(default_factory=dict)
    trace: list[tuple[int, int, float]] | None = None


class Policy(Protocol):
    """Fixed-budget pure-exploration policy interface."""

    name: str

    def min_budget(self, arm_count: int) -> int: ...

    def solve(
        self,
        env: Environment,
        budget: int,
        rng: np.random.Generator,
        record_trace: bool = False,
    ) -> PolicyRun: ...


def seeded_stream(master_seed: int, trial_id: int) -> np.random.Generator:
    """Independent, reproducible random stream for one trial.

    Identical ``(master_seed, trial_id)`` pairs yield bit-identical streams;
    distinct trial ids yield statistically independent streams.
    """
    if master_seed < 0 or trial_id < 0:
        raise ValueError("master_seed and trial_id must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial_id]))


def run_policy(policy: Policy, env: Environment, budget: int, seed: int,
               record_trace: bool = False) -> PolicyRun:
    """Run ``policy`` on ``env`` with exactly ``budget`` sampling slots available.

    Deterministic given (policy configuration, environment instance, seed).
    Raises :class:`BudgetTooSmall` before sampling anything if the budget is
    below the policy's feasibility threshold.
    """
    K = env.arm_count
    if K < 2:
        raise KTooSmall(f"environment must have at least 2 arms, got {K}")
    need = policy.min_budget(K)
    if budget < need:
        raise BudgetTooSmall(
            f"{policy.name} needs at least {need} slots for {K} arms, got {budget}"
        )
    run = policy.solve(env, budget, seeded_stream(seed, 0), record_trace=record_trace)
    assert run.samples_used <= budget
    return run


def argmax_lowest(values: np.ndarray | list[float], arms: list[int]) -> int:
    """Arm with the highest value; ties broken by the lowest arm index."""
    values = np.asarray(values, dtype=float)
    best = int(np.flatnonzero(values == values.max())[0])
    return arms[best]


def split_evenly(total: int, parts: int) -> list[int]:
    """Split ``total`` slots over ``parts`` recipients as evenly as possible.

    Earlier recipients receive the remainder, so every slot is assigned and
    the split is deterministic.
    """
    if parts <= 0:
        raise ValueError("parts must be positive")
    if total < parts:
        raise ValueError(f"cannot give {parts} recipients at least one of {total} slots")
    base, extra = divmod(total, parts)
    return [base + 1 if i < extra else base for i in range(parts)]
