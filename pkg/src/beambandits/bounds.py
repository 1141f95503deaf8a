"""Evaluators for the error-probability guarantees of interval elimination.

Upper bound: a four-term exponential bound on the misidentification
probability of :class:`~beambandits.ub3.UB3` driven by the minimum adjacent
gap of the mean profile.  Lower bounds: a family of Bernoulli instances built
by flipping one neighbor of the peak, whose complexity terms bound what any
fixed-budget strategy can achieve on unimodal profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance, bernoulli_instance
from .core import BanditError
from .ub3 import phase_count, phase_count_real


class DegenerateGaps(BanditError):
    """Adjacent arms with exactly equal means; the gap assumption fails."""


class InvalidProfile(BanditError):
    """Probability profile violates the lower-bound family constraints."""


@dataclass(frozen=True)
class GapProfile:
    """Absolute adjacent-mean gaps |mu_k - mu_{k-1}| and their minimum."""

    per_pair_gaps: np.ndarray
    min_gap: float


def extract_gaps(instance: ChannelInstance | np.ndarray) -> GapProfile:
    """Adjacent-gap profile of an instance or raw means vector.

    Raises :class:`DegenerateGaps` if any adjacent pair ties exactly.
    """
    means = instance.means() if isinstance(instance, ChannelInstance) else instance
    means = np.asarray(means, dtype=float)
    if means.size < 2:
        raise ValueError("need at least 2 arms")
    gaps = np.abs(np.diff(means))
    if np.any(gaps == 0.0):
        raise DegenerateGaps(f"tied adjacent means at index {int(np.argmin(gaps)) + 1}")
    return GapProfile(per_pair_gaps=gaps, min_gap=float(gaps.min()))


def ub3_error_upper_bound(
    budget: int,
    arm_count: int,
    min_gap: float,
    reward_range: float = 1.0,
    integer_phases: bool = False,
) -> float:
    """Upper bound on the probability that UB3 outputs a suboptimal arm.

    ``min_gap`` is divided by ``reward_range`` first: the concentration step
    behind the bound assumes rewards spanning a unit interval, so gaps from
    instances with another bounded range must be normalized by that range.
    The phase count enters as a real value by default; ``integer_phases``
    switches to the implemented ceiling schedule.  The middle-phase term is
    clamped at zero phases (the per-phase union is empty below three phases).
    May exceed 1, where the bound is vacuous but still valid.
    """
    if budget <= 0 or min_gap <= 0 or reward_range <= 0:
        raise ValueError("budget, min_gap, and reward_range must be positive")
    if arm_count < 4:
        raise ValueError("bound applies to 4 or more arms")
    d2 = (min_gap / reward_range) ** 2
    L = phase_count(arm_count) if integer_phases else phase_count_real(arm_count)
    t = budget * d2
    return (
        2.0 * math.exp(-t / 18.0)
        + 2.0 * math.exp(-t * arm_count / 32.0)
        + 2.0 * math.exp(-t * arm_count / 72.0)
        + 2.0 * max(L - 2.0, 0.0) * math.exp(-t / 16.0)
    )


@dataclass(frozen=True)
class LowerBoundFamily:
    """Bernoulli profile p (peak exactly 1/2) plus its three flipped variants.

    Flipping arm i replaces Ber(p_i) by Ber(1 - p_i).  Only flips of the peak
    or its immediate neighbors keep the profile unimodal, so the family
    consists of the base instance and those three flips; flipping the peak is
    distribution-preserving (1 - 1/2 = 1/2).
    """

    p: np.ndarray
    k_star: int

    @property
    def arm_count(self) -> int:
        return int(self.p.size)

    @property
    def flip_arms(self) -> tuple[int, int, int]:
        return (self.k_star - 1, self.k_star, self.k_star + 1)

    def gaps_to_peak(self) -> np.ndarray:
        """d_k = 1/2 - p_k for every arm."""
        return 0.5 - self.p

    def flipped_means(self, flip_arm: int) -> np.ndarray:
        if flip_arm not in self.flip_arms:
            raise InvalidProfile(
                f"flipping arm {flip_arm} leaves the unimodal family; "
                f"only {self.flip_arms} are allowed"
            )
        means = self.p.copy()
        means[flip_arm - 1] = 1.0 - means[flip_arm - 1]
        return means

    def instances(self) -> dict[int | None, ChannelInstance]:
        """Base instance (key ``None``) plus the three flipped instances."""
        out: dict[int | None, ChannelInstance] = {None: bernoulli_instance(self.p)}
        for i in self.flip_arms:
            out[i] = bernoulli_instance(self.flipped_means(i))
        return out

    def complexity(self, arm: int) -> float:
        """H-bar at ``arm``: sum over its in-range neighbors k of 1/(d_arm + d_k)^2."""
        d = self.gaps_to_peak()
        total = 0.0
        for k in (arm - 1, arm + 1):
            if 1 <= k <= self.arm_count:
                total += 1.0 / float(d[arm - 1] + d[k - 1]) ** 2
        return total

    def neighborhood_weight(self) -> float:
        """h-bar: sum over the peak's neighbors i of 1/(d_i^2 * H-bar(i)); always >= 8/5."""
        d = self.gaps_to_peak()
        return sum(
            1.0 / (float(d[i - 1]) ** 2 * self.complexity(i))
            for i in (self.k_star - 1, self.k_star + 1)
        )


def build_lower_bound_family(arm_count: int, k_star: int, p) -> LowerBoundFamily:
    """Validate a probability profile and wrap it as a lower-bound family.

    Requirements: all p in [1/4, 1/2], p_{k*} exactly 1/2, nondecreasing up to
    the peak and nonincreasing after it, and an interior peak so both
    neighbors exist.
    """
    p = np.asarray(p, dtype=float)
    if p.size != arm_count:
        raise InvalidProfile(f"profile length {p.size} != arm_count {arm_count}")
    if not 2 <= k_star <= arm_count - 1:
        raise InvalidProfile("peak must be interior so both neighbors exist")
    if p.min() < 0.25 or p.max() > 0.5:
        raise InvalidProfile("profile values must lie in [1/4, 1/2]")
    if p[k_star - 1] != 0.5:
        raise InvalidProfile("peak probability must be exactly 1/2")
    diffs = np.diff(p)
    if np.any(diffs[: k_star - 1] < 0) or np.any(diffs[k_star - 1 :] > 0):
        raise InvalidProfile("profile must be nondecreasing then nonincreasing")
    return LowerBoundFamily(p=p, k_star=k_star)


LOWER_BOUND_VARIANTS = ("peak", "weighted", "neighborhood")


def lower_bound_value(family: LowerBoundFamily, budget: int, variant: str = "neighborhood") -> float:
    """Lower bound on the worst-case misidentification probability over the family.

    ``peak``: exponent driven by the complexity at the peak, with a
    finite-budget penalty term.  ``weighted``: complexity at a flipped
    neighbor scaled by the neighborhood weight, same penalty, best neighbor.
    ``neighborhood``: the asymptotic form driven by the flipped neighbor's
    complexity alone, best neighbor.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    if variant not in LOWER_BOUND_VARIANTS:
        raise ValueError(f"variant must be one of {LOWER_BOUND_VARIANTS}")
    t = float(budget)
    neighbors = (family.k_star - 1, family.k_star + 1)
    if variant == "peak":
        h_peak = family.complexity(family.k_star)
        return math.exp(-60.0 * t / h_peak - 2.0 * math.sqrt(t * math.log(18.0 * t))) / 6.0
    if variant == "weighted":
        hbar = family.neighborhood_weight()
        return max(
            math.exp(
                -60.0 * t / (hbar * family.complexity(i))
                - 2.0 * math.sqrt(t * math.log(18.0 * t))
            )
            / 6.0
            for i in neighbors
        )
    return max(math.exp(-75.0 * t / family.complexity(i)) / 6.0 for i in neighbors)


def lower_bound_budget_ok(family: LowerBoundFamily, budget: int) -> bool:
    """Feasibility condition under which the asymptotic lower bounds apply.

    Implemented verbatim with the squared complexity maximum; the square makes
    the threshold extremely conservative, so treat a ``False`` here as advice
    rather than a hard gate.
    """
    t = float(budget)
    h_peak = family.complexity(family.k_star)
    hbar = family.neighborhood_weight()
    worst = max(
        [h_peak] + [hbar * family.complexity(i) for i in (family.k_star - 1, family.k_star + 1)]
    )
    return t >= worst**2 * 4.0 * math.log(6.0 * t * family.arm_count) / 3600.0
