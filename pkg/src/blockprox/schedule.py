"""Activation plans (which blocks are updated at iteration n) and epoch accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import PlanViolation


def ceil_fraction(alpha: float, count: int) -> int:
    """ceil(alpha * count), robust to float noise such as 0.7 * 10 = 7.000000000000001."""
    return int(math.ceil(alpha * count - 1e-9))


def _check_alpha(alpha: float, what: str) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"{what} activation fraction must lie in (0, 1], got {alpha}")
    return alpha


class ActivationPlan:
    """Base class. ``next_blocks(n)`` returns sorted 0-based index arrays (I_n, K_n)."""

    deterministic = True

    def __init__(self, m: int, p: int):
        if m < 1 or p < 1:
            raise ValueError("plans need m >= 1 and p >= 1")
        self.m = int(m)
        self.p = int(p)

    def next_blocks(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def reseed(self, seed: int) -> "ActivationPlan":
        """Copy of the plan driven by ``seed`` (deterministic plans return self)."""
        return self

    def describe(self) -> str:
        return type(self).__name__


class FullActivation(ActivationPlan):
    def __init__(self, m: int, p: int):
        super().__init__(m, p)
        self._I = np.arange(self.m)
        self._K = np.arange(self.p)

    def next_blocks(self, n):
        return self._I, self._K

    def describe(self):
        return "full"


def _partial_fisher_yates(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    perm = np.arange(n)
    if k >= n:
        return perm
    # j_t uniform on {t, ..., n-1}
    u = rng.random(k)
    for t in range(k):
        j = t + int(u[t] * (n - t))
        perm[t], perm[j] = perm[j], perm[t]
    return np.sort(perm[:k])


class RandomSubset(ActivationPlan):
    """Uniformly random subsets of fixed sizes ceil(alpha_I m) and ceil(alpha_K p).

    Draws at iteration n come from a generator seeded with ``(seed, n)``, so
    they are identically distributed, independent across iterations and of
    any solver state, and reproducible regardless of call order.
    """

    deterministic = False

    def __init__(self, m: int, p: int, alpha_primal: float = 1.0, alpha_dual: float = 1.0, seed: int = 0):
        super().__init__(m, p)
        self.alpha_primal = _check_alpha(alpha_primal, "primal")
        self.alpha_dual = _check_alpha(alpha_dual, "dual")
        self.size_primal = ceil_fraction(self.alpha_primal, self.m)
        self.size_dual = ceil_fraction(self.alpha_dual, self.p)
        if self.size_primal < 1 or self.size_dual < 1:
            raise ValueError("activation fraction too small: block sets would be empty")
        self.seed = int(seed)
        self._all_I = np.arange(self.m)
        self._all_K = np.arange(self.p)

    def next_blocks(self, n):
        if n < 0:
            raise ValueError("iteration index must be nonnegative")
        rng = np.random.default_rng([self.seed, int(n)])
        I = self._all_I if self.size_primal == self.m else _partial_fisher_yates(rng, self.m, self.size_primal)
        K = self._all_K if self.size_dual == self.p else _partial_fisher_yates(rng, self.p, self.size_dual)
        return I, K

    def reseed(self, seed):
        return RandomSubset(self.m, self.p, self.alpha_primal, self.alpha_dual, seed)

    def describe(self):
        return f"random(alpha_I={self.alpha_primal:g}, alpha_K={self.alpha_dual:g}, seed={self.seed})"


class CyclicSweep(ActivationPlan):
    """Round-robin over contiguous slices of the primal and dual index sets.

    With s_I and s_K slices every window of max(s_I, s_K) consecutive
    iterations touches every block.
    """

    def __init__(self, m: int, p: int, slices_primal: int = 1, slices_dual: int = 1):
        super().__init__(m, p)
        if not (1 <= slices_primal <= self.m and 1 <= slices_dual <= self.p):
            raise ValueError("slice counts must lie between 1 and the number of blocks")
        self.slices_primal = int(slices_primal)
        self.slices_dual = int(slices_dual)
        self._I = np.array_split(np.arange(self.m), self.slices_primal)
        self._K = np.array_split(np.arange(self.p), self.slices_dual)

    @classmethod
    def from_fractions(cls, m: int, p: int, alpha_primal: float = 1.0, alpha_dual: float = 1.0) -> "CyclicSweep":
        """ceil(1/alpha) slices per side."""
        sI = min(m, ceil_fraction(1.0 / _check_alpha(alpha_primal, "primal"), 1))
        sK = min(p, ceil_fraction(1.0 / _check_alpha(alpha_dual, "dual"), 1))
        return cls(m, p, sI, sK)

    @property
    def window(self) -> int:
        """The sweeping constant T: every T + 1 consecutive iterations cover all blocks."""
        return max(self.slices_primal, self.slices_dual) - 1

    def next_blocks(self, n):
        if n < 0:
            raise ValueError("iteration index must be nonnegative")
        return self._I[n % self.slices_primal], self._K[n % self.slices_dual]

    def describe(self):
        return f"cyclic(slices_I={self.slices_primal}, slices_K={self.slices_dual})"


class FixedSequence(ActivationPlan):
    """Cycle through an explicit list of (I, K) pairs; mostly for tests."""

    def __init__(self, m: int, p: int, steps):
        super().__init__(m, p)
        self.steps = [(np.sort(np.asarray(I, dtype=np.intp)), np.sort(np.asarray(K, dtype=np.intp)))
                      for I, K in steps]
        if not self.steps:
            raise ValueError("need at least one step")

    def next_blocks(self, n):
        return self.steps[n % len(self.steps)]


def next_blocks(plan: ActivationPlan, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Blocks for iteration ``n``, checked for being nonempty and in range."""
    I, K = plan.next_blocks(n)
    if len(I) == 0 or len(K) == 0:
        raise PlanViolation(f"empty block set at iteration {n}")
    if I[0] < 0 or I[-1] >= plan.m or K[0] < 0 or K[-1] >= plan.p:
        raise PlanViolation(f"block index out of range at iteration {n}")
    return I, K


def verify_sweeping(plan: ActivationPlan, horizon: int, T: int) -> bool:
    """True iff every window of T + 1 consecutive iterations in [0, horizon) covers all blocks."""
    if T < 0:
        return False
    steps = [plan.next_blocks(n) for n in range(horizon)]
    if horizon < T + 1:
        return False
    for start in range(horizon - T):
        seen_I = np.zeros(plan.m, dtype=bool)
        seen_K = np.zeros(plan.p, dtype=bool)
        for I, K in steps[start:start + T + 1]:
            seen_I[I] = True
            seen_K[K] = True
        if not (seen_I.all() and seen_K.all()):
            return False
    return True


@dataclass
class EpochCounter:
    """Cumulative activated-block count divided by the number of blocks on one side."""

    denominator: int
    cumulative: int = 0

    def record(self, count: int) -> "EpochCounter":
        self.cumulative += int(count)
        return self

    @property
    def epochs(self) -> float:
        return self.cumulative / self.denominator


def record_activation(counter: EpochCounter, count: int) -> EpochCounter:
    return counter.record(count)


def epochs_elapsed(counter: EpochCounter) -> float:
    return counter.epochs
