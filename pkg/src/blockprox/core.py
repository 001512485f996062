"""Product-space vectors, problem description and optimality measures.

A problem instance is

    minimize  sum_i f_i(x_i) + sum_k g_k( sum_i L_{k,i} x_i )

over x = (x_1, ..., x_m) in H_1 x ... x H_m, where every f_i and g_k is
exposed through a :class:`~blockprox.prox.ProxFunction` and the linear maps
L_{k,i} live in a :class:`~blockprox.linops.BlockOperatorGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DimensionError
from .prox import ProxFunction, prox_conjugate_moreau

INF = math.inf


class BlockVector:
    """Element of a product of Euclidean spaces.

    Blocks are kept as separate contiguous arrays so that activating a few
    blocks only touches those blocks.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[np.ndarray]):
        self.blocks = [np.array(b, dtype=float).reshape(-1) for b in blocks]

    @classmethod
    def wrap(cls, blocks: list) -> "BlockVector":
        """Adopt a list of 1-D float arrays without copying them."""
        bv = cls.__new__(cls)
        bv.blocks = blocks
        return bv

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "BlockVector":
        return cls(np.zeros(d) for d in dims)

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Sequence[int]) -> "BlockVector":
        flat = np.array(flat, dtype=float).reshape(-1)
        if flat.size != sum(dims):
            raise DimensionError(f"flat vector of size {flat.size} cannot be split into {list(dims)}")
        offsets = np.cumsum([0, *dims])
        # views into one private copy
        return cls.wrap([flat[offsets[j]:offsets[j + 1]] for j in range(len(dims))])

    @property
    def dims(self) -> list[int]:
        return [b.size for b in self.blocks]

    def flat(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate(self.blocks)

    def norm(self) -> float:
        return math.sqrt(sum(float(b @ b) for b in self.blocks))

    def dot(self, other: "BlockVector") -> float:
        self._check(other)
        return sum(float(a @ b) for a, b in zip(self.blocks, other.blocks))

    def copy(self) -> "BlockVector":
        return BlockVector(self.blocks)

    def check_dims(self, dims: Sequence[int], what: str = "vector") -> None:
        if self.dims != list(dims):
            raise DimensionError(f"{what} has block dims {self.dims}, expected {list(dims)}")

    def _check(self, other: "BlockVector") -> None:
        if self.dims != other.dims:
            raise DimensionError(f"block dims differ: {self.dims} vs {other.dims}")

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, j: int) -> np.ndarray:
        return self.blocks[j]

    def __iter__(self):
        return iter(self.blocks)

    def __add__(self, other: "BlockVector") -> "BlockVector":
        self._check(other)
        return BlockVector(a + b for a, b in zip(self.blocks, other.blocks))

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        self._check(other)
        return BlockVector(a - b for a, b in zip(self.blocks, other.blocks))

    def __mul__(self, c: float) -> "BlockVector":
        return BlockVector(c * b for b in self.blocks)

    __rmul__ = __mul__

    def __neg__(self) -> "BlockVector":
        return BlockVector(-b for b in self.blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockVector):
            return NotImplemented
        return self.dims == other.dims and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    def __repr__(self) -> str:
        return f"BlockVector(dims={self.dims})"


def as_block_vector(x, dims: Sequence[int], what: str = "vector") -> BlockVector:
    """Coerce a BlockVector, a list of arrays or a flat array to ``dims``."""
    if isinstance(x, BlockVector):
        x.check_dims(dims, what)
        return x
    flat = (np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim <= 1)
            or (isinstance(x, (list, tuple)) and all(np.isscalar(e) for e in x)))
    if flat:
        return BlockVector.from_flat(np.atleast_1d(np.asarray(x, dtype=float)), dims)
    bv = BlockVector(x)
    bv.check_dims(dims, what)
    return bv


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """An instance of the multicomponent problem.

    Parameters
    ----------
    f : sequence of ProxFunction
        Separable terms, one per primal block.
    g : sequence of ProxFunction
        Coupling terms, one per dual block.
    grid : BlockOperatorGrid
        The p x m grid of linear maps.
    """

    f: tuple
    g: tuple
    grid: object
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(self.f))
        object.__setattr__(self, "g", tuple(self.g))
        grid = self.grid
        if len(self.f) != grid.m or len(self.g) != grid.p:
            raise DimensionError(
                f"grid is {grid.p}x{grid.m} but got {len(self.g)} coupling and {len(self.f)} separable terms"
            )
        for i, (fi, d) in enumerate(zip(self.f, grid.in_dims)):
            if fi.dim != d:
                raise DimensionError(f"f[{i}] acts on dimension {fi.dim}, block H_{i} has {d}")
        for k, (gk, d) in enumerate(zip(self.g, grid.out_dims)):
            if gk.dim != d:
                raise DimensionError(f"g[{k}] acts on dimension {gk.dim}, block G_{k} has {d}")

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def p(self) -> int:
        return self.grid.p

    @property
    def primal_dims(self) -> list[int]:
        return list(self.grid.in_dims)

    @property
    def dual_dims(self) -> list[int]:
        return list(self.grid.out_dims)

    def projector(self):
        """Projector onto the graph of the stacked operator, built on first use."""
        if "projector" not in self._cache:
            from .linops import build_projector

            self._cache["projector"] = build_projector(self.grid)
        return self._cache["projector"]

    def zeros_primal(self) -> BlockVector:
        return BlockVector.zeros(self.primal_dims)

    def zeros_dual(self) -> BlockVector:
        return BlockVector.zeros(self.dual_dims)


@dataclass
class KTPoint:
    """Primal-dual pair (x, v*) candidate for the Kuhn-Tucker inclusions."""

    x: BlockVector
    v_star: BlockVector


def _safe_sum(values: Iterable[float]) -> float:
    total = 0.0
    for v in values:
        if v == INF:
            return INF
        total += v
    return total


def objective_value(problem: ProblemSpec, x) -> float:
    """Evaluate sum_i f_i(x_i) + sum_k g_k((Lx)_k); ``inf`` if any term is."""
    x = as_block_vector(x, problem.primal_dims, "x")
    sep = _safe_sum(float(fi(xi)) for fi, xi in zip(problem.f, x))
    if sep == INF:
        return INF
    Lx = problem.grid.apply(x)
    return _safe_sum([sep, *(float(gk(yk)) for gk, yk in zip(problem.g, Lx))])


def kt_residual(problem: ProblemSpec, point: KTPoint, gamma: float = 1.0, mu: float = 1.0) -> float:
    """Distance-like certificate for the Kuhn-Tucker inclusions.

    Returns

        sum_i || x_i - prox_{gamma f_i}(x_i - gamma (L* v*)_i) ||
      + sum_k || v*_k - prox_{mu g_k^*}(v*_k + mu (L x)_k) ||

    which vanishes exactly when -(L* v*)_i is a subgradient of f_i at x_i for
    all i and (L x)_k is a subgradient of g_k^* at v*_k for all k.
    """
    if gamma <= 0 or mu <= 0:
        raise ValueError("gamma and mu must be positive")
    x = as_block_vector(point.x, problem.primal_dims, "x")
    v = as_block_vector(point.v_star, problem.dual_dims, "v_star")
    Ltv = problem.grid.adjoint(v)
    Lx = problem.grid.apply(x)
    res = 0.0
    for fi, xi, ui in zip(problem.f, x, Ltv):
        res += float(np.linalg.norm(xi - fi.prox(xi - gamma * ui, gamma)))
    for gk, vk, yk in zip(problem.g, v, Lx):
        res += float(np.linalg.norm(vk - prox_conjugate_moreau(gk, vk + mu * yk, mu)))
    return res
