"""Linear operators, the stacked block operator and the projector onto its graph.

The stacked operator maps x = (x_1..x_m) to ( sum_i L_{k,i} x_i )_{k=1..p}.
Its graph V = {(z, y) : y = L z} is projected onto with

    t = (Id + L*L)^{-1} (z + L*y)              (primal route)
    s = (Id + L L*)^{-1} (L z - y),  t = z - L*s,  L t = y + s   (dual route)

and the blocks of (t, Lt) are the coordinate operators Q_1..Q_{m+p}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .core import BlockVector, as_block_vector
from .exceptions import DimensionError, NumericalError


class LinOp:
    """A linear map R^in_dim -> R^out_dim with its adjoint."""

    def __init__(self, in_dim: int, out_dim: int):
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_sparse(self) -> sp.csr_matrix:
        """Materialize as an ``out_dim x in_dim`` CSR matrix."""
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row, col, value) arrays of the nonzero entries."""
        A = self.to_sparse().tocoo()
        return A.row, A.col, A.data

    @property
    def nnz(self) -> int:
        return int(self.to_sparse().nnz)

    def __call__(self, x):
        return self.apply(x)

    def __repr__(self):
        return f"{type(self).__name__}({self.out_dim}x{self.in_dim})"


class MatrixOperator(LinOp):
    """Explicit dense or sparse matrix."""

    def __init__(self, A):
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=float)
        else:
            A = np.atleast_2d(np.asarray(A, dtype=float))
        super().__init__(A.shape[1], A.shape[0])
        self.A = A

    def apply(self, x):
        return np.asarray(self.A @ x).reshape(-1)

    def adjoint(self, y):
        return np.asarray(self.A.T @ y).reshape(-1)

    def to_sparse(self):
        return sp.csr_matrix(self.A)

    @property
    def nnz(self):
        return int(self.A.nnz) if sp.issparse(self.A) else int(np.count_nonzero(self.A))


class RowFunctional(LinOp):
    """x -> <x, u>, viewed as a map into R^1."""

    def __init__(self, u):
        u = np.asarray(u, dtype=float).reshape(-1)
        super().__init__(u.size, 1)
        self.u = u

    def apply(self, x):
        return np.array([float(self.u @ x)])

    def adjoint(self, y):
        return float(y[0]) * self.u

    def to_sparse(self):
        return sp.csr_matrix(self.u.reshape(1, -1))

    def triplets(self):
        cols = np.flatnonzero(self.u)
        return np.zeros(cols.size, dtype=np.intp), cols, self.u[cols]

    @property
    def nnz(self):
        return int(np.count_nonzero(self.u))


class Selection(LinOp):
    """Coordinate selection x -> x[indices]."""

    def __init__(self, indices, in_dim: int):
        indices = np.asarray(indices, dtype=np.intp).reshape(-1)
        if indices.size and (indices.min() < 0 or indices.max() >= in_dim):
            raise DimensionError("selection index out of range")
        super().__init__(in_dim, indices.size)
        self.indices = indices

    def apply(self, x):
        return np.asarray(x)[self.indices].copy()

    def adjoint(self, y):
        out = np.zeros(self.in_dim)
        np.add.at(out, self.indices, y)
        return out

    def to_sparse(self):
        n = self.indices.size
        return sp.csr_matrix((np.ones(n), (np.arange(n), self.indices)), shape=(n, self.in_dim))

    @property
    def nnz(self):
        return int(self.indices.size)


class Adjoint(LinOp):
    """The adjoint of another operator."""

    def __init__(self, op: LinOp):
        super().__init__(op.out_dim, op.in_dim)
        self.op = op

    def apply(self, x):
        return self.op.adjoint(x)

    def adjoint(self, y):
        return self.op.apply(y)

    def to_sparse(self):
        return self.op.to_sparse().T.tocsr()


def image_row_selector(side: int, row: int) -> Selection:
    """Pick row ``row`` of a ``side x side`` image stored row-major."""
    if not 0 <= row < side:
        raise DimensionError("row index out of range")
    return Selection(np.arange(row * side, (row + 1) * side), side * side)


class FiniteDifference(LinOp):
    """Forward differences of a ``rows x cols`` image with reflecting boundary.

    Output is ``concatenate([horizontal, vertical])``; the difference across
    the last column (row) is zero.
    """

    def __init__(self, rows: int, cols: int | None = None):
        cols = rows if cols is None else cols
        self.shape = (int(rows), int(cols))
        n = self.shape[0] * self.shape[1]
        super().__init__(n, 2 * n)

    def apply(self, x):
        img = np.asarray(x, dtype=float).reshape(self.shape)
        dh = np.zeros_like(img)
        dv = np.zeros_like(img)
        dh[:, :-1] = img[:, 1:] - img[:, :-1]
        dv[:-1, :] = img[1:, :] - img[:-1, :]
        return np.concatenate([dh.ravel(), dv.ravel()])

    def adjoint(self, y):
        n = self.in_dim
        dh = np.asarray(y[:n], dtype=float).reshape(self.shape)
        dv = np.asarray(y[n:], dtype=float).reshape(self.shape)
        out = np.zeros(self.shape)
        out[:, 1:] += dh[:, :-1]
        out[:, :-1] -= dh[:, :-1]
        out[1:, :] += dv[:-1, :]
        out[:-1, :] -= dv[:-1, :]
        return out.ravel()

    def to_sparse(self):
        r, c = self.shape

        def diff(k):
            d = sp.diags([-np.ones(k), np.ones(k - 1)], [0, 1], shape=(k, k), format="lil")
            d[k - 1, k - 1] = 0.0
            return d.tocsr()

        Dh = sp.kron(sp.identity(r), diff(c))
        Dv = sp.kron(diff(r), sp.identity(c))
        A = sp.vstack([Dh, Dv]).tocsr()
        A.eliminate_zeros()
        return A


class BlockOperatorGrid:
    """Sparse p x m grid of operators L_{k,i}: H_i -> G_k.

    Parameters
    ----------
    in_dims : sequence of int
        Dimensions of H_1..H_m.
    out_dims : sequence of int
        Dimensions of G_1..G_p.
    entries : mapping (k, i) -> LinOp
        Nonzero entries (0-based indices); absent pairs are structural zeros.
    """

    def __init__(self, in_dims: Sequence[int], out_dims: Sequence[int],
                 entries: Mapping[tuple[int, int], LinOp] | None = None):
        self.in_dims = [int(d) for d in in_dims]
        self.out_dims = [int(d) for d in out_dims]
        self.entries: dict[tuple[int, int], LinOp] = {}
        for (k, i), op in (entries or {}).items():
            self.set(k, i, op)
        self._matrix = None
        self._matrix_T = None

    @property
    def m(self) -> int:
        return len(self.in_dims)

    @property
    def p(self) -> int:
        return len(self.out_dims)

    @property
    def N(self) -> int:
        return sum(self.in_dims)

    @property
    def M(self) -> int:
        return sum(self.out_dims)

    def set(self, k: int, i: int, op: LinOp) -> None:
        if not (0 <= k < self.p and 0 <= i < self.m):
            raise DimensionError(f"entry ({k}, {i}) outside a {self.p}x{self.m} grid")
        if op.in_dim != self.in_dims[i] or op.out_dim != self.out_dims[k]:
            raise DimensionError(
                f"L[{k},{i}] maps {op.in_dim}->{op.out_dim}, expected "
                f"{self.in_dims[i]}->{self.out_dims[k]}"
            )
        self.entries[(k, i)] = op
        self._matrix = None
        self._matrix_T = None

    @property
    def in_offsets(self) -> np.ndarray:
        return np.cumsum([0, *self.in_dims])

    @property
    def out_offsets(self) -> np.ndarray:
        return np.cumsum([0, *self.out_dims])

    def apply(self, x) -> BlockVector:
        """k-th block of the result is sum_i L_{k,i} x_i."""
        x = as_block_vector(x, self.in_dims, "x")
        return BlockVector.from_flat(self.matrix() @ x.flat(), self.out_dims)

    def adjoint(self, v) -> BlockVector:
        """i-th block of the result is sum_k L*_{k,i} v_k."""
        v = as_block_vector(v, self.out_dims, "v")
        return BlockVector.from_flat(self.matrix_adjoint() @ v.flat(), self.in_dims)

    def apply_blockwise(self, x) -> BlockVector:
        """Same as :meth:`apply`, entry by entry through each operator's own ``apply``."""
        x = as_block_vector(x, self.in_dims, "x")
        out = [np.zeros(d) for d in self.out_dims]
        for (k, i), op in self.entries.items():
            out[k] += op.apply(x.blocks[i])
        return BlockVector(out)

    def adjoint_blockwise(self, v) -> BlockVector:
        v = as_block_vector(v, self.out_dims, "v")
        out = [np.zeros(d) for d in self.in_dims]
        for (k, i), op in self.entries.items():
            out[i] += op.adjoint(v.blocks[k])
        return BlockVector(out)

    def matrix_adjoint(self) -> sp.csr_matrix:
        if self._matrix_T is None:
            self._matrix_T = self.matrix().T.tocsr()
        return self._matrix_T

    def matrix(self) -> sp.csr_matrix:
        """The stacked operator as an M x N CSR matrix (cached)."""
        if self._matrix is None:
            ro, co = self.out_offsets, self.in_offsets
            rows, cols, vals = [np.zeros(0, dtype=np.intp)], [np.zeros(0, dtype=np.intp)], [np.zeros(0)]
            for (k, i), op in self.entries.items():
                r, c, v = op.triplets()
                rows.append(np.asarray(r, dtype=np.intp) + ro[k])
                cols.append(np.asarray(c, dtype=np.intp) + co[i])
                vals.append(np.asarray(v, dtype=float))
            A = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.M, self.N)
            )
            A.sum_duplicates()
            A.eliminate_zeros()
            A.sort_indices()
            self._matrix = A
        return self._matrix

    def row_nnz(self) -> np.ndarray:
        """Nonzeros of each block row k (cost of one L_{k,.} application)."""
        counts = np.zeros(self.p, dtype=np.int64)
        for (k, _), op in self.entries.items():
            counts[k] += op.nnz
        return counts

    def col_nnz(self) -> np.ndarray:
        counts = np.zeros(self.m, dtype=np.int64)
        for (_, i), op in self.entries.items():
            counts[i] += op.nnz
        return counts


def apply_stacked(grid: BlockOperatorGrid, x) -> BlockVector:
    return grid.apply(x)


def apply_stacked_adjoint(grid: BlockOperatorGrid, v) -> BlockVector:
    return grid.adjoint(v)


@dataclass(frozen=True, eq=False)
class SubspaceProjector:
    """Projector onto V = {(z, y): y = L z} from a Cholesky factor of the smaller Gram.

    ``side`` is ``"dual"`` when Id + L L* (M x M) was factorized and
    ``"primal"`` when Id + L*L (N x N) was.
    """

    grid: BlockOperatorGrid
    L: sp.csr_matrix
    LT: sp.csr_matrix
    factor: tuple
    side: str
    setup_macs: int
    apply_macs: int

    @property
    def N(self) -> int:
        return self.L.shape[1]

    @property
    def M(self) -> int:
        return self.L.shape[0]

    def project_flat(self, z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Project flat vectors; returns flat (t, L t)."""
        if z.shape != (self.N,) or y.shape != (self.M,):
            raise DimensionError(f"expected ({self.N},), ({self.M},); got {z.shape}, {y.shape}")
        if self.side == "dual":
            s = scipy.linalg.cho_solve(self.factor, self.L @ z - y, check_finite=False)
            return z - self.LT @ s, y + s
        t = scipy.linalg.cho_solve(self.factor, z + self.LT @ y, check_finite=False)
        return t, self.L @ t


def build_projector(grid: BlockOperatorGrid, side: str | None = None) -> SubspaceProjector:
    """Factorize Id + L L* if M <= N, else Id + L*L (override with ``side``).

    The multiply-accumulate counts use dense-equivalent estimates: forming the
    k x k Gram costs nnz(L) * k and a Cholesky factorization k^3 / 3.
    """
    L = grid.matrix()
    LT = grid.matrix_adjoint()
    M, N = L.shape
    if side is None:
        side = "dual" if M <= N else "primal"
    if side not in ("dual", "primal"):
        raise ValueError("side must be 'dual' or 'primal'")
    if side == "dual":
        G = (L @ LT).toarray() + np.eye(M)
        k = M
    else:
        G = (LT @ L).toarray() + np.eye(N)
        k = N
    try:
        factor = scipy.linalg.cho_factor(G, lower=True, check_finite=True) if k else (np.zeros((0, 0)), True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Cholesky factorization of the {side} Gram failed: {exc}") from exc
    nnz = int(L.nnz)
    setup = nnz * k + k**3 // 3
    per_apply = 2 * nnz + 2 * k * k
    return SubspaceProjector(grid, L, LT, factor, side, setup, per_apply)


def project_V(proj: SubspaceProjector, z, y) -> tuple[BlockVector, BlockVector]:
    """Return (t, L t), the projection of (z, y) onto the graph of L."""
    grid = proj.grid
    z = as_block_vector(z, grid.in_dims, "z")
    y = as_block_vector(y, grid.out_dims, "y")
    t, u = proj.project_flat(z.flat(), y.flat())
    return BlockVector.from_flat(t, grid.in_dims), BlockVector.from_flat(u, grid.out_dims)


def coordinate_Q(proj: SubspaceProjector, j: int, z, y) -> np.ndarray:
    """Block ``j`` (0-based, primal blocks first) of the projection of (z, y)."""
    m, p = proj.grid.m, proj.grid.p
    if not 0 <= j < m + p:
        raise IndexError(f"coordinate index {j} outside 0..{m + p - 1}")
    t, u = project_V(proj, z, y)
    return t[j] if j < m else u[j - m]
