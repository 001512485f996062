"""Random block operator grids mixing every operator representation."""

import numpy as np
import scipy.sparse as sp

from blockprox.linops import Adjoint, BlockOperatorGrid, FiniteDifference, MatrixOperator, RowFunctional, Selection


def random_operator(rng, in_dim, out_dim):
    kind = rng.integers(4)
    if out_dim == 1 and kind == 0:
        return RowFunctional(rng.standard_normal(in_dim))
    if kind == 1 and out_dim <= in_dim:
        return Selection(rng.choice(in_dim, size=out_dim, replace=False), in_dim)
    if kind == 1:
        return Adjoint(Selection(rng.choice(out_dim, size=in_dim, replace=False), out_dim))
    if kind == 2:
        return MatrixOperator(sp.random(out_dim, in_dim, density=0.3, random_state=rng, format="csr"))
    return MatrixOperator(rng.standard_normal((out_dim, in_dim)))


def random_grid(seed, max_total=200):
    """Grid with M, N <= max_total; may include a finite-difference block."""
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 6))
    p = int(rng.integers(1, 6))
    in_dims = [int(d) for d in rng.integers(1, max_total // m + 1, size=m)]
    out_dims = [int(d) for d in rng.integers(1, max_total // p + 1, size=p)]
    use_fd = rng.random() < 0.3 and p >= 2 and 2 * 16 <= max_total // p
    if use_fd:
        in_dims[0] = 16
        out_dims[0] = 32
    grid = BlockOperatorGrid(in_dims, out_dims)
    for k in range(p):
        for i in range(m):
            if use_fd and (k, i) == (0, 0):
                grid.set(0, 0, FiniteDifference(4))
            elif rng.random() < 0.7:
                grid.set(k, i, random_operator(rng, in_dims[i], out_dims[k]))
    return grid
