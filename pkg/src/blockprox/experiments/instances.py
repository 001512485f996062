"""Instance generators for the two benchmark problems and for random small problems.

* Group-sparse binary classification: latent group lasso with hinge losses
  over overlapping groups of 10 consecutive coordinates (stride 7).
* Image recovery: box-constrained image from masked rows and a
  nonstationary blur, with total-variation regularization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..core import BlockVector, ProblemSpec
from ..linops import (Adjoint, BlockOperatorGrid, FiniteDifference, MatrixOperator, RowFunctional, Selection,
                      image_row_selector)
from ..prox import (prox_box_indicator, prox_hinge, prox_l12_pairs, prox_scaled_l2_distance,
                    prox_scaled_l2_norm, prox_scaled_sq_l2, prox_zero)

GROUP_WIDTH = 10
GROUP_STRIDE = 7


# --------------------------------------------------------------------------
# Group-sparse classification
# --------------------------------------------------------------------------

def gen_group_cover(d: int) -> list[np.ndarray]:
    """Windows of 10 consecutive indices every 7 positions; the last one is cut at d.

    There are ceil((d - 10) / 7) + 1 groups.
    """
    if d < GROUP_WIDTH:
        raise ValueError(f"d must be at least {GROUP_WIDTH}")
    m = -(-(d - GROUP_WIDTH) // GROUP_STRIDE) + 1
    return [np.arange(GROUP_STRIDE * i, min(GROUP_STRIDE * i + GROUP_WIDTH, d)) for i in range(m)]


@dataclass
class GroupLassoInstance:
    d: int
    groups: list
    u: np.ndarray          # p x d measurement vectors
    beta: np.ndarray       # labels in {-1, 1}
    tau: np.ndarray        # per-group weights
    true_signal: np.ndarray
    flipped: np.ndarray    # indices of flipped labels

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return self.u.shape[0]


def gen_classification_instance(d: int = 500, p: int = 100, sparsity: float = 0.1,
                                flip_rate: float = 0.25, seed: int = 0,
                                group_weight: float = 0.1) -> GroupLassoInstance:
    """Random labelled measurements of a group-sparse vector.

    ``sparsity`` is the fraction of groups carrying the signal (at least one
    group). Exactly ceil(flip_rate * p) labels are flipped.
    """
    if d < GROUP_WIDTH or p < 1 or not 0.0 < sparsity <= 1.0:
        raise ValueError("need d >= 10, p >= 1 and sparsity in (0, 1]")
    if not 0.0 <= flip_rate < 1.0:
        raise ValueError("flip_rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    groups = gen_group_cover(d)
    m = len(groups)
    n_active = max(1, int(round(sparsity * m)))
    active = np.sort(rng.choice(m, size=n_active, replace=False))
    y = np.zeros(d)
    for i in active:
        y[groups[i]] = rng.standard_normal(groups[i].size)
    u = rng.standard_normal((p, d))
    for k in range(p):
        while float(u[k] @ y) == 0.0:
            u[k] = rng.standard_normal(d)
    labels = np.sign(u @ y)
    n_flip = int(math.ceil(flip_rate * p - 1e-9))
    flipped = np.sort(rng.choice(p, size=n_flip, replace=False)) if n_flip else np.zeros(0, dtype=int)
    omega = np.ones(p)
    omega[flipped] = -1.0
    return GroupLassoInstance(d, groups, u, omega * labels, np.full(m, float(group_weight)), y, flipped)


def build_exp1_problem(inst: GroupLassoInstance) -> ProblemSpec:
    """x_i lives on group G_i; f_i = tau_i ||.||_2, g_k = hinge(beta_k), L_{k,i} = <., u_k|G_i>."""
    dims = [g.size for g in inst.groups]
    grid = BlockOperatorGrid(dims, [1] * inst.p)
    for k in range(inst.p):
        for i, G in enumerate(inst.groups):
            grid.set(k, i, RowFunctional(inst.u[k, G]))
    f = [prox_scaled_l2_norm(tau, dim) for tau, dim in zip(inst.tau, dims)]
    g = [prox_hinge(b) for b in inst.beta]
    return ProblemSpec(f, g, grid, name="exp1")


def lift_signal(inst: GroupLassoInstance, signal: np.ndarray) -> BlockVector:
    """Split a vector of R^d into group components whose sum is the vector.

    Overlapping coordinates go to the earlier group.
    """
    owner = np.full(inst.d, -1)
    for i, G in enumerate(inst.groups):
        free = G[owner[G] < 0]
        owner[free] = i
    return BlockVector(np.where(owner[G] == i, signal[G], 0.0) for i, G in enumerate(inst.groups))


def assemble_signal(inst: GroupLassoInstance, x) -> np.ndarray:
    """sum_i x_i, each zero-padded to R^d."""
    out = np.zeros(inst.d)
    for G, xi in zip(inst.groups, x):
        out[G] += xi
    return out


# --------------------------------------------------------------------------
# Image recovery
# --------------------------------------------------------------------------

@dataclass
class ImageRecoveryInstance:
    side: int
    image: np.ndarray          # ground truth, side*side, row-major
    rows: np.ndarray           # kept rows r_1..r_q
    blur: sp.csr_matrix        # N x N
    blocks: int                # s
    b: np.ndarray              # masked observation (zeros outside kept rows)
    c: np.ndarray              # blurred observation
    w1: np.ndarray
    w2: np.ndarray
    lo: float = 0.0
    hi: float = 255.0
    row_weight: float = 10.0
    blur_weight: float = 5.0

    @property
    def N(self) -> int:
        return self.side * self.side

    @property
    def q(self) -> int:
        return self.rows.size

    def blur_block(self, k: int) -> sp.csr_matrix:
        r = self.N // self.blocks
        return self.blur[k * r:(k + 1) * r]

    def mask(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.N)
        img = x.reshape(self.side, self.side)
        o = out.reshape(self.side, self.side)
        o[self.rows] = img[self.rows]
        return out


def synthetic_image(side: int, seed: int = 0) -> np.ndarray:
    """Piecewise-constant shapes on a gentle ramp, values in [0, 255]."""
    rng = np.random.default_rng(seed)
    r, c = np.mgrid[0:side, 0:side] / max(side - 1, 1)
    img = 40.0 + 90.0 * c
    for _ in range(3):
        r0, c0 = rng.uniform(0.1, 0.6, size=2)
        h, w = rng.uniform(0.2, 0.4, size=2)
        img[(r >= r0) & (r < r0 + h) & (c >= c0) & (c < c0 + w)] = rng.uniform(150, 240)
    rc, cc = rng.uniform(0.3, 0.7, size=2)
    img[(r - rc) ** 2 + (c - cc) ** 2 < rng.uniform(0.02, 0.05)] = rng.uniform(10, 40)
    return np.clip(img, 0.0, 255.0).ravel()


def nonstationary_blur(side: int, sigma_min: float = 0.5, sigma_max: float = 2.0,
                       radius: int | None = None) -> sp.csr_matrix:
    """Gaussian blur whose width grows linearly from the top row to the bottom row.

    Weights are normalized over the in-image part of each window.
    """
    radius = int(math.ceil(2.0 * sigma_max)) if radius is None else int(radius)
    offsets = np.arange(-radius, radius + 1)
    di, dj = np.meshgrid(offsets, offsets, indexing="ij")
    di, dj = di.ravel(), dj.ravel()
    rows, cols, vals = [], [], []
    for r in range(side):
        sigma = sigma_min + (sigma_max - sigma_min) * r / max(side - 1, 1)
        kern = np.exp(-(di**2 + dj**2) / (2.0 * sigma**2))
        for col in range(side):
            rr, cc = r + di, col + dj
            ok = (rr >= 0) & (rr < side) & (cc >= 0) & (cc < side)
            wts = kern[ok] / kern[ok].sum()
            rows.append(np.full(wts.size, r * side + col))
            cols.append(rr[ok] * side + cc[ok])
            vals.append(wts)
    n = side * side
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def snr_db(signal: np.ndarray, noise: np.ndarray) -> float:
    return 20.0 * math.log10(np.linalg.norm(signal) / np.linalg.norm(noise))


def _noise_at_snr(rng, signal: np.ndarray, snr: float, support=None) -> np.ndarray:
    w = rng.standard_normal(signal.size)
    if support is not None:
        w[~support] = 0.0
    return w * (np.linalg.norm(signal) * 10.0 ** (-snr / 20.0) / np.linalg.norm(w))


def gen_image_instance(side: int = 24, q: int = 6, s: int = 24, snr1_db: float = 28.5,
                       snr2_db: float = 27.8, seed: int = 0) -> ImageRecoveryInstance:
    """Synthetic image, q evenly spaced kept rows, s row blocks of a nonstationary blur."""
    N = side * side
    if not 0 < q < side:
        raise ValueError("need 0 < q < side")
    if s < 1 or N % s:
        raise ValueError(f"the {N} blur rows cannot be split into {s} equal blocks")
    rng = np.random.default_rng(seed)
    image = synthetic_image(side, seed)
    rows = np.unique(np.round(np.linspace(0, side - 1, q)).astype(int))
    if rows.size != q:
        raise ValueError("could not place q distinct rows")
    keep = np.zeros((side, side), dtype=bool)
    keep[rows] = True
    keep = keep.ravel()
    H = nonstationary_blur(side)
    masked = np.where(keep, image, 0.0)
    w1 = _noise_at_snr(rng, masked, snr1_db, keep)
    blurred = H @ image
    w2 = _noise_at_snr(rng, blurred, snr2_db)
    return ImageRecoveryInstance(side, image, rows, H, s, masked + w1, blurred + w2, w1, w2)


def build_exp2_problem(inst: ImageRecoveryInstance) -> ProblemSpec:
    """One primal block in [lo, hi]^N; q row-fidelity terms, s blur blocks, one TV term."""
    N, side = inst.N, inst.side
    r = N // inst.blocks
    out_dims = [side] * inst.q + [r] * inst.blocks + [2 * N]
    grid = BlockOperatorGrid([N], out_dims)
    g = []
    b_img = inst.b.reshape(side, side)
    for k, row in enumerate(inst.rows):
        grid.set(k, 0, image_row_selector(side, int(row)))
        g.append(prox_scaled_l2_distance(inst.row_weight, b_img[row]))
    for j in range(inst.blocks):
        grid.set(inst.q + j, 0, MatrixOperator(inst.blur_block(j)))
        g.append(prox_scaled_sq_l2(inst.blur_weight, inst.c[j * r:(j + 1) * r]))
    grid.set(inst.q + inst.blocks, 0, FiniteDifference(side))
    g.append(prox_l12_pairs(N))
    f = [prox_box_indicator(inst.lo, inst.hi, N)]
    return ProblemSpec(f, g, grid, name="exp2")


# --------------------------------------------------------------------------
# Small random instances
# --------------------------------------------------------------------------

def random_problem(seed: int, max_m: int = 4, max_p: int = 5, max_block: int = 4) -> ProblemSpec:
    """A small instance drawing f_i and g_k from the whole catalog.

    The last coupling term is a squared distance composed with the identity
    on H, which makes the primal solution unique.
    """
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_m + 1))
    p = int(rng.integers(2, max_p + 1))
    in_dims = [int(rng.integers(1, max_block + 1)) for _ in range(m)]
    N = sum(in_dims)
    f = []
    for d in in_dims:
        kind = rng.integers(5)
        if kind == 0:
            f.append(prox_scaled_l2_norm(rng.uniform(0.1, 1.0), d))
        elif kind == 1:
            f.append(prox_box_indicator(-1.0, 1.0, d))
        elif kind == 2:
            f.append(prox_scaled_l2_distance(rng.uniform(0.1, 1.0), rng.standard_normal(d)))
        elif kind == 3:
            f.append(prox_scaled_sq_l2(rng.uniform(0.1, 1.0), rng.standard_normal(d)))
        else:
            f.append(prox_zero(d))
    out_dims, g = [], []
    for _ in range(p - 1):
        kind = rng.integers(4)
        if kind == 0:
            out_dims.append(1)
            g.append(prox_hinge(float(rng.choice([-1.0, 1.0]))))
        elif kind == 1:
            d = int(rng.integers(1, max_block + 1))
            out_dims.append(d)
            g.append(prox_scaled_l2_distance(rng.uniform(0.2, 2.0), rng.standard_normal(d)))
        elif kind == 2:
            pairs = int(rng.integers(1, 3))
            out_dims.append(2 * pairs)
            g.append(prox_l12_pairs(pairs))
        else:
            d = int(rng.integers(1, max_block + 1))
            out_dims.append(d)
            g.append(prox_scaled_l2_norm(rng.uniform(0.2, 2.0), d))
    out_dims.append(N)
    g.append(prox_scaled_sq_l2(rng.uniform(0.2, 1.0), rng.standard_normal(N)))
    grid = BlockOperatorGrid(in_dims, out_dims)
    for k in range(p - 1):
        cols = [i for i in range(m) if rng.random() < 0.7] or [int(rng.integers(m))]
        for i in cols:
            grid.set(k, i, MatrixOperator(rng.standard_normal((out_dims[k], in_dims[i]))))
    offsets = np.cumsum([0, *in_dims])
    for i in range(m):
        grid.set(p - 1, i, Adjoint(Selection(np.arange(offsets[i], offsets[i + 1]), N)))
    return ProblemSpec(f, g, grid, name=f"random-{seed}")
