"""Portable ``.npz`` container for generated instances.

Every file holds a ``kind`` entry and ``format_version`` (currently 1), then
plain float64/int64 arrays:

``kind = "group_lasso"``
    ``d`` (scalar), ``group_start`` and ``group_size`` (m each; groups are
    contiguous index ranges), ``u`` (p x d), ``beta`` (p), ``tau`` (m),
    ``true_signal`` (d), ``flipped`` (indices of flipped labels).

``kind = "image_recovery"``
    ``side``, ``blocks`` (scalars), ``image``, ``b``, ``c``, ``w1``, ``w2``
    (N each, row-major), ``rows`` (q kept rows), the blur matrix in CSR form
    as ``blur_data``, ``blur_indices``, ``blur_indptr``, and the scalars
    ``lo``, ``hi``, ``row_weight``, ``blur_weight``.

Files are written without pickling and can be read by any npz reader.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .instances import GroupLassoInstance, ImageRecoveryInstance

FORMAT_VERSION = 1


def save_instance(path, inst) -> None:
    if isinstance(inst, GroupLassoInstance):
        starts = np.array([G[0] for G in inst.groups], dtype=np.int64)
        sizes = np.array([G.size for G in inst.groups], dtype=np.int64)
        np.savez(path, kind="group_lasso", format_version=FORMAT_VERSION, d=inst.d,
                 group_start=starts, group_size=sizes, u=inst.u, beta=inst.beta, tau=inst.tau,
                 true_signal=inst.true_signal, flipped=np.asarray(inst.flipped, dtype=np.int64))
    elif isinstance(inst, ImageRecoveryInstance):
        H = inst.blur.tocsr()
        np.savez(path, kind="image_recovery", format_version=FORMAT_VERSION, side=inst.side,
                 blocks=inst.blocks, image=inst.image, rows=inst.rows, b=inst.b, c=inst.c,
                 w1=inst.w1, w2=inst.w2, blur_data=H.data, blur_indices=H.indices, blur_indptr=H.indptr,
                 lo=inst.lo, hi=inst.hi, row_weight=inst.row_weight, blur_weight=inst.blur_weight)
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")


def load_instance(path):
    """Inverse of :func:`save_instance`."""
    with np.load(path, allow_pickle=False) as z:
        kind = str(z["kind"])
        version = int(z["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported instance format version {version}")
        if kind == "group_lasso":
            groups = [np.arange(s, s + n) for s, n in zip(z["group_start"], z["group_size"])]
            return GroupLassoInstance(int(z["d"]), groups, z["u"], z["beta"], z["tau"],
                                      z["true_signal"], z["flipped"])
        if kind == "image_recovery":
            side = int(z["side"])
            N = side * side
            blur = sp.csr_matrix((z["blur_data"], z["blur_indices"], z["blur_indptr"]), shape=(N, N))
            return ImageRecoveryInstance(side, z["image"], z["rows"], blur, int(z["blocks"]), z["b"], z["c"],
                                         z["w1"], z["w2"], float(z["lo"]), float(z["hi"]),
                                         float(z["row_weight"]), float(z["blur_weight"]))
    raise ValueError(f"unknown instance kind {kind!r}")
