"""Proximity operators used by the problem instances.

Every function is a :class:`ProxFunction`: calling it evaluates f (possibly
``inf``), and ``prox(x, gamma)`` returns the minimizer of
``f(u) + ||u - x||^2 / (2 gamma)``.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import DimensionError, OracleFailure

INF = math.inf


class ProxFunction:
    """A proper lsc convex function on R^dim with a computable prox."""

    name = "function"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        self.dim = int(dim)

    def __call__(self, x) -> float:
        return self.value(self._vec(x))

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def prox(self, x, gamma: float) -> np.ndarray:
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return self._prox(self._vec(x), float(gamma))

    def _prox(self, x: np.ndarray, gamma: float) -> np.ndarray:
        raise NotImplementedError

    def _vec(self, x) -> np.ndarray:
        if type(x) is np.ndarray and x.ndim == 1 and x.size == self.dim and x.dtype == np.float64:
            return x
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != self.dim:
            raise DimensionError(f"{self.name} expects dimension {self.dim}, got {x.size}")
        return x

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


def _shrink_to(center: np.ndarray, x: np.ndarray, radius: float) -> np.ndarray:
    # prox of radius*||. - center||: move x toward center by radius, stop at center
    r = x - center
    nr = math.sqrt(float(r @ r))
    if nr <= radius:
        return center.copy()
    return x - (radius / nr) * r


class ZeroFunction(ProxFunction):
    name = "zero"

    def value(self, x):
        return 0.0

    def _prox(self, x, gamma):
        return x.copy()


class ScaledL2Norm(ProxFunction):
    """tau * ||x||_2."""

    name = "scaled_l2_norm"

    def __init__(self, tau: float, dim: int):
        super().__init__(dim)
        if tau <= 0:
            raise ValueError("tau must be positive")
        self.tau = float(tau)
        self._zero = np.zeros(self.dim)

    def value(self, x):
        return self.tau * math.sqrt(float(x @ x))

    def _prox(self, x, gamma):
        return _shrink_to(self._zero, x, gamma * self.tau)


class Hinge(ProxFunction):
    """Scalar hinge loss xi -> max(0, 1 - beta*xi)."""

    name = "hinge"

    def __init__(self, beta: float):
        super().__init__(1)
        if beta == 0:
            raise ValueError("beta must be nonzero")
        self.beta = float(beta)

    def value(self, x):
        return max(0.0, 1.0 - self.beta * float(x[0]))

    def _prox(self, x, gamma):
        # g(xi) = h(beta xi) with h(s) = max(0, 1 - s)
        # prox_{gamma g}(x) = prox_{gamma beta^2 h}(beta x) / beta
        beta = self.beta
        s = beta * float(x[0])
        c = gamma * beta * beta
        if s < 1.0 - c:
            s = s + c
        elif s <= 1.0:
            s = 1.0
        return np.array([s / beta])


class BoxIndicator(ProxFunction):
    """Indicator of [lo, hi]^dim."""

    name = "box_indicator"

    def __init__(self, lo: float, hi: float, dim: int):
        super().__init__(dim)
        if not lo < hi:
            raise ValueError("box requires lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)

    def value(self, x):
        if np.all((x >= self.lo) & (x <= self.hi)):
            return 0.0
        return INF

    def _prox(self, x, gamma):
        return np.clip(x, self.lo, self.hi)


class ScaledL2Distance(ProxFunction):
    """alpha * ||x - b||_2."""

    name = "scaled_l2_distance"

    def __init__(self, alpha: float, b):
        b = np.asarray(b, dtype=float).reshape(-1)
        super().__init__(b.size)
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.b = b

    def value(self, x):
        r = x - self.b
        return self.alpha * math.sqrt(float(r @ r))

    def _prox(self, x, gamma):
        return _shrink_to(self.b, x, self.alpha * gamma)


class ScaledSquaredL2(ProxFunction):
    """alpha * ||x - c||_2^2."""

    name = "scaled_sq_l2"

    def __init__(self, alpha: float, c):
        c = np.asarray(c, dtype=float).reshape(-1)
        super().__init__(c.size)
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.c = c

    def value(self, x):
        r = x - self.c
        return self.alpha * float(r @ r)

    def _prox(self, x, gamma):
        w = 2.0 * self.alpha * gamma
        return (x + w * self.c) / (1.0 + w)


class L12Pairs(ProxFunction):
    """Sum of Euclidean norms of the pairs (y1[j], y2[j]).

    The input is laid out as ``concatenate([y1, y2])`` with ``len(y1) ==
    len(y2) == pairs``.
    """

    name = "l12_pairs"

    def __init__(self, pairs: int):
        super().__init__(2 * int(pairs))
        self.pairs = int(pairs)

    def _vec(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size % 2:
            raise DimensionError(f"l12_pairs needs an even input dimension, got {x.size}")
        return super()._vec(x)

    def value(self, x):
        n = self.pairs
        return float(np.sum(np.hypot(x[:n], x[n:])))

    def _prox(self, x, gamma):
        n = self.pairs
        y1, y2 = x[:n], x[n:]
        r = np.hypot(y1, y2)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > gamma, 1.0 - gamma / r, 0.0)
        return np.concatenate([scale * y1, scale * y2])


class ZeroIndicator(ProxFunction):
    """Indicator of the singleton {0}."""

    name = "zero_indicator"

    def value(self, x):
        return 0.0 if not np.any(x) else INF

    def _prox(self, x, gamma):
        return np.zeros_like(x)


def prox_zero(dim: int) -> ProxFunction:
    return ZeroFunction(dim)


def prox_scaled_l2_norm(tau: float, dim: int) -> ProxFunction:
    """``tau * ||.||_2``; prox is block soft-thresholding at ``gamma*tau``."""
    return ScaledL2Norm(tau, dim)


def prox_hinge(beta: float) -> ProxFunction:
    return Hinge(beta)


def prox_box_indicator(lo: float, hi: float, dim: int) -> ProxFunction:
    return BoxIndicator(lo, hi, dim)


def prox_scaled_l2_distance(alpha: float, b) -> ProxFunction:
    return ScaledL2Distance(alpha, b)


def prox_scaled_sq_l2(alpha: float, c) -> ProxFunction:
    return ScaledSquaredL2(alpha, c)


def prox_l12_pairs(pairs: int) -> ProxFunction:
    return L12Pairs(pairs)


def prox_zero_indicator(dim: int) -> ProxFunction:
    return ZeroIndicator(dim)


def prox_conjugate_moreau(f: ProxFunction, x, gamma: float) -> np.ndarray:
    """prox of ``gamma * f^*`` at ``x`` via ``x - gamma * prox_{f/gamma}(x/gamma)``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    return x - gamma * f.prox(x / gamma, 1.0 / gamma)


# --------------------------------------------------------------------------
# Brute-force oracle (test-only)
# --------------------------------------------------------------------------

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _line_minimize(phi, u, d, phi_u, scale, tol):
    """Minimize the convex map s -> phi(u + s d) by bracketing + golden section.

    Returns (s, value). ``phi`` may return inf outside its domain; s = 0 is
    always finite on entry.
    """
    # bracket: expand each side until the value stops decreasing
    lo = hi = 0.0
    step = scale
    best_s, best_v = 0.0, phi_u
    for sign in (-1.0, 1.0):
        h = step
        prev = phi_u
        edge = 0.0
        for _ in range(80):
            v = phi(u + (sign * h) * d)
            if v < best_v:
                best_s, best_v = sign * h, v
            if v >= prev:
                edge = sign * h
                break
            prev = v
            h *= 2.0
        else:
            edge = sign * h
        if sign < 0:
            lo = edge
        else:
            hi = edge
    a, b = lo, hi
    c = b - _GOLD * (b - a)
    e = a + _GOLD * (b - a)
    fc = phi(u + c * d)
    fe = phi(u + e * d)
    tol = max(tol, 1e-13 * (abs(a) + abs(b)))
    while b - a > tol:
        if fc == INF and fe == INF:
            # domain lies strictly between the two probes or on one side
            if c <= best_s <= e:
                a, b = c, e
            elif best_s < c:
                b = c
            else:
                a = e
            c = b - _GOLD * (b - a)
            e = a + _GOLD * (b - a)
            fc = phi(u + c * d)
            fe = phi(u + e * d)
        elif fc <= fe:
            b, e, fe = e, c, fc
            c = b - _GOLD * (b - a)
            fc = phi(u + c * d)
        else:
            a, c, fc = c, e, fe
            e = a + _GOLD * (b - a)
            fe = phi(u + e * d)
        for s, v in ((c, fc), (e, fe)):
            if v < best_v:
                best_s, best_v = s, v
    return best_s, best_v


def brute_force_prox_oracle(f_eval, x, gamma: float, tol: float = 1e-6, *, seed: int = 0,
                            max_sweeps: int = 4000, starts=None) -> np.ndarray:
    """Approximate ``argmin_u f(u) + ||u - x||^2 / (2 gamma)`` without using a prox.

    Derivative-free: repeated exact line searches (golden section) along the
    coordinate axes and seeded random directions, from several starting
    points. Intended for dimensions up to 5 in tests.

    Raises
    ------
    OracleFailure
        If no start has a finite objective, or the iterate is still moving
        after ``max_sweeps`` sweeps.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.size
    if n > 5:
        raise ValueError("brute-force oracle is limited to dimension <= 5")
    gamma = float(gamma)

    def phi(u):
        v = float(f_eval(u))
        if v == INF or math.isnan(v):
            return INF
        r = u - x
        return v + float(r @ r) / (2.0 * gamma)

    rng = np.random.default_rng(seed)
    candidates = [x.copy(), np.zeros(n)]
    if starts is not None:
        candidates.extend(np.asarray(s, dtype=float).reshape(-1) for s in starts)
    candidates.extend(x + rng.standard_normal(n) * (1.0 + np.abs(x)) for _ in range(2))
    finite = [(phi(u), u) for u in candidates]
    finite = [(v, u) for v, u in finite if v < INF]
    if not finite:
        raise OracleFailure("no finite starting point for the oracle")
    finite.sort(key=lambda t: t[0])
    results = []
    for v0, u0 in finite[:2]:
        u, v = u0.copy(), v0
        scale = max(1e-3, float(np.linalg.norm(u - x)), gamma)
        for _ in range(max_sweeps):
            u_start = u.copy()
            dirs = list(np.eye(n))
            for _ in range(n + 1):
                d = rng.standard_normal(n)
                dirs.append(d / np.linalg.norm(d))
            for d in dirs:
                s, v_new = _line_minimize(phi, u, d, v, scale, 1e-3 * tol)
                if v_new <= v:
                    u, v = u + s * d, v_new
            moved = float(np.linalg.norm(u - u_start))
            scale = max(moved, 1e-12 * (1.0 + float(np.linalg.norm(u))))
            if moved <= 1e-3 * tol:
                break
        else:
            raise OracleFailure(f"oracle still moving after {max_sweeps} sweeps")
        results.append((v, u))
    results.sort(key=lambda t: t[0])
    return results[0][1]
