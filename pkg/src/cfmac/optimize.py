"""Shared optimization machinery: golden-section line search, simplex
utilities, block coordinate ascent over probability simplices, deterministic
RNG substreams, and the worker-count-controlled parallel map.

The objectives in this package are minima of mutual-information terms:
piecewise smooth, not concave in general.  The strategy throughout is
multi-start (canonical seeds + seeded random draws + coarse grid points)
followed by projected coordinate ascent, one simplex block at a time, with
golden-section searches along segments toward block vertices.  Results are
deterministic given the seed: restarts are indexed and the best value is
reduced in index order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

WORKERS_ENV = "CFMAC_WORKERS"

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    """Search configuration shared by the discrete and Gaussian optimizers.

    ``grid_resolution`` is the step used when seeding from probability-simplex
    grids; ``card_u``/``card_v1``/``card_v2`` set the auxiliary alphabet sizes
    (no cardinality bounds are claimed; results are inner-bound lower bounds).
    ``c_split_points`` is the per-axis grid size for the (c10, c20) search.
    """

    grid_resolution: float = 0.1
    ascent_iters: int = 30
    restarts: int = 20
    seed: int = 0
    card_u: int = 2
    card_v1: int = 2
    card_v2: int = 2
    c_split_points: int = 11

    def __post_init__(self):
        if not (0.0 < self.grid_resolution <= 0.5):
            raise ValueError("grid_resolution must be in (0, 0.5]")
        for name in ("card_u", "card_v1", "card_v2"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.ascent_iters < 1 or self.restarts < 1 or self.c_split_points < 2:
            raise ValueError("ascent_iters, restarts >= 1; c_split_points >= 2")

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic RNG substream for (seed, key...); safe under any
    scheduling order."""
    return np.random.default_rng([int(seed) & 0x7FFFFFFF, *map(int, key)])


def resolve_workers(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, workers=None) -> list:
    """Ordered map; results are identical for any worker count."""
    nw = resolve_workers(workers)
    items = list(items)
    if nw <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Golden-section search
# ---------------------------------------------------------------------------


def golden_max(f: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-10, max_iter: int = 80) -> tuple[float, float]:
    """Maximize f on [lo, hi]; returns (x, f(x)).

    Assumes f is unimodal on the interval; for the piecewise objectives here
    that holds along short segments, and multi-start absorbs the rest.
    Endpoints are always evaluated so a monotone f still lands correctly.
    """
    if hi <= lo:
        return lo, f(lo)
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        it += 1
    cands = [(lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)]
    return max(cands, key=lambda t: t[1])


# ---------------------------------------------------------------------------
# Simplex utilities
# ---------------------------------------------------------------------------


def uniform_simplex(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def simplex_vertex(n: int, k: int) -> np.ndarray:
    v = np.zeros(n)
    v[k] = 1.0
    return v


def snap_to_grid(p: np.ndarray, resolution: float) -> np.ndarray:
    """Round a simplex point onto the grid of the given step and renormalize."""
    q = np.round(np.asarray(p, dtype=float) / resolution) * resolution
    q = np.clip(q, 0.0, None)
    s = q.sum()
    if s <= 0:
        return uniform_simplex(p.size)
    return q / s


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def simplex_grid(n: int, resolution: float, limit: int = 20000) -> np.ndarray:
    """All points of the n-simplex with coordinates that are multiples of
    ``resolution``; empty array if the enumeration would exceed ``limit``."""
    steps = int(round(1.0 / resolution))
    from math import comb

    if comb(steps + n - 1, n - 1) > limit:
        return np.empty((0, n))
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)

    rec([], steps, n)
    return np.asarray(out, dtype=float) / steps


# ---------------------------------------------------------------------------
# Block coordinate ascent over simplex blocks
# ---------------------------------------------------------------------------


def ascend_blocks(
    blocks: list[np.ndarray],
    evaluate: Callable[[list[np.ndarray]], float],
    iters: int = 30,
    feasible_tmax: Callable[[list[np.ndarray], int, np.ndarray], float] | None = None,
    line_tol: float = 1e-6,
    improve_tol: float = 1e-11,
) -> tuple[list[np.ndarray], float]:
    """Maximize ``evaluate`` over a list of probability-simplex blocks.

    Each sweep tries, for every block, golden-section line searches along the
    segments from the current block value toward each of its vertices.
    ``feasible_tmax(blocks, i, direction)`` may shrink the admissible segment
    (used for the correlation-budget constraint); the current point is always
    assumed feasible, so t=0 stays admissible.
    """
    blocks = [np.array(b, dtype=float) for b in blocks]
    best = evaluate(blocks)
    for _ in range(iters):
        improved = False
        for i, block in enumerate(blocks):
            n = block.size
            if n < 2:
                continue
            for k in range(n):
                direction = simplex_vertex(n, k) - block
                if np.abs(direction).max() < 1e-14:
                    continue
                tmax = 1.0
                if feasible_tmax is not None:
                    tmax = feasible_tmax(blocks, i, direction)
                    if tmax <= 1e-12:
                        continue

                def phi(t, _i=i, _b=block, _d=direction):
                    trial = blocks.copy()
                    trial[_i] = _b + t * _d
                    return evaluate(trial)

                t, val = golden_max(phi, 0.0, tmax, tol=line_tol)
                if val > best + improve_tol:
                    block = block + t * direction
                    np.clip(block, 0.0, None, out=block)
                    block /= block.sum()
                    blocks[i] = block
                    best = val
                    improved = True
        if not improved:
            break
    return blocks, evaluate(blocks)


def best_of(candidates) -> tuple[int, float]:
    """Index-ordered argmax over (value) pairs: ties go to the lowest index,
    so reductions are deterministic however the work was scheduled."""
    best_i, best_v = -1, -np.inf
    for i, v in enumerate(candidates):
        if v > best_v:
            best_i, best_v = i, v
    return best_i, best_v


# ---------------------------------------------------------------------------
# Box coordinate ascent (for the Gaussian parameter search)
# ---------------------------------------------------------------------------


def ascend_box(
    x: np.ndarray,
    evaluate: Callable[[np.ndarray], float],
    interval: Callable[[np.ndarray, int], tuple[float, float]],
    iters: int = 40,
    line_tol: float = 1e-9,
    improve_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Coordinate ascent over a box with coordinate-dependent intervals.

    ``interval(x, i)`` returns the admissible [lo, hi] for coordinate i given
    the rest of x; the current value is clipped into it first (constraints
    here are monotone couplings, so clipping preserves feasibility).
    """
    x = np.array(x, dtype=float)
    for i in range(x.size):
        lo, hi = interval(x, i)
        x[i] = min(max(x[i], lo), hi)
    best = evaluate(x)
    for _ in range(iters):
        improved = False
        for i in range(x.size):
            lo, hi = interval(x, i)
            xi = min(max(x[i], lo), hi)

            def phi(t, _i=i):
                trial = x.copy()
                trial[_i] = t
                return evaluate(trial)

            t, val = golden_max(phi, lo, hi, tol=line_tol)
            if val > best + improve_tol:
                x[i] = t
                best = val
                improved = True
            else:
                x[i] = xi
        if not improved:
            break
    return x, evaluate(x)
