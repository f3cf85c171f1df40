"""Monte Carlo mutual-covering experiments on weakly typical sets.

A trial samples U^n, then two conditionally i.i.d. codebooks V1^n(a) and
V2^n(b) from the marginals P(v1|u) and P(v2|u), and asks whether some pair
(a, b) is jointly weakly typical with U^n.  Codebook sizes are ceil(2^{n r});
a budget guard rejects configurations whose worst-case work
size_a * size_b * n * trials exceeds the configured limit before any
sampling happens.

Per-trial RNG substreams keyed by (seed, trial, stream) make results
deterministic under any scheduling, and codebooks are prefix-nested in the
rates: raising r1 with the same seed only appends codewords, so coverage is
monotone in the rates trial by trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .optimize import parallel_map, substream
from .probability import AX_U, AX_V1, AX_V2, JointDist, entropy_of

DEFAULT_BUDGET = 1e9

# Finite stand-in for log2(0): any sequence containing a zero-probability
# symbol fails every typicality window without producing NaN in matmuls.
_NEG = -1e9

_SUBSETS = tuple(
    s for k in (1, 2, 3) for s in combinations((0, 1, 2), k)
)


class BudgetError(RuntimeError):
    """Worst-case simulation work exceeds the configured budget."""


@dataclass(frozen=True)
class CoveringExperiment:
    """One covering configuration: distribution, blocklength, codebook rates
    (bits/symbol), typicality slack, and the Monte Carlo trial count."""

    p_uv1v2: JointDist
    n: int
    r1: float
    r2: float
    delta: float
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.p_uv1v2.names != (AX_U, AX_V1, AX_V2):
            raise ValueError(
                f"distribution axes must be (U, V1, V2), got "
                f"{self.p_uv1v2.names}"
            )
        if self.n < 1:
            raise ValueError("blocklength n must be >= 1")
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError("rates must be nonnegative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def size_a(self) -> int:
        return max(1, math.ceil(2.0 ** (self.n * self.r1)))

    @property
    def size_b(self) -> int:
        return max(1, math.ceil(2.0 ** (self.n * self.r2)))

    def worst_case_work(self) -> float:
        return float(self.size_a) * float(self.size_b) * self.n * self.trials


class _Tables:
    """Entropies and clipped log2 tables for every nonempty subset of
    (U, V1, V2), plus the conditional samplers."""

    def __init__(self, p: JointDist):
        probs = p.probs
        self.cards = probs.shape
        self.h = {}
        self.log = {}
        for s in _SUBSETS:
            drop = tuple(i for i in range(3) if i not in s)
            marg = probs.sum(axis=drop) if drop else probs
            self.h[s] = entropy_of(marg)
            with np.errstate(divide="ignore"):
                table = np.where(marg > 0, np.log2(np.where(marg > 0, marg, 1.0)),
                                 _NEG)
            self.log[s] = table
        pu = probs.sum(axis=(1, 2))
        self.pu = pu
        self.cdf_u = np.cumsum(pu)
        safe_pu = np.where(pu > 0, pu, 1.0)
        self.cond1 = probs.sum(axis=2) / safe_pu[:, None]   # P(v1|u)
        self.cond2 = probs.sum(axis=1) / safe_pu[:, None]   # P(v2|u)
        # Rows for zero-probability u never get sampled; keep them valid.
        self.cond1[pu <= 0] = 1.0 / self.cards[1]
        self.cond2[pu <= 0] = 1.0 / self.cards[2]
        self.cdf1 = np.cumsum(self.cond1, axis=1)
        self.cdf2 = np.cumsum(self.cond2, axis=1)


def is_weakly_typical(u, v1, v2, p: JointDist, delta: float) -> bool:
    """Joint weak typicality of (u^n, v1^n, v2^n) under p: every nonempty
    sub-collection's empirical per-symbol surprisal is within delta of its
    entropy.  A zero-probability symbol anywhere makes the answer False."""
    if p.names != (AX_U, AX_V1, AX_V2):
        raise ValueError(f"distribution axes must be (U, V1, V2), got {p.names}")
    seqs = tuple(np.asarray(s, dtype=int) for s in (u, v1, v2))
    n = seqs[0].size
    if any(s.size != n for s in seqs):
        raise ValueError("sequences must share one length")
    t = _Tables(p)
    for s in _SUBSETS:
        idx = tuple(seqs[i] for i in s)
        score = -float(t.log[s][idx].mean())
        if abs(score - t.h[s]) > delta:
            return False
    return True


def _sample_conditional(cdf, u, uniforms):
    """Inverse-CDF sampling of codeword symbols given the common sequence."""
    thr = cdf[u]  # (n, card)
    return (uniforms[..., None] > thr[None, :, :-1]).sum(axis=-1)


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    hits: int
    trials: int
    stderr_estimate: float
    size_a: int
    size_b: int

    def to_json_dict(self, experiment: CoveringExperiment) -> dict:
        return {
            "coverage": self.coverage,
            "trials": self.trials,
            "stderr_estimate": self.stderr_estimate,
            "config": {
                "n": experiment.n,
                "r1": experiment.r1,
                "r2": experiment.r2,
                "delta": experiment.delta,
                "seed": experiment.seed,
                "size_a": self.size_a,
                "size_b": self.size_b,
            },
        }


def _trial_hit(e: CoveringExperiment, t: _Tables, trial: int,
               chunk: int = 256) -> bool:
    n, delta = e.n, e.delta
    rng_u = substream(e.seed, trial, 0)
    u = (rng_u.random(n)[:, None] > t.cdf_u[None, :-1]).sum(axis=1)

    score_u = -float(t.log[(0,)][u].mean())
    if abs(score_u - t.h[(0,)]) > delta:
        return False

    c1, c2 = t.cards[1], t.cards[2]
    eye1 = np.eye(c1)
    m12 = t.log[(1, 2)]
    m012 = t.log[(0, 1, 2)][u]        # (n, c1, c2)
    m01 = t.log[(0, 1)][u]            # (n, c1)
    m02 = t.log[(0, 2)][u]            # (n, c2)

    rng_a = substream(e.seed, trial, 1)
    rng_b = substream(e.seed, trial, 2)
    size_a, size_b = e.size_a, e.size_b

    # Lazily generated A-chunks, cached for reuse against later B-chunks.
    a_chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []

    def next_a_chunk(start):
        m = min(chunk, size_a - start)
        v1 = _sample_conditional(t.cdf1, u, rng_a.random((m, n)))
        s1 = t.log[(1,)][v1].mean(axis=1)
        s01 = m01[np.arange(n)[None, :], v1].mean(axis=1)
        mask = (np.abs(-s1 - t.h[(1,)]) <= delta) \
            & (np.abs(-s01 - t.h[(0, 1)]) <= delta)
        hot = eye1[v1]                      # (m, n, c1)
        t12 = hot @ m12                     # (m, n, c2)
        t012 = np.einsum("ati,tic->atc", hot, m012)
        return v1, mask, t12, t012

    def b_chunk(start):
        m = min(chunk, size_b - start)
        v2 = _sample_conditional(t.cdf2, u, rng_b.random((m, n)))
        s2 = t.log[(2,)][v2].mean(axis=1)
        s02 = m02[np.arange(n)[None, :], v2].mean(axis=1)
        mask = (np.abs(-s2 - t.h[(2,)]) <= delta) \
            & (np.abs(-s02 - t.h[(0, 2)]) <= delta)
        hot2 = np.eye(c2)[v2]               # (m, n, c2)
        return mask, hot2

    h12, h012 = t.h[(1, 2)], t.h[(0, 1, 2)]
    b_start = 0
    while b_start < size_b:
        mask_b, hot2 = b_chunk(b_start)
        b_start += hot2.shape[0]
        if len(a_chunks) == 0:
            a_start = 0
            while a_start < size_a:
                a_chunks.append(next_a_chunk(a_start))
                a_start += a_chunks[-1][0].shape[0]
                if _pairs_hit(a_chunks[-1], mask_b, hot2, n, delta, h12, h012):
                    return True
        else:
            for ac in a_chunks:
                if _pairs_hit(ac, mask_b, hot2, n, delta, h12, h012):
                    return True
    return False


def _pairs_hit(a_chunk, mask_b, hot2, n, delta, h12, h012) -> bool:
    _, mask_a, t12, t012 = a_chunk
    if not mask_a.any() or not mask_b.any():
        return False
    s12 = np.tensordot(t12, hot2, axes=([1, 2], [1, 2])) / n
    s012 = np.tensordot(t012, hot2, axes=([1, 2], [1, 2])) / n
    ok = (np.abs(-s12 - h12) <= delta) & (np.abs(-s012 - h012) <= delta)
    ok &= mask_a[:, None]
    ok &= mask_b[None, :]
    return bool(ok.any())


def simulate_coverage(e: CoveringExperiment, budget: float = DEFAULT_BUDGET,
                      workers=None) -> CoverageResult:
    """Empirical probability that some codeword pair is jointly typical.

    Raises BudgetError before any sampling if the worst-case work
    size_a * size_b * n * trials exceeds ``budget`` symbol-operations.
    """
    work = e.worst_case_work()
    if work > budget:
        raise BudgetError(
            f"worst-case work {work:.3e} symbol-ops exceeds budget "
            f"{budget:.3e} (sizes {e.size_a} x {e.size_b}, n={e.n}, "
            f"trials={e.trials})"
        )
    tables = _Tables(e.p_uv1v2)
    flags = parallel_map(lambda k: _trial_hit(e, tables, k), range(e.trials),
                         workers)
    hits = int(sum(flags))
    p = hits / e.trials
    stderr = math.sqrt(max(p * (1 - p), 0.0) / e.trials)
    return CoverageResult(coverage=p, hits=hits, trials=e.trials,
                          stderr_estimate=stderr, size_a=e.size_a,
                          size_b=e.size_b)


# ---------------------------------------------------------------------------
# Standard test distributions
# ---------------------------------------------------------------------------


def doubly_symmetric_pair(info_bits: float) -> JointDist:
    """Uniform-marginal correlated binary pair (degenerate U) with
    I(V1;V2) = info_bits; its uniform marginals keep the single-codeword
    typicality conditions exactly tight, so the pair condition is the only
    one that bites."""
    if not (0.0 < info_bits < 1.0):
        raise ValueError("info_bits must be in (0, 1)")
    # Solve 1 - h2(q) = info_bits for the disagreement probability q.
    lo, hi = 0.0, 0.5
    h2 = lambda q: 0.0 if q in (0.0, 1.0) else \
        -q * math.log2(q) - (1 - q) * math.log2(1 - q)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 1.0 - h2(mid) > info_bits:
            lo = mid
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    probs = np.array([[(1 - q) / 2, q / 2], [q / 2, (1 - q) / 2]])
    from .probability import Axis

    return JointDist(
        (Axis(AX_U, 1), Axis(AX_V1, 2), Axis(AX_V2, 2)),
        probs.reshape(1, 2, 2),
    )


def conditionally_independent_pair(card: int = 2) -> JointDist:
    """V1 and V2 independent given a uniform binary U (zero conditional
    information): each V_i = U with probability 0.8, flipped otherwise."""
    from .probability import Axis

    flip = 0.2
    cond = np.array([[1 - flip, flip], [flip, 1 - flip]])
    probs = 0.5 * np.einsum("uv,uw->uvw", cond, cond)
    return JointDist(
        (Axis(AX_U, 2), Axis(AX_V1, 2), Axis(AX_V2, 2)), probs
    )
