"""Discrete MACs with a cooperation facilitator: the six-bound achievable
region, its sum-rate optimization, the interpolation construction behind the
low-capacity gain lower bound, and the simplified region for unbounded
facilitator input links.

Rate bookkeeping: the facilitator has input links (c1_in, c2_in) and output
links (c1_out, c2_out); splits (c10, c20) say how much output rate relays the
other encoder's message bits (conferencing), the rest coordinates the
auxiliary codewords, constrained by I(V1;V2|U) against the leftover budget
(c1_out - c20) + (c2_out - c10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import probability as prob
from .channels import DiscreteMAC
from .optimize import (
    OptimizerConfig,
    ascend_blocks,
    golden_max,
    random_simplex,
    snap_to_grid,
    substream,
    uniform_simplex,
)
from .probability import (
    AX_U,
    AX_V1,
    AX_V2,
    AX_X1,
    AX_X2,
    AX_Y,
    Axis,
    FactorizedInput,
    JointDist,
    entropy_of,
)
from .regions import (
    CAP_BITS,
    DEFAULT_ANGLES,
    RateRegion,
    _pentagon_support,
    angle_grid,
    region_from_points,
)

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class CFConfig:
    """Facilitator link capacities plus the conferencing split (bits/use).

    The split must fit through both hops: c10 <= min(c1_in, c2_out) and
    c20 <= min(c2_in, c1_out).
    """

    c1_in: float
    c2_in: float
    c1_out: float
    c2_out: float
    c10: float = 0.0
    c20: float = 0.0

    def __post_init__(self):
        vals = (self.c1_in, self.c2_in, self.c1_out, self.c2_out,
                self.c10, self.c20)
        if any((not math.isfinite(v)) or v < 0 for v in vals):
            raise ValueError("capacities must be finite and nonnegative")
        if self.c10 > min(self.c1_in, self.c2_out) + FEAS_TOL:
            raise ValueError(
                f"c10={self.c10} exceeds min(c1_in, c2_out)="
                f"{min(self.c1_in, self.c2_out)}"
            )
        if self.c20 > min(self.c2_in, self.c1_out) + FEAS_TOL:
            raise ValueError(
                f"c20={self.c20} exceeds min(c2_in, c1_out)="
                f"{min(self.c2_in, self.c1_out)}"
            )

    @property
    def coordination_budget(self) -> float:
        return (self.c1_out - self.c20) + (self.c2_out - self.c10)


@dataclass(frozen=True)
class BoundRecord:
    """All rate caps of the six-bound region at one input distribution.

    ``r1_caps``/``r2_caps`` hold the two per-user caps; ``sum_caps`` holds the
    sum caps with the mixed bound instantiated at both (i, j) orderings, so it
    carries five values.  ``slack`` is the leftover coordination budget after
    paying for I(V1;V2|U); the input is usable iff slack >= -1e-12.
    """

    r1_caps: tuple[float, float]
    r2_caps: tuple[float, float]
    sum_caps: tuple[float, float, float, float, float]
    feasible: bool
    slack: float

    def sum_rate(self) -> float:
        """Largest R1+R2 in the polytope these caps carve out."""
        return min(min(self.sum_caps),
                   min(self.r1_caps) + min(self.r2_caps))

    def support(self, w1: float, w2: float) -> tuple[float, tuple[float, float]]:
        """Support value and attaining rate pair in direction (w1, w2)."""
        return _pentagon_support(
            w1, w2, min(self.r1_caps), min(self.r2_caps), min(self.sum_caps)
        )


# ---------------------------------------------------------------------------
# Fast bound evaluation on raw tensors
# ---------------------------------------------------------------------------

# Axis order of the expanded joint: (U, V1, V2, X1, X2, Y) = (0,1,2,3,4,5).
_U, _V1, _V2, _X1, _X2, _Y = range(6)


def _entropies(jy: np.ndarray):
    cache: dict[tuple, float] = {}

    def H(*keep: int) -> float:
        key = keep
        if key not in cache:
            drop = tuple(i for i in range(6) if i not in keep)
            cache[key] = entropy_of(jy.sum(axis=drop) if drop else jy)
        return cache[key]

    return H


def _mi_terms(jy: np.ndarray) -> dict[str, float]:
    """The nine mutual-information terms of the region, plus I(V1;V2|U)."""
    H = _entropies(jy)
    nn = lambda v: max(0.0, v)
    full = H(_U, _V1, _V2, _X1, _X2, _Y)
    return {
        # per-user caps
        "x1y_uvvx2": nn(H(_U, _V1, _V2, _X1, _X2) + H(_U, _V1, _V2, _X2, _Y)
                        - full - H(_U, _V1, _V2, _X2)),
        "x2y_uvvx1": nn(H(_U, _V1, _V2, _X1, _X2) + H(_U, _V1, _V2, _X1, _Y)
                        - full - H(_U, _V1, _V2, _X1)),
        "x1y_uv2x2": nn(H(_U, _V2, _X1, _X2) + H(_U, _V2, _X2, _Y)
                        - H(_U, _V2, _X1, _X2, _Y) - H(_U, _V2, _X2)),
        "x2y_uv1x1": nn(H(_U, _V1, _X1, _X2) + H(_U, _V1, _X1, _Y)
                        - H(_U, _V1, _X1, _X2, _Y) - H(_U, _V1, _X1)),
        # sum caps
        "xxy_uvv": nn(H(_U, _V1, _V2, _X1, _X2) + H(_U, _V1, _V2, _Y)
                      - full - H(_U, _V1, _V2)),
        "xxy_uv1": nn(H(_U, _V1, _X1, _X2) + H(_U, _V1, _Y)
                      - H(_U, _V1, _X1, _X2, _Y) - H(_U, _V1)),
        "xxy_uv2": nn(H(_U, _V2, _X1, _X2) + H(_U, _V2, _Y)
                      - H(_U, _V2, _X1, _X2, _Y) - H(_U, _V2)),
        "xxy_u": nn(H(_U, _X1, _X2) + H(_U, _Y)
                    - H(_U, _X1, _X2, _Y) - H(_U)),
        "xxy": nn(H(_X1, _X2) + H(_Y) - H(_X1, _X2, _Y)),
        # coordination cost
        "v1v2_u": nn(H(_U, _V1) + H(_U, _V2) - H(_U, _V1, _V2) - H(_U)),
    }


def _expand_raw(p3: np.ndarray, c1: np.ndarray, c2: np.ndarray,
                transition: np.ndarray) -> np.ndarray:
    j = np.einsum("uvw,uvx,uwy->uvwxy", p3, c1, c2)
    return np.einsum("uvwxy,xyz->uvwxyz", j, transition)


def _record_from_terms(mi: dict[str, float], cf: CFConfig) -> BoundRecord:
    c1i = min(cf.c1_in, CAP_BITS)
    c2i = min(cf.c2_in, CAP_BITS)
    slack = cf.coordination_budget - mi["v1v2_u"]
    return BoundRecord(
        r1_caps=(mi["x1y_uvvx2"] + c1i, mi["x1y_uv2x2"] + cf.c10),
        r2_caps=(mi["x2y_uvvx1"] + c2i, mi["x2y_uv1x1"] + cf.c20),
        sum_caps=(
            mi["xxy_uvv"] + c1i + c2i,
            mi["xxy_uv1"] + c1i + cf.c20,
            mi["xxy_uv2"] + c2i + cf.c10,
            mi["xxy_u"] + cf.c10 + cf.c20,
            mi["xxy"],
        ),
        feasible=bool(slack >= -FEAS_TOL),
        slack=slack,
    )


def evaluate_bounds(channel: DiscreteMAC, finput: FactorizedInput,
                    cf: CFConfig) -> BoundRecord:
    """Evaluate all six bound families at one factorized input."""
    if finput.card_x1 != channel.card_x1 or finput.card_x2 != channel.card_x2:
        raise ValueError(
            f"input alphabets ({finput.card_x1},{finput.card_x2}) do not "
            f"match channel ({channel.card_x1},{channel.card_x2})"
        )
    jy = _expand_raw(finput.p_uv1v2.probs, finput.p_x1_given_uv1,
                     finput.p_x2_given_uv2, channel.transition)
    return _record_from_terms(_mi_terms(jy), cf)


# ---------------------------------------------------------------------------
# Classical and dependent sum capacities
# ---------------------------------------------------------------------------


def _product_information(channel: DiscreteMAC, p1s: np.ndarray,
                         p2s: np.ndarray) -> np.ndarray:
    """I(X1,X2;Y) for every pair of rows of p1s x p2s (vectorized)."""
    t = channel.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.where(t > prob.ZERO_TOL, np.log2(np.where(t > 0, t, 1.0)), 0.0)
    h_rows = -(t * logt).sum(axis=-1)  # H(Y|x1,x2)
    py = np.einsum("ai,bj,ijy->aby", p1s, p2s, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpy = np.where(py > prob.ZERO_TOL, np.log2(np.where(py > 0, py, 1.0)), 0.0)
    hy = -(py * logpy).sum(axis=-1)
    hygx = np.einsum("ai,bj,ij->ab", p1s, p2s, h_rows)
    return hy - hygx


def _classical_argmax(channel: DiscreteMAC, opt: OptimizerConfig):
    from .optimize import simplex_grid

    res = opt.grid_resolution
    g1 = simplex_grid(channel.card_x1, res)
    g2 = simplex_grid(channel.card_x2, res)
    if g1.size == 0 or g2.size == 0:
        g1 = np.stack([uniform_simplex(channel.card_x1)]
                      + [random_simplex(substream(opt.seed, 11, i),
                                        channel.card_x1) for i in range(200)])
        g2 = np.stack([uniform_simplex(channel.card_x2)]
                      + [random_simplex(substream(opt.seed, 12, i),
                                        channel.card_x2) for i in range(200)])
    vals = _product_information(channel, g1, g2)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    p1, p2 = g1[i].copy(), g2[j].copy()

    def evaluate(blocks):
        return float(_product_information(
            channel, blocks[0][None, :], blocks[1][None, :])[0, 0])

    (p1, p2), value = ascend_blocks([p1, p2], evaluate, iters=opt.ascent_iters)
    return value, p1, p2


def classical_sum_capacity(channel: DiscreteMAC,
                           opt: OptimizerConfig | None = None) -> float:
    """max over independent inputs P(x1)P(x2) of I(X1,X2;Y), in bits.

    Grid search at ``opt.grid_resolution`` polished by coordinate ascent; a
    lower bound up to the stated resolution.
    """
    opt = opt or OptimizerConfig()
    return _classical_argmax(channel, opt)[0]


def _blahut_arimoto(w: np.ndarray, tol: float = 1e-13,
                    max_iter: int = 20000) -> tuple[float, np.ndarray]:
    """Capacity (bits) and optimal input law for row-stochastic w(y|x)."""
    m = w.shape[0]
    r = np.full(m, 1.0 / m)
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.where(w > prob.ZERO_TOL, np.log2(np.where(w > 0, w, 1.0)), 0.0)
    neg_hrow = (w * logw).sum(axis=1)  # -H(Y|x)
    for _ in range(max_iter):
        q = r @ w
        with np.errstate(divide="ignore", invalid="ignore"):
            logq = np.where(q > prob.ZERO_TOL, np.log2(np.where(q > 0, q, 1.0)),
                            0.0)
        d = neg_hrow - (w * logq).sum(axis=1)  # D(w_x || q) in bits
        upper = float(d.max())
        lower = float((r * d).sum())
        if upper - lower < tol:
            break
        r = r * np.exp2(d - upper)
        r /= r.sum()
    q = r @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.where(q > prob.ZERO_TOL, np.log2(np.where(q > 0, q, 1.0)), 0.0)
    value = float((r * (neg_hrow - (w * logq).sum(axis=1))).sum())
    return max(0.0, value), r


def _dependent_argmax(channel: DiscreteMAC):
    w = channel.transition.reshape(channel.card_x1 * channel.card_x2,
                                   channel.card_y)
    value, r = _blahut_arimoto(w)
    return value, r.reshape(channel.card_x1, channel.card_x2)


def dependent_sum_capacity(channel: DiscreteMAC,
                           opt: OptimizerConfig | None = None) -> float:
    """max over joint inputs P(x1,x2) of I(X1,X2;Y), in bits.

    The objective is concave in the joint law, so the classic alternating
    maximization converges; iterations stop when the duality gap is < 1e-13.
    """
    return _dependent_argmax(channel)[0]


# ---------------------------------------------------------------------------
# Weighted-rate / sum-rate optimization over the six-bound region
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CFOptimum:
    """Best point found in one weight direction."""

    value: float
    point: tuple[float, float]
    c10: float
    c20: float
    finput: FactorizedInput
    record: BoundRecord

    def candidate(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.asarray(self.finput.p_uv1v2.probs),
                np.asarray(self.finput.p_x1_given_uv1),
                np.asarray(self.finput.p_x2_given_uv2))


def _caps4(caps) -> tuple[float, float, float, float]:
    c1i, c2i, c1o, c2o = (float(c) for c in caps)
    if min(c1i, c2i, c1o, c2o) < 0:
        raise ValueError("capacities must be nonnegative")
    return (min(c1i, CAP_BITS), min(c2i, CAP_BITS),
            min(c1o, CAP_BITS), min(c2o, CAP_BITS))


def _candidate_to_finput(cand) -> FactorizedInput:
    p3, c1, c2 = cand
    cu, cv1, cv2 = p3.shape
    p3 = np.clip(p3, 0.0, None)
    p3 = p3 / p3.sum()
    dist = JointDist((Axis(AX_U, cu), Axis(AX_V1, cv1), Axis(AX_V2, cv2)), p3)
    norm = lambda t: np.clip(t, 0.0, None) / np.clip(t, 0.0, None).sum(
        axis=-1, keepdims=True)
    return FactorizedInput(dist, norm(c1), norm(c2))


def _canonical_candidates(channel: DiscreteMAC, opt: OptimizerConfig,
                          max_budget: float):
    """Structured seeds: independent optimum, a (feasibility-blended) lift of
    the dependent optimum, and the uniform input."""
    cu, cv1, cv2 = opt.card_u, opt.card_v1, opt.card_v2
    cx1, cx2 = channel.card_x1, channel.card_x2
    out = []

    _, p1, p2 = _classical_argmax(channel, opt.with_(restarts=1))
    p3 = np.zeros((cu, cv1, cv2))
    p3[0, 0, 0] = 1.0
    c1 = np.broadcast_to(p1, (cu, cv1, cx1)).copy()
    c2 = np.broadcast_to(p2, (cu, cv2, cx2)).copy()
    out.append((p3, c1, c2))

    if cv1 >= cx1 and cv2 >= cx2:
        _, pb = _dependent_argmax(channel)
        lift = np.zeros((cu, cv1, cv2))
        lift[0, :cx1, :cx2] = pb
        indep = np.zeros((cu, cv1, cv2))
        indep[0, :cx1, :cx2] = np.outer(pb.sum(axis=1), pb.sum(axis=0))
        c1 = np.tile(np.vstack([np.eye(cx1),
                                np.full((cv1 - cx1, cx1), 1.0 / cx1)])[None],
                     (cu, 1, 1))
        c2 = np.tile(np.vstack([np.eye(cx2),
                                np.full((cv2 - cx2, cx2), 1.0 / cx2)])[None],
                     (cu, 1, 1))
        iv_lift = _mi_of_uvv(lift)
        if iv_lift <= max_budget + FEAS_TOL:
            out.append((lift, c1, c2))
        else:
            # Largest feasible interpolation toward the uncorrelated version.
            def iv_at(t):
                return _mi_of_uvv((1 - t) * indep + t * lift)

            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if iv_at(mid) <= max_budget:
                    lo = mid
                else:
                    hi = mid
            out.append(((1 - lo) * indep + lo * lift, c1, c2))
            out.append((indep, c1, c2))

    out.append((
        np.full((cu, cv1, cv2), 1.0 / (cu * cv1 * cv2)),
        np.full((cu, cv1, cx1), 1.0 / cx1),
        np.full((cu, cv2, cx2), 1.0 / cx2),
    ))
    return out


def _mi_of_uvv(p3: np.ndarray) -> float:
    """I(V1;V2|U) of a (possibly unnormalized) tensor over (U, V1, V2)."""
    p = np.clip(p3, 0.0, None)
    s = p.sum()
    if s <= 0:
        return 0.0
    p = p / s
    return max(0.0, entropy_of(p.sum(axis=2)) + entropy_of(p.sum(axis=1))
               - entropy_of(p) - entropy_of(p.sum(axis=(1, 2))))


def _random_candidates(channel, opt, rng, count):
    cu, cv1, cv2 = opt.card_u, opt.card_v1, opt.card_v2
    cx1, cx2 = channel.card_x1, channel.card_x2
    out = []
    for i in range(count):
        p3 = rng.dirichlet(np.ones(cu * cv1 * cv2)).reshape(cu, cv1, cv2)
        c1 = rng.dirichlet(np.ones(cx1), size=(cu, cv1))
        c2 = rng.dirichlet(np.ones(cx2), size=(cu, cv2))
        if i % 2 == 1:
            p3 = snap_to_grid(p3.ravel(), opt.grid_resolution).reshape(p3.shape)
        out.append((p3, c1, c2))
    return out


def _split_grid(caps, opt):
    c1i, c2i, c1o, c2o = caps
    hi10 = min(c1i, c2o)
    hi20 = min(c2i, c1o)
    g10 = np.linspace(0.0, hi10, opt.c_split_points) if hi10 > 0 else np.array([0.0])
    g20 = np.linspace(0.0, hi20, opt.c_split_points) if hi20 > 0 else np.array([0.0])
    return g10, g20


def _best_cell(mi, caps, g10, g20, w1, w2):
    """Best (c10, c20) grid cell for fixed mutual-information terms."""
    c1i, c2i, c1o, c2o = caps
    best = (-np.inf, 0.0, 0.0)
    for c10 in g10:
        for c20 in g20:
            if mi["v1v2_u"] > (c1o - c20) + (c2o - c10) + FEAS_TOL:
                continue
            r1 = min(mi["x1y_uvvx2"] + c1i, mi["x1y_uv2x2"] + c10)
            r2 = min(mi["x2y_uvvx1"] + c2i, mi["x2y_uv1x1"] + c20)
            s = min(mi["xxy_uvv"] + c1i + c2i,
                    mi["xxy_uv1"] + c1i + c20,
                    mi["xxy_uv2"] + c2i + c10,
                    mi["xxy_u"] + c10 + c20,
                    mi["xxy"])
            val, _ = _pentagon_support(w1, w2, r1, r2, s)
            if val > best[0] + 1e-15:
                best = (val, float(c10), float(c20))
    return best


def max_weighted_rate(channel: DiscreteMAC, caps, w1: float, w2: float,
                      opt: OptimizerConfig | None = None,
                      extra_seeds=None, stream: int = 0) -> CFOptimum:
    """Maximize w1*R1 + w2*R2 over the six-bound region: jointly over the
    conferencing split (grid) and the factorized input (multi-start projected
    coordinate ascent).  Deterministic given ``opt.seed``."""
    opt = opt or OptimizerConfig()
    caps = _caps4(caps)
    c1i, c2i, c1o, c2o = caps
    g10, g20 = _split_grid(caps, opt)
    max_budget = c1o + c2o
    t = channel.transition

    pool = list(extra_seeds) if extra_seeds else []
    pool += _canonical_candidates(channel, opt, max_budget)
    rng = substream(opt.seed, 202, stream)
    n_random = max(0, opt.restarts - len(pool))
    pool += _random_candidates(channel, opt, rng, n_random)

    # Phase 1: score every seed against every split cell (MI terms do not
    # depend on the split, so this is cheap).
    scored = []
    for cand in pool:
        mi = _mi_terms(_expand_raw(*cand, t))
        val, c10, c20 = _best_cell(mi, caps, g10, g20, w1, w2)
        scored.append((val, c10, c20, cand))
    scored.sort(key=lambda s: -s[0])

    # Phase 2: ascend the most promising seeds at their best cells.
    n_ascend = min(len(scored), max(3, opt.restarts // 4))
    best = None
    for val0, c10, c20, cand in scored[:n_ascend]:
        if not np.isfinite(val0):
            continue
        cand2, _ = _ascend_at_cell(channel, caps, c10, c20, w1, w2, cand, opt)
        mi = _mi_terms(_expand_raw(*cand2, t))
        val, bc10, bc20 = _best_cell(mi, caps, g10, g20, w1, w2)
        if bc10 != c10 or bc20 != c20:
            cand2, _ = _ascend_at_cell(channel, caps, bc10, bc20, w1, w2,
                                       cand2, opt)
            mi = _mi_terms(_expand_raw(*cand2, t))
            val, bc10, bc20 = _best_cell(mi, caps, g10, g20, w1, w2)
        if best is None or val > best[0] + 1e-13:
            best = (val, bc10, bc20, cand2)

    val, c10, c20, cand = best
    finput = _candidate_to_finput(cand)
    cf = CFConfig(c1i, c2i, c1o, c2o, c10, c20)
    record = evaluate_bounds(channel, finput, cf)
    value, point = record.support(w1, w2)
    return CFOptimum(value, point, c10, c20, finput, record)


def _ascend_at_cell(channel, caps, c10, c20, w1, w2, cand, opt):
    c1i, c2i, c1o, c2o = caps
    budget = (c1o - c20) + (c2o - c10)
    p3, c1t, c2t = cand
    cu, cv1, cv2 = p3.shape
    cx1, cx2 = channel.card_x1, channel.card_x2
    t = channel.transition

    def to_blocks(p3, c1t, c2t):
        blocks = [p3.ravel().copy()]
        blocks += [c1t[u, v].copy() for u in range(cu) for v in range(cv1)]
        blocks += [c2t[u, v].copy() for u in range(cu) for v in range(cv2)]
        return blocks

    def from_blocks(blocks):
        p3 = blocks[0].reshape(cu, cv1, cv2)
        k = 1
        c1t = np.empty((cu, cv1, cx1))
        for u in range(cu):
            for v in range(cv1):
                c1t[u, v] = blocks[k]
                k += 1
        c2t = np.empty((cu, cv2, cx2))
        for u in range(cu):
            for v in range(cv2):
                c2t[u, v] = blocks[k]
                k += 1
        return p3, c1t, c2t

    def evaluate(blocks):
        p3b, c1b, c2b = from_blocks(blocks)
        if _mi_of_uvv(p3b) > budget + 1e-9:
            return -np.inf
        mi = _mi_terms(_expand_raw(p3b, c1b, c2b, t))
        r1 = min(mi["x1y_uvvx2"] + c1i, mi["x1y_uv2x2"] + c10)
        r2 = min(mi["x2y_uvvx1"] + c2i, mi["x2y_uv1x1"] + c20)
        s = min(mi["xxy_uvv"] + c1i + c2i,
                mi["xxy_uv1"] + c1i + c20,
                mi["xxy_uv2"] + c2i + c10,
                mi["xxy_u"] + c10 + c20,
                mi["xxy"])
        return _pentagon_support(w1, w2, r1, r2, s)[0]

    def feasible_tmax(blocks, i, direction):
        if i != 0:
            return 1.0  # conditionals do not move I(V1;V2|U)
        base = blocks[0]
        if _mi_of_uvv((base + direction).reshape(cu, cv1, cv2)) <= budget:
            return 1.0
        lo, hi = 0.0, 1.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if _mi_of_uvv((base + mid * direction).reshape(cu, cv1, cv2)) \
                    <= budget:
                lo = mid
            else:
                hi = mid
        return lo

    # Make the starting point feasible for this cell if it is not.
    if _mi_of_uvv(p3) > budget + FEAS_TOL:
        indep = np.einsum("uv,uw,u->uvw", p3.sum(axis=2), p3.sum(axis=1),
                          _safe_inv(p3.sum(axis=(1, 2))))
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _mi_of_uvv((1 - mid) * indep + mid * p3) <= budget:
                lo = mid
            else:
                hi = mid
        p3 = (1 - lo) * indep + lo * p3
        p3 = np.clip(p3, 0, None)
        p3 /= p3.sum()

    blocks, value = ascend_blocks(
        to_blocks(p3, c1t, c2t), evaluate, iters=opt.ascent_iters,
        feasible_tmax=feasible_tmax,
    )
    return from_blocks(blocks), value


def _safe_inv(p: np.ndarray) -> np.ndarray:
    return np.where(p > prob.ZERO_TOL, 1.0 / np.where(p > 0, p, 1.0), 0.0)


def max_sum_rate(channel: DiscreteMAC, caps,
                 opt: OptimizerConfig | None = None) -> tuple[float, CFOptimum]:
    """Best achievable-region sum rate for facilitator capacities
    ``caps = (c1_in, c2_in, c1_out, c2_out)``; a lower bound on the channel's
    cooperative sum capacity."""
    best = max_weighted_rate(channel, caps, 1.0, 1.0, opt)
    return best.value, best


def cf_region(channel: DiscreteMAC, caps,
              opt: OptimizerConfig | None = None,
              angles: int = DEFAULT_ANGLES) -> RateRegion:
    region, _ = cf_region_with_argmax(channel, caps, opt, angles)
    return region


def cf_region_with_argmax(channel: DiscreteMAC, caps,
                          opt: OptimizerConfig | None = None,
                          angles: int = DEFAULT_ANGLES,
                          extra_seeds=None):
    """Support-sampled frontier of the six-bound region, with the per-angle
    optima (reused as warm starts by callers that mix regions)."""
    opt = opt or OptimizerConfig()
    th = angle_grid(angles)
    points, optima = [], []
    prev = None
    for k, theta in enumerate(th):
        seeds = list(extra_seeds) if extra_seeds else []
        if prev is not None:
            seeds.insert(0, prev.candidate())
        sub = opt if k == 0 else opt.with_(restarts=max(4, opt.restarts // 4))
        o = max_weighted_rate(channel, caps, math.cos(theta), math.sin(theta),
                              sub, extra_seeds=seeds, stream=k)
        points.append(o.point)
        optima.append(o)
        prev = o
    return region_from_points(points, th), optima


# ---------------------------------------------------------------------------
# Interpolation construction for the low-capacity gain bound
# ---------------------------------------------------------------------------


def lambda_mixture(pa: JointDist, pb: JointDist, lam: float) -> JointDist:
    """Interpolate between independent inputs and a dependent law, lifted to
    auxiliaries:

      P(v1,v2,x1,x2) = (1-lam) 1{v1=v1*} 1{v2=v2*} Pa(x1) Pa(x2)
                       + lam  Pb(v1,v2) 1{x1=v1} 1{x2=v2}

    where each V_i alphabet is X_i plus one sentinel symbol v_i* (the last
    index), and Pa enters through the product of its marginals.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must be in [0, 1]")
    if pa.names != (AX_X1, AX_X2) or pb.names != (AX_X1, AX_X2):
        raise ValueError("pa and pb must have axes (X1, X2)")
    cx1, cx2 = (a.card for a in pb.axes)
    if tuple(a.card for a in pa.axes) != (cx1, cx2):
        raise ValueError(
            f"alphabet mismatch: pa {tuple(a.card for a in pa.axes)} vs "
            f"pb {(cx1, cx2)}"
        )
    cv1, cv2 = cx1 + 1, cx2 + 1
    pa1 = pa.probs.sum(axis=1)
    pa2 = pa.probs.sum(axis=0)
    out = np.zeros((cv1, cv2, cx1, cx2))
    out[cx1, cx2] = (1.0 - lam) * np.outer(pa1, pa2)
    for v1 in range(cx1):
        for v2 in range(cx2):
            out[v1, v2, v1, v2] = lam * pb.probs[v1, v2]
    axes = (Axis(AX_V1, cv1), Axis(AX_V2, cv2),
            Axis(AX_X1, cx1), Axis(AX_X2, cx2))
    return JointDist(axes, out)


def mixture_v_information(pa: JointDist, pb: JointDist, lam: float) -> float:
    """I(V1;V2) of the interpolated law."""
    d = lambda_mixture(pa, pb, lam)
    return prob.mutual_information(d, (AX_V1,), (AX_V2,))


def solve_lambda_star(pa: JointDist, pb: JointDist, epsilon: float,
                      c_out: float, tol: float = 1e-10) -> float:
    """Solve I_lam(V1;V2) + 2 epsilon lam = 2 c_out for lam.

    The map is 0 at lam = 0 and increasing near 0; the root is found by a
    coarse bracketing scan followed by bisection.  Returns 1.0 if the map
    never reaches the target."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if c_out < 0:
        raise ValueError("c_out must be nonnegative")
    target = 2.0 * c_out
    if target == 0.0:
        return 0.0

    def m(lam):
        return mixture_v_information(pa, pb, lam) + 2.0 * epsilon * lam

    grid = np.linspace(0.0, 1.0, 65)
    vals = [m(l) for l in grid]
    hi_idx = next((i for i, v in enumerate(vals) if v >= target), None)
    if hi_idx is None:
        return 1.0
    if hi_idx == 0:
        return 0.0
    lo, hi = grid[hi_idx - 1], grid[hi_idx]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if m(mid) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GainCurveRow:
    c_out: float
    lambda_star: float
    g0: float
    g1: float
    g2: float
    g3: float
    min_index: int
    gain: float


def theorem1_gain_lower_bound(
    channel: DiscreteMAC,
    c_in: tuple[float, float],
    epsilon: float,
    c_out_grid,
    opt: OptimizerConfig | None = None,
    pb: JointDist | None = None,
) -> list[GainCurveRow]:
    """Gain lower-bound curve from the interpolation construction.

    Requires a channel where dependent inputs beat independent ones; raises
    otherwise.  Per grid point: solve for lambda*, form the interpolated law,
    evaluate g0 = I(X1,X2;Y) - I(V1;V2) and its three capacity-offset
    companions, and report the gain g0(c_out) - g0(0).
    """
    opt = opt or OptimizerConfig()
    c1, c2 = c_in
    if min(c1, c2) <= 0:
        raise ValueError("both facilitator input capacities must be positive")
    dep = dependent_sum_capacity(channel)
    cla, p1, p2 = _classical_argmax(channel, opt)
    if dep <= cla + 1e-6:
        raise ValueError("channel gains nothing from dependence: "
                         f"max_joint={dep:.6f} <= max_product={cla:.6f}")
    axes = (Axis(AX_X1, channel.card_x1), Axis(AX_X2, channel.card_x2))
    pa = JointDist(axes, np.outer(p1, p2))
    if pb is None:
        pb = JointDist(axes, _dependent_argmax(channel)[1])

    rows = []
    base = None
    for c_out in c_out_grid:
        lam = solve_lambda_star(pa, pb, epsilon, float(c_out))
        d = lambda_mixture(pa, pb, lam)
        dy = prob.push_through_channel(d, channel)
        i_xxy = prob.mutual_information(dy, (AX_X1, AX_X2), (AX_Y,))
        i_vv = prob.mutual_information(dy, (AX_V1,), (AX_V2,))
        g0 = i_xxy - i_vv
        g1 = prob.conditional_mutual_information(
            dy, (AX_X1, AX_X2), (AX_Y,), (AX_V1,)) + c1
        g2 = prob.conditional_mutual_information(
            dy, (AX_X1, AX_X2), (AX_Y,), (AX_V2,)) + c2
        g3 = prob.conditional_mutual_information(
            dy, (AX_X1, AX_X2), (AX_Y,), (AX_V1, AX_V2)) + c1 + c2
        gs = (g0, g1, g2, g3)
        if base is None:
            base_lam0 = prob.push_through_channel(
                lambda_mixture(pa, pb, 0.0), channel)
            base = prob.mutual_information(base_lam0, (AX_X1, AX_X2), (AX_Y,))
        rows.append(GainCurveRow(
            c_out=float(c_out), lambda_star=lam, g0=g0, g1=g1, g2=g2, g3=g3,
            min_index=int(np.argmin(gs)), gain=g0 - base,
        ))
    return rows


# ---------------------------------------------------------------------------
# Unbounded-input-link simplification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CinInfiniteBounds:
    """The four-bound region when the facilitator sees both messages."""

    r1_cap: float
    r2_cap: float
    sum_caps: tuple[float, float]
    feasible: bool
    slack: float

    def sum_rate(self) -> float:
        return min(min(self.sum_caps), self.r1_cap + self.r2_cap)


def cin_infinite_region_bounds(channel: DiscreteMAC, p_ux1x2: JointDist,
                               c1_out: float, c2_out: float,
                               c10: float, c20: float) -> CinInfiniteBounds:
    """Evaluate the simplified region for unbounded facilitator input links
    at an input law P(u, x1, x2)."""
    if c10 > c2_out + FEAS_TOL or c20 > c1_out + FEAS_TOL:
        raise ValueError("need c10 <= c2_out and c20 <= c1_out")
    if p_ux1x2.names != (AX_U, AX_X1, AX_X2):
        raise ValueError(f"input axes must be (U, X1, X2), got {p_ux1x2.names}")
    dy = prob.push_through_channel(p_ux1x2, channel)
    r1 = prob.conditional_mutual_information(dy, (AX_X1,), (AX_Y,),
                                             (AX_U, AX_X2)) + c10
    r2 = prob.conditional_mutual_information(dy, (AX_X2,), (AX_Y,),
                                             (AX_U, AX_X1)) + c20
    s1 = prob.conditional_mutual_information(dy, (AX_X1, AX_X2), (AX_Y,),
                                             (AX_U,)) + c10 + c20
    s2 = prob.mutual_information(dy, (AX_X1, AX_X2), (AX_Y,))
    i_xx_u = prob.conditional_mutual_information(dy, (AX_X1,), (AX_X2,),
                                                 (AX_U,))
    slack = (c1_out - c20) + (c2_out - c10) - i_xx_u
    return CinInfiniteBounds(
        r1_cap=r1, r2_cap=r2, sum_caps=(s1, s2),
        feasible=bool(slack >= -FEAS_TOL), slack=slack,
    )


# ---------------------------------------------------------------------------
# Region mixing (the convexity construction)
# ---------------------------------------------------------------------------


def mixture_witness(cand_a, cand_b, lam: float):
    """Combine two factorized-input candidates with a fresh branch symbol
    folded into U: the result is a valid input for capacities mixed with
    weight ``lam`` and achieves at least the mixed rate pair."""
    p3a, c1a, c2a = cand_a
    p3b, c1b, c2b = cand_b
    if p3a.shape[1:] != p3b.shape[1:]:
        raise ValueError("V alphabets must match to mix candidates")
    p3 = np.concatenate([lam * p3a, (1.0 - lam) * p3b], axis=0)
    c1 = np.concatenate([c1a, c1b], axis=0)
    c2 = np.concatenate([c2a, c2b], axis=0)
    return p3, c1, c2


def evaluate_candidate(channel: DiscreteMAC, cand, cf: CFConfig) -> BoundRecord:
    """Bound record for a raw (p(u,v1,v2), p(x1|u,v1), p(x2|u,v2)) triple."""
    return _record_from_terms(
        _mi_terms(_expand_raw(*cand, channel.transition)), cf
    )
