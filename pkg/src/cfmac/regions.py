"""2-D rate-region geometry and the conferencing-encoders region.

Convex, downward-closed regions are represented by sampled support points:
for K weight directions w(theta) = (cos theta, sin theta), theta in [0, 90
degrees], we store the achieved rate pair maximizing w . (R1, R2).  This
representation composes cleanly: supports add under Minkowski sums, scale
under dilation, and membership is a half-plane test against the sampled
directions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import probability as prob
from .channels import DiscreteMAC
from .optimize import (
    OptimizerConfig,
    ascend_blocks,
    random_simplex,
    snap_to_grid,
    substream,
    uniform_simplex,
)

DEFAULT_ANGLES = 65

# Capacities passed as "infinite" are capped here; no mutual information on
# the alphabets this package targets can reach it, so the cap is inactive.
CAP_BITS = 10.0


def angle_grid(k: int = DEFAULT_ANGLES) -> np.ndarray:
    if k < 2:
        raise ValueError("need at least two angles")
    return np.linspace(0.0, math.pi / 2.0, k)


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        if not (math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise ValueError("rates must be finite")
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError("rates must be nonnegative")

    def as_tuple(self) -> tuple[float, float]:
        return (self.r1, self.r2)


@dataclass(frozen=True)
class ConferenceCapacities:
    c12: float
    c21: float

    def __post_init__(self):
        if not (math.isfinite(self.c12) and math.isfinite(self.c21)):
            raise ValueError("conference capacities must be finite")
        if self.c12 < 0 or self.c21 < 0:
            raise ValueError("conference capacities must be nonnegative")


def _argmax_point(points: np.ndarray, w1: float, w2: float) -> np.ndarray:
    """Support-attaining point among candidates; ties prefer larger r1+r2,
    then larger r1, so Pareto corners win at axis-aligned directions."""
    score = w1 * points[:, 0] + w2 * points[:, 1]
    key = score + 1e-12 * (points[:, 0] + points[:, 1]) + 1e-15 * points[:, 0]
    return points[int(np.argmax(key))]


@dataclass(frozen=True)
class RateRegion:
    """Upper-right frontier of a convex, downward-closed rate region.

    ``boundary[k]`` is the achieved pair generated at direction ``angles[k]``
    (radians).  Points are Pareto-sorted: r1 nondecreasing, r2 nonincreasing.
    """

    boundary: tuple[RatePair, ...]
    angles: tuple[float, ...]

    def __post_init__(self):
        boundary = tuple(
            p if isinstance(p, RatePair) else RatePair(float(p[0]), float(p[1]))
            for p in self.boundary
        )
        if not boundary:
            raise ValueError("boundary must be nonempty")
        if len(self.angles) != len(boundary):
            raise ValueError("angles and boundary must have equal length")
        order = sorted(range(len(boundary)),
                       key=lambda i: (boundary[i].r1, -boundary[i].r2))
        object.__setattr__(self, "boundary", tuple(boundary[i] for i in order))
        object.__setattr__(self, "angles",
                           tuple(float(self.angles[i]) for i in order))

    # -- geometry ------------------------------------------------------------

    def _points(self) -> np.ndarray:
        return np.array([[p.r1, p.r2] for p in self.boundary])

    def support(self, theta: float) -> float:
        """max of cos(theta)*r1 + sin(theta)*r2 over the region."""
        pts = self._points()
        return float(np.max(math.cos(theta) * pts[:, 0]
                            + math.sin(theta) * pts[:, 1]))

    def support_point(self, theta: float) -> RatePair:
        p = _argmax_point(self._points(), math.cos(theta), math.sin(theta))
        return RatePair(float(p[0]), float(p[1]))

    def max_sum_rate(self) -> float:
        pts = self._points()
        return float(np.max(pts.sum(axis=1)))

    def scale(self, factor: float) -> "RateRegion":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        return RateRegion(
            tuple(RatePair(factor * p.r1, factor * p.r2) for p in self.boundary),
            self.angles,
        )

    def validate(self, cross_tol: float = 1e-9) -> None:
        """Check Pareto ordering and convexity of the stored frontier."""
        pts = self._points()
        d1 = np.diff(pts[:, 0])
        d2 = np.diff(pts[:, 1])
        if d1.size and (d1.min() < -1e-12 or d2.max() > 1e-12):
            raise ValueError("frontier is not Pareto-sorted")
        for i in range(len(pts) - 2):
            a = pts[i + 1] - pts[i]
            b = pts[i + 2] - pts[i + 1]
            cross = a[0] * b[1] - a[1] * b[0]
            if cross > cross_tol:
                raise ValueError(f"frontier not convex at vertex {i + 1}: "
                                 f"cross={cross:.3e}")

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "boundary": [[p.r1, p.r2] for p in self.boundary],
            "angles": list(self.angles),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RateRegion":
        boundary = [RatePair(float(a), float(b)) for a, b in obj["boundary"]]
        angles = obj.get("angles")
        if angles is None:
            angles = list(angle_grid(max(2, len(boundary))))[: len(boundary)]
        return cls(tuple(boundary), tuple(angles))

    def to_csv(self) -> str:
        lines = ["r1,r2"]
        lines += [f"{p.r1:.12g},{p.r2:.12g}" for p in self.boundary]
        return "\n".join(lines) + "\n"


def region_from_points(points, angles) -> RateRegion:
    """Build a region from achieved points: at each direction, keep the
    support-attaining candidate.  Using only achieved (feasible) points keeps
    the result an inner bound while smoothing per-angle optimizer jitter."""
    pts = np.asarray([[p[0], p[1]] for p in points], dtype=float)
    pts = np.clip(pts, 0.0, None)
    chosen = [
        _argmax_point(pts, math.cos(th), math.sin(th)) for th in angles
    ]
    return RateRegion(
        tuple(RatePair(float(p[0]), float(p[1])) for p in chosen),
        tuple(angles),
    )


def point_region(r1: float = 0.0, r2: float = 0.0,
                 k: int = 2) -> RateRegion:
    th = angle_grid(k)
    return RateRegion(tuple(RatePair(r1, r2) for _ in th), tuple(th))


def contains(region: RateRegion, p: RatePair, tol: float = 1e-6) -> bool:
    """Membership in the downward closure of the frontier, with slack tol."""
    if isinstance(p, tuple):
        p = RatePair(*p)
    if p.r1 < -tol or p.r2 < -tol:
        return False
    pts = region._points()
    for th in region.angles:
        w1, w2 = math.cos(th), math.sin(th)
        h = float(np.max(w1 * pts[:, 0] + w2 * pts[:, 1]))
        if w1 * p.r1 + w2 * p.r2 > h + tol:
            return False
    return True


def minkowski_sum(a: RateRegion, b: RateRegion) -> RateRegion:
    """Setwise sum; supports add, and the support point of the sum is the
    sum of the support points (both regions are convex)."""
    if a.angles == b.angles:
        angles = a.angles
    else:
        angles = tuple(sorted(set(a.angles) | set(b.angles)))
    pa = a._points()
    pb = b._points()
    pts = []
    for th in angles:
        w1, w2 = math.cos(th), math.sin(th)
        pts.append(_argmax_point(pa, w1, w2) + _argmax_point(pb, w1, w2))
    return RateRegion(
        tuple(RatePair(float(p[0]), float(p[1])) for p in pts), angles
    )


# ---------------------------------------------------------------------------
# Conferencing-encoders region
# ---------------------------------------------------------------------------
#
# With conference capacities (c12, c21) the achievable pairs satisfy
#   R1 <= I(X1;Y|X2,U) + c12
#   R2 <= I(X2;Y|X1,U) + c21
#   R1 + R2 <= I(X1,X2;Y|U) + c12 + c21
#   R1 + R2 <= I(X1,X2;Y)
# for some P(u) P(x1|u) P(x2|u); we sample the frontier by maximizing the
# weighted rate over those distributions at each direction.


def _pentagon_support(w1, w2, a1, a2, s):
    """Support and argmax vertex of {0<=R1<=a1, 0<=R2<=a2, R1+R2<=s}."""
    t1 = min(a1, s)
    t2 = min(a2, s)
    verts = np.array([
        (t1, min(a2, s - t1)),
        (min(a1, s - t2), t2),
        (t1, 0.0),
        (0.0, t2),
        (0.0, 0.0),
    ])
    v = _argmax_point(verts, w1, w2)
    return float(w1 * v[0] + w2 * v[1]), (float(v[0]), float(v[1]))


def _conferencing_caps(channel: DiscreteMAC, pu, px1, px2, conf):
    """The three pentagon parameters for one P(u)P(x1|u)P(x2|u)."""
    joint = np.einsum("u,ux,uz->uxz", pu, px1, px2)
    d = prob.JointDist(
        (prob.Axis(prob.AX_U, pu.size),
         prob.Axis(prob.AX_X1, channel.card_x1),
         prob.Axis(prob.AX_X2, channel.card_x2)),
        joint,
    )
    dy = prob.push_through_channel(d, channel)
    a1 = prob.conditional_mutual_information(dy, ("X1",), ("Y",), ("X2", "U"))
    a2 = prob.conditional_mutual_information(dy, ("X2",), ("Y",), ("X1", "U"))
    su = prob.conditional_mutual_information(dy, ("X1", "X2"), ("Y",), ("U",))
    sj = prob.mutual_information(dy, ("X1", "X2"), ("Y",))
    c12 = min(conf.c12, CAP_BITS)
    c21 = min(conf.c21, CAP_BITS)
    return a1 + c12, a2 + c21, min(su + c12 + c21, sj)


def _conf_blocks_to_params(blocks):
    # Blocks are self-describing: [p(u)] + cu rows of p(x1|u) + cu of p(x2|u).
    cu = blocks[0].size
    pu = blocks[0]
    px1 = np.stack(blocks[1:1 + cu])
    px2 = np.stack(blocks[1 + cu:1 + 2 * cu])
    return pu, px1, px2


def _conferencing_search(channel, conf, opt: OptimizerConfig, angles,
                         extra_seeds=None):
    """Frontier search; returns (points per angle, argmax blocks per angle)."""
    cu, cx1, cx2 = opt.card_u, channel.card_x1, channel.card_x2

    def seeds_for(rng, count):
        out = [[uniform_simplex(cu)] + [uniform_simplex(cx1)] * cu
               + [uniform_simplex(cx2)] * cu]
        for _ in range(count):
            cand = [random_simplex(rng, cu)]
            cand += [random_simplex(rng, cx1) for _ in range(cu)]
            cand += [random_simplex(rng, cx2) for _ in range(cu)]
            out.append(cand)
            out.append([snap_to_grid(b, opt.grid_resolution) for b in cand])
        return out

    points, argmaxes = [], []
    prev_best = None
    for k, th in enumerate(angles):
        w1, w2 = math.cos(th), math.sin(th)

        def value_and_point(blocks):
            pu, px1, px2 = _conf_blocks_to_params(blocks)
            a1, a2, s = _conferencing_caps(channel, pu, px1, px2, conf)
            return _pentagon_support(w1, w2, a1, a2, s)

        def evaluate(blocks):
            return value_and_point(blocks)[0]

        rng = substream(opt.seed, 101, k)
        n_fresh = opt.restarts if k == 0 else max(2, opt.restarts // 5)
        pool = seeds_for(rng, n_fresh)
        if prev_best is not None:
            pool.insert(0, prev_best)
        if extra_seeds:
            pool = list(extra_seeds) + pool

        best_blocks, best_val = None, -np.inf
        for cand in pool:
            blocks, val = ascend_blocks(cand, evaluate, iters=opt.ascent_iters)
            if val > best_val + 1e-13:
                best_blocks, best_val = blocks, val
        _, pt = value_and_point(best_blocks)
        points.append(pt)
        argmaxes.append(best_blocks)
        prev_best = best_blocks
    return points, argmaxes


def conferencing_region(
    channel: DiscreteMAC,
    conf: ConferenceCapacities,
    search: OptimizerConfig | None = None,
    angles: int = DEFAULT_ANGLES,
) -> RateRegion:
    """Frontier of the conferencing-encoders region of ``channel``."""
    opt = search or OptimizerConfig()
    th = angle_grid(angles)
    points, _ = _conferencing_search(channel, conf, opt, th)
    return region_from_points(points, th)


def cf_conferencing_bounds(
    channel: DiscreteMAC,
    c1_in: float, c2_in: float, c1_out: float, c2_out: float,
    search: OptimizerConfig | None = None,
    angles: int = DEFAULT_ANGLES,
) -> tuple[RateRegion, RateRegion]:
    """Conferencing sandwich for the facilitator model: the inner region uses
    capacities (min(c1_in, c2_out), min(c2_in, c1_out)); the outer uses
    (c1_in, c2_in).  The outer search is warm-started from the inner argmax
    at every direction, so inner <= outer holds at all sampled angles."""
    for c in (c1_in, c2_in, c1_out, c2_out):
        if c < 0:
            raise ValueError("capacities must be nonnegative")
    opt = search or OptimizerConfig()
    th = angle_grid(angles)
    inner_conf = ConferenceCapacities(min(c1_in, c2_out), min(c2_in, c1_out))
    outer_conf = ConferenceCapacities(c1_in, c2_in)
    inner_pts, inner_args = _conferencing_search(channel, inner_conf, opt, th)
    outer_pts, _ = _conferencing_search(channel, outer_conf, opt, th,
                                        extra_seeds=inner_args)
    inner = region_from_points(inner_pts, th)
    outer_all = list(outer_pts)
    # Any inner point is feasible for the outer region too.
    outer = region_from_points(outer_all + inner_pts, th)
    return inner, outer
