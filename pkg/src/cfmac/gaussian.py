"""Closed-form bounds and sum-rate optimization for the Gaussian MAC with a
cooperation facilitator.

With SNRs gamma_i and jointly Gaussian inputs parameterized by correlation
weights (rho_i0 toward the common part U, rho_id toward the coordinated part
V_i, the remainder rho_ii fresh), every bound of the achievable region has a
closed form in half-log2 terms.  The optimizers here search the small
parameter box directly; no sampling is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete import FEAS_TOL, BoundRecord, CFConfig
from .optimize import OptimizerConfig, ascend_box, golden_max
from .regions import CAP_BITS, _pentagon_support

LOG2 = math.log(2.0)


def half_log2(x):
    return 0.5 * np.log2(1.0 + x)


@dataclass(frozen=True)
class GaussianMAC:
    """Y = X1 + X2 + Z with SNRs gamma_i = P_i / N."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("SNRs must be positive")

    @property
    def gamma_bar(self) -> float:
        return math.sqrt(self.gamma1 * self.gamma2)

    def classical_sum_rate(self) -> float:
        """Best sum rate with independent inputs: (1/2) log2(1+g1+g2)."""
        return float(half_log2(self.gamma1 + self.gamma2))

    def full_cooperation_ceiling(self) -> float:
        """(1/2) log2(1+g1+g2+2*gbar): no bound can ever exceed this."""
        return float(half_log2(self.gamma1 + self.gamma2 + 2 * self.gamma_bar))


def rho0_max(budget: float) -> float:
    """Largest coordination correlation affordable with ``budget`` bits:
    inverts (1/2) log2(1/(1-rho0^2)) = budget."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    return math.sqrt(max(0.0, 1.0 - 2.0 ** (-2.0 * budget)))


@dataclass(frozen=True)
class GaussianCFParams:
    """Input correlation weights and the conferencing split.

    rho_i0 couples encoder i to the common part, rho_id to its coordinated
    part; rho_ii^2 = 1 - rho_i0^2 - rho_id^2 must stay nonnegative.  rho0 is
    the coordination correlation bought from the leftover output budget.
    """

    rho0: float
    rho10: float
    rho20: float
    rho1d: float
    rho2d: float
    c10: float = 0.0
    c20: float = 0.0

    def __post_init__(self):
        for name in ("rho0", "rho10", "rho20", "rho1d", "rho2d"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
        for name in ("c10", "c20"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def validate_against(self, cf: CFConfig) -> None:
        """Check the power split and the budget constraints; raises listing
        the violated constraint."""
        if self.rho10 ** 2 + self.rho1d ** 2 > 1.0 + 1e-9:
            raise ValueError("rho10^2 + rho1d^2 exceeds 1")
        if self.rho20 ** 2 + self.rho2d ** 2 > 1.0 + 1e-9:
            raise ValueError("rho20^2 + rho2d^2 exceeds 1")
        budget = cf.coordination_budget
        if self.rho0 ** 2 > 1.0 - 2.0 ** (-2.0 * budget) + 1e-9:
            raise ValueError(
                "coordination correlation rho0 exceeds the output budget: "
                f"rho0={self.rho0}, budget={budget} bits"
            )
        if self.c10 > min(cf.c1_in, cf.c2_out) + FEAS_TOL:
            raise ValueError("c10 exceeds min(c1_in, c2_out)")
        if self.c20 > min(cf.c2_in, cf.c1_out) + FEAS_TOL:
            raise ValueError("c20 exceeds min(c2_in, c1_out)")


def evaluate_gaussian_bounds(mac: GaussianMAC, cf: CFConfig,
                             p: GaussianCFParams) -> BoundRecord:
    """All six bound families at one Gaussian parameter point (bits)."""
    p.validate_against(cf)
    g1, g2, gbar = mac.gamma1, mac.gamma2, mac.gamma_bar
    r11s = max(0.0, 1.0 - p.rho10 ** 2 - p.rho1d ** 2)
    r22s = max(0.0, 1.0 - p.rho20 ** 2 - p.rho2d ** 2)
    rt11s = max(0.0, 1.0 - p.rho10 ** 2 - (p.rho0 * p.rho1d) ** 2)
    rt22s = max(0.0, 1.0 - p.rho20 ** 2 - (p.rho0 * p.rho2d) ** 2)
    cross = 2.0 * p.rho0 * p.rho1d * p.rho2d * gbar
    c1i = min(cf.c1_in, CAP_BITS)
    c2i = min(cf.c2_in, CAP_BITS)
    cost = -0.5 * math.log2(max(1e-300, 1.0 - p.rho0 ** 2)) \
        if p.rho0 < 1.0 else math.inf
    slack = cf.coordination_budget - cost
    return BoundRecord(
        r1_caps=(float(half_log2(r11s * g1)) + c1i,
                 float(half_log2(rt11s * g1)) + p.c10),
        r2_caps=(float(half_log2(r22s * g2)) + c2i,
                 float(half_log2(rt22s * g2)) + p.c20),
        sum_caps=(
            float(half_log2(r11s * g1 + r22s * g2)) + c1i + c2i,
            float(half_log2(r11s * g1 + rt22s * g2)) + c1i + p.c20,
            float(half_log2(r22s * g2 + rt11s * g1)) + c2i + p.c10,
            float(half_log2((1 - p.rho10 ** 2) * g1 + (1 - p.rho20 ** 2) * g2
                            + cross)) + p.c10 + p.c20,
            float(half_log2(g1 + g2
                            + 2 * (p.rho10 * p.rho20
                                   + p.rho0 * p.rho1d * p.rho2d) * gbar)),
        ),
        feasible=bool(slack >= -1e-9),
        slack=slack,
    )


# ---------------------------------------------------------------------------
# Sum-rate optimization over the 7-dim parameter box
# ---------------------------------------------------------------------------
#
# Coordinate order: x = (c10, c20, rho10, rho20, rho1d, rho2d, rho0).
# The rho0 coordinate is interpreted as "requested" and clipped to the budget
# implied by (c10, c20), so every box point is feasible.


def _caps4(caps):
    c1i, c2i, c1o, c2o = (min(float(c), CAP_BITS) for c in caps)
    if min(c1i, c2i, c1o, c2o) < 0:
        raise ValueError("capacities must be nonnegative")
    return c1i, c2i, c1o, c2o


def _sum_rate_vec(mac: GaussianMAC, caps, X: np.ndarray) -> np.ndarray:
    """Vectorized sum-rate for an (N, 7) array of parameter points."""
    c1i, c2i, c1o, c2o = caps
    g1, g2, gbar = mac.gamma1, mac.gamma2, mac.gamma_bar
    c10, c20, r10, r20, r1d, r2d, rho0 = (X[:, i] for i in range(7))
    budget = (c1o - c20) + (c2o - c10)
    rho0 = np.minimum(rho0, np.sqrt(np.maximum(0.0, 1.0 - 2.0 ** (-2 * budget))))
    r11s = np.maximum(0.0, 1.0 - r10 ** 2 - r1d ** 2)
    r22s = np.maximum(0.0, 1.0 - r20 ** 2 - r2d ** 2)
    rt11s = np.maximum(0.0, 1.0 - r10 ** 2 - (rho0 * r1d) ** 2)
    rt22s = np.maximum(0.0, 1.0 - r20 ** 2 - (rho0 * r2d) ** 2)
    cross = 2.0 * rho0 * r1d * r2d * gbar
    r1 = np.minimum(half_log2(r11s * g1) + c1i, half_log2(rt11s * g1) + c10)
    r2 = np.minimum(half_log2(r22s * g2) + c2i, half_log2(rt22s * g2) + c20)
    s = np.minimum.reduce([
        half_log2(r11s * g1 + r22s * g2) + c1i + c2i,
        half_log2(r11s * g1 + rt22s * g2) + c1i + c20,
        half_log2(r22s * g2 + rt11s * g1) + c2i + c10,
        half_log2((1 - r10 ** 2) * g1 + (1 - r20 ** 2) * g2 + cross)
        + c10 + c20,
        half_log2(g1 + g2 + 2 * (r10 * r20 + rho0 * r1d * r2d) * gbar),
    ])
    return np.minimum(s, r1 + r2)


def _sum_rate_one(mac, caps, x) -> float:
    return float(_sum_rate_vec(mac, caps, np.asarray(x, dtype=float)[None, :])[0])


def _effective_params(caps, x) -> GaussianCFParams:
    c1i, c2i, c1o, c2o = caps
    c10, c20, r10, r20, r1d, r2d, rho0 = (float(v) for v in x)
    budget = (c1o - c20) + (c2o - c10)
    rho0 = min(rho0, rho0_max(budget))
    clip01 = lambda v: min(max(v, 0.0), 1.0)
    return GaussianCFParams(
        rho0=clip01(rho0), rho10=clip01(r10), rho20=clip01(r20),
        rho1d=clip01(r1d), rho2d=clip01(r2d), c10=c10, c20=c20,
    )


def _ascend(mac, caps, x0, iters=40):
    c1i, c2i, c1o, c2o = caps
    hi10 = min(c1i, c2o)
    hi20 = min(c2i, c1o)

    def interval(x, i):
        if i == 0:
            return 0.0, hi10
        if i == 1:
            return 0.0, hi20
        if i == 2:  # rho10
            return 0.0, math.sqrt(max(0.0, 1.0 - x[4] ** 2))
        if i == 3:  # rho20
            return 0.0, math.sqrt(max(0.0, 1.0 - x[5] ** 2))
        if i == 4:  # rho1d
            return 0.0, math.sqrt(max(0.0, 1.0 - x[2] ** 2))
        if i == 5:  # rho2d
            return 0.0, math.sqrt(max(0.0, 1.0 - x[3] ** 2))
        return 0.0, 1.0  # rho0 (clipped to budget inside the objective)

    return ascend_box(np.asarray(x0, dtype=float),
                      lambda x: _sum_rate_one(mac, caps, x),
                      interval, iters=iters)


def _grid_points(caps, rho_pts: int, c_pts: int, force_zero_split: bool):
    c1i, c2i, c1o, c2o = caps
    hi10 = min(c1i, c2o)
    hi20 = min(c2i, c1o)
    if force_zero_split or (hi10 == 0 and hi20 == 0):
        c_axes = [np.array([0.0]), np.array([0.0])]
    else:
        c_axes = [np.linspace(0, hi10, c_pts if hi10 > 0 else 1),
                  np.linspace(0, hi20, c_pts if hi20 > 0 else 1)]
    r = np.linspace(0.0, 1.0, rho_pts)
    grids = np.meshgrid(*c_axes, r, r, r, r, r, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def max_sum_rate_gaussian(
    mac: GaussianMAC,
    caps,
    opt: OptimizerConfig | None = None,
    force_zero_split: bool = False,
    extra_seeds=None,
) -> tuple[float, GaussianCFParams]:
    """Best sum rate of the Gaussian region over correlation weights and the
    conferencing split; returns the value (bits) and the attaining parameters.
    A coarse vectorized grid seeds coordinate ascent; deterministic."""
    opt = opt or OptimizerConfig()
    caps = _caps4(caps)
    c1i, c2i, c1o, c2o = caps
    hi10 = 0.0 if force_zero_split else min(c1i, c2o)
    hi20 = 0.0 if force_zero_split else min(c2i, c1o)

    rho_pts = max(3, min(7, opt.restarts // 3 + 3))
    grid = _grid_points(caps, rho_pts, min(5, opt.c_split_points),
                        force_zero_split)
    vals = _sum_rate_vec(mac, caps, grid)
    order = np.argsort(-vals)
    n_seed = min(max(2, opt.restarts // 2), order.size)
    seeds = [grid[i] for i in order[:n_seed]]

    seeds.append(np.zeros(7))
    if hi10 > 0 or hi20 > 0:
        cval, r10, r20 = gaussian_conferencing_sum_rate(mac, hi10, hi20)
        seeds.append(np.array([hi10, hi20, r10, r20, 0.0, 0.0, 0.0]))
    seeds.append(np.array([0.0, 0.0, 0.0, 0.0, 0.6, 0.6, 1.0]))
    if extra_seeds is not None:
        seeds = [np.asarray(s, dtype=float) for s in extra_seeds] + seeds
    if force_zero_split:
        for s in seeds:
            s[0] = s[1] = 0.0

    best_x, best_v = None, -np.inf
    for x0 in seeds:
        x, v = _ascend(mac, caps, x0, iters=opt.ascent_iters)
        if force_zero_split:
            x[0] = x[1] = 0.0
            v = _sum_rate_one(mac, caps, x)
        if v > best_v + 1e-13:
            best_x, best_v = x, v
    return best_v, _effective_params(caps, best_x)


# ---------------------------------------------------------------------------
# Conferencing sum rate in closed form
# ---------------------------------------------------------------------------


def gaussian_conferencing_sum_rate(mac: GaussianMAC, c12: float, c21: float
                                   ) -> tuple[float, float, float]:
    """Best conferencing sum rate with conference capacities (c12, c21):
    maximize over common-part weights (rho10, rho20) the minimum of the
    per-user pairing, the common-conditioned sum bound, and the unconditional
    sum bound.  Returns (value, rho10, rho20)."""
    c12 = min(max(0.0, c12), CAP_BITS)
    c21 = min(max(0.0, c21), CAP_BITS)
    g1, g2, gbar = mac.gamma1, mac.gamma2, mac.gamma_bar

    def value_vec(r10, r20):
        a1 = half_log2((1 - r10 ** 2) * g1) + c12
        a2 = half_log2((1 - r20 ** 2) * g2) + c21
        su = half_log2((1 - r10 ** 2) * g1 + (1 - r20 ** 2) * g2) + c12 + c21
        sj = half_log2(g1 + g2 + 2 * r10 * r20 * gbar)
        return np.minimum.reduce([a1 + a2, su, sj])

    r = np.linspace(0.0, 1.0, 201)
    R10, R20 = np.meshgrid(r, r, indexing="ij")
    vals = value_vec(R10, R20)
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
    x = np.array([r[i], r[j]])

    def interval(xx, k):
        return 0.0, 1.0

    x, v = ascend_box(
        x, lambda xx: float(value_vec(np.array(xx[0]), np.array(xx[1]))),
        interval, iters=60, line_tol=1e-12,
    )
    return float(v), float(x[0]), float(x[1])


# ---------------------------------------------------------------------------
# Sum-rate gain study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GainCurve:
    """Sum-rate gains over the zero-output baseline, per output capacity."""

    c_out_grid: tuple[float, ...]
    gain: tuple[float, ...]
    no_conferencing_gain: tuple[float, ...]
    conferencing_inner_gain: tuple[float, ...]
    conferencing_outer_gain: tuple[float, ...]
    edge_removal_line: tuple[float, ...]
    baseline: float

    def to_csv(self) -> str:
        lines = ["c_out,gain,no_conf,conf_inner,conf_outer,edge_removal"]
        for row in zip(self.c_out_grid, self.gain, self.no_conferencing_gain,
                       self.conferencing_inner_gain,
                       self.conferencing_outer_gain, self.edge_removal_line):
            lines.append(",".join(f"{v:.12g}" for v in row))
        return "\n".join(lines) + "\n"


def _params_to_x(p: GaussianCFParams) -> np.ndarray:
    return np.array([p.c10, p.c20, p.rho10, p.rho20, p.rho1d, p.rho2d,
                     p.rho0])


def gain_curve(mac: GaussianMAC, c_in: float, c_out_grid,
               opt: OptimizerConfig | None = None) -> GainCurve:
    """Sum-rate gain of the full scheme versus its two restrictions, on a
    grid of output capacities, relative to the zero-output baseline.

    Each grid point is optimized independently and then re-ascended from its
    predecessor's optimum (feasible sets are nested in c_out), which makes
    the reported gain nondecreasing without any artificial clamping.
    """
    if c_in <= 0:
        raise ValueError("c_in must be positive")
    opt = opt or OptimizerConfig()
    grid = [float(c) for c in c_out_grid]
    baseline, _ = max_sum_rate_gaussian(mac, (c_in, c_in, 0.0, 0.0), opt)
    outer_val, _, _ = gaussian_conferencing_sum_rate(mac, c_in, c_in)

    full, noconf, inner = [], [], []
    prev_full = prev_nc = None
    for c in grid:
        caps = (c_in, c_in, c, c)
        seeds = [prev_full] if prev_full is not None else None
        v_full, p_full = max_sum_rate_gaussian(mac, caps, opt,
                                               extra_seeds=seeds)
        seeds_nc = [prev_nc] if prev_nc is not None else None
        v_nc, p_nc = max_sum_rate_gaussian(mac, caps, opt,
                                           force_zero_split=True,
                                           extra_seeds=seeds_nc)
        v_in, _, _ = gaussian_conferencing_sum_rate(
            mac, min(c_in, c), min(c_in, c))
        # The full scheme contains both restrictions; make sure the optimizer
        # saw their optima as starting points.
        v_full2, p_full2 = max_sum_rate_gaussian(
            mac, caps, opt.with_(restarts=2),
            extra_seeds=[_params_to_x(p_nc)])
        if v_full2 > v_full:
            v_full, p_full = v_full2, p_full2
        full.append(v_full)
        noconf.append(v_nc)
        inner.append(v_in)
        prev_full = _params_to_x(p_full)
        prev_nc = _params_to_x(p_nc)

    return GainCurve(
        c_out_grid=tuple(grid),
        gain=tuple(v - baseline for v in full),
        no_conferencing_gain=tuple(v - baseline for v in noconf),
        conferencing_inner_gain=tuple(v - baseline for v in inner),
        conferencing_outer_gain=tuple(outer_val - baseline for _ in grid),
        edge_removal_line=tuple(4.0 * c for c in grid),
        baseline=baseline,
    )


# ---------------------------------------------------------------------------
# Square-root scaling of the gain at small output capacities
# ---------------------------------------------------------------------------
#
# Restricting to rho10 = rho20 = 0, rho1d = rho2d = rho_d and zero splits,
# the scheme's sum rate is min over f0..f4 below; whenever
# f0 < min(f1..f4), the gain over the baseline is f0 - (1/2)log2(1+g1+g2),
# and with rho0 at the budget limit this grows like sqrt(c_out).


def _f_terms(mac: GaussianMAC, c1_in: float, c2_in: float, rho0, rho_d):
    g1, g2, gbar = mac.gamma1, mac.gamma2, mac.gamma_bar
    rd2 = rho_d ** 2
    r02 = rho0 ** 2
    f0 = half_log2(g1 + g2 + 2 * rho0 * rd2 * gbar)
    f1 = half_log2((1 - r02 * rd2) * g1) + half_log2((1 - r02 * rd2) * g2)
    f2 = half_log2((1 - rd2) * g1 + (1 - r02 * rd2) * g2) + c1_in
    f3 = half_log2((1 - r02 * rd2) * g1 + (1 - rd2) * g2) + c2_in
    f4 = half_log2((1 - rd2) * g1 + (1 - rd2) * g2) + c1_in + c2_in
    return f0, f1, f2, f3, f4


def scheme_margin(mac: GaussianMAC, c1_in: float, c2_in: float, rho0, rho_d):
    """f0 - min(f1..f4); negative means f0 is the binding bound, so the
    coordination-only scheme achieves f0."""
    f0, f1, f2, f3, f4 = _f_terms(mac, c1_in, c2_in, rho0, rho_d)
    return f0 - np.minimum.reduce([np.asarray(f1), np.asarray(f2),
                                   np.asarray(f3), np.asarray(f4)])


@dataclass(frozen=True)
class SqrtScalingRow:
    c_out: float
    rho0: float
    gain: float
    gain_over_sqrt: float


@dataclass(frozen=True)
class SqrtScalingResult:
    rho_d_star: float
    alpha_estimate: float
    rows: tuple[SqrtScalingRow, ...]


def sqrt_scaling_check(mac: GaussianMAC, c1_in: float, c2_in: float,
                       c_out_grid=None, rho_d_steps: int = 4001
                       ) -> SqrtScalingResult:
    """Lower-bound curve for the gain at small output capacities.

    Finds the largest coordination weight rho_d* whose margin stays negative
    even at full correlation, then evaluates the induced gain
    f0(rho0_max(2 c_out), rho_d*) minus the baseline on the grid; the fitted
    alpha is the worst gain / sqrt(c_out) ratio.
    """
    if c1_in <= 0 or c2_in <= 0:
        raise ValueError("facilitator input capacities must be positive")
    if c_out_grid is None:
        c_out_grid = np.geomspace(1e-4, 1e-2, 9)
    rd = np.linspace(0.0, 1.0, rho_d_steps)
    margin = scheme_margin(mac, c1_in, c2_in, 1.0, rd)
    ok = np.where(margin < -1e-9)[0]
    if ok.size == 0 or rd[ok[-1]] == 0.0:
        raise ValueError("no positive coordination weight keeps the "
                         "coordination bound binding")
    rho_d_star = float(rd[ok[-1]])
    base = mac.classical_sum_rate()
    rows = []
    for c in c_out_grid:
        c = float(c)
        rho0 = rho0_max(2.0 * c)
        if scheme_margin(mac, c1_in, c2_in, rho0, rho_d_star) >= 0:
            raise ValueError(f"margin not negative at c_out={c}")
        gain = float(_f_terms(mac, c1_in, c2_in, rho0, rho_d_star)[0]) - base
        rows.append(SqrtScalingRow(
            c_out=c, rho0=rho0, gain=gain,
            gain_over_sqrt=gain / math.sqrt(c) if c > 0 else 0.0,
        ))
    alpha = min(r.gain_over_sqrt for r in rows) if rows else 0.0
    return SqrtScalingResult(rho_d_star=rho_d_star, alpha_estimate=alpha,
                             rows=tuple(rows))


# ---------------------------------------------------------------------------
# Discrete cross-check: quantized jointly Gaussian input
# ---------------------------------------------------------------------------


def quantized_gaussian_joint(mac: GaussianMAC, p: GaussianCFParams,
                             levels: int = 8, span: float = 3.5,
                             y_levels: int = 16):
    """Discretize the jointly Gaussian construction behind the closed forms:
    U ~ N(0,1), (V1,V2) ~ N(0, [[1,rho0],[rho0,1]]), fresh parts independent,
    X_i/sqrt(P_i) = rho_i0 U + rho_id V_i + rho_ii X'_i, Y = X1 + X2 + Z.

    Returns a JointDist over (U, V1, V2, X1, X2, Y) suitable for comparing
    discrete mutual informations against the closed forms (coarse check).
    """
    from scipy.special import ndtr

    from .probability import AX_U, AX_V1, AX_V2, AX_X1, AX_X2, AX_Y, Axis, \
        JointDist

    g1, g2 = mac.gamma1, mac.gamma2
    s1, s2 = math.sqrt(g1), math.sqrt(g2)  # std of X_i with N = 1
    r11 = math.sqrt(max(0.0, 1 - p.rho10 ** 2 - p.rho1d ** 2))
    r22 = math.sqrt(max(0.0, 1 - p.rho20 ** 2 - p.rho2d ** 2))

    edges = np.linspace(-span, span, levels + 1)
    inner = np.concatenate([[-40.0], edges[1:-1], [40.0]])
    reps = _normal_bin_means(inner)

    pu = np.diff(ndtr(inner))
    pu /= pu.sum()

    pv = _bivariate_bin_probs(inner, p.rho0)
    pv /= pv.sum()

    def cond_bins(mu, sigma, edges_phys):
        # P(bin | mu, sigma) for each bin of edges_phys; sigma may be 0.
        if sigma < 1e-12:
            out = np.zeros(edges_phys.size - 1)
            k = np.clip(np.searchsorted(edges_phys, mu) - 1, 0,
                        out.size - 1)
            out[k] = 1.0
            return out
        z = (edges_phys - mu) / sigma
        return np.diff(ndtr(z))

    x_edges1 = inner * s1
    x_edges2 = inner * s2

    px1 = np.zeros((levels, levels, levels))
    px2 = np.zeros((levels, levels, levels))
    for iu, u in enumerate(reps):
        for iv, v in enumerate(reps):
            mu1 = s1 * (p.rho10 * u + p.rho1d * v)
            px1[iu, iv] = cond_bins(mu1, s1 * r11, x_edges1)
            mu2 = s2 * (p.rho20 * u + p.rho2d * v)
            px2[iu, iv] = cond_bins(mu2, s2 * r22, x_edges2)
    px1 /= px1.sum(axis=-1, keepdims=True)
    px2 /= px2.sum(axis=-1, keepdims=True)

    xr1 = reps * s1
    xr2 = reps * s2
    y_hi = span * (s1 + s2) + 4.0
    ye = np.linspace(-y_hi, y_hi, y_levels + 1)
    ye = np.concatenate([[-1e6], ye[1:-1], [1e6]])
    py = np.zeros((levels, levels, y_levels))
    for i1, x1 in enumerate(xr1):
        for i2, x2 in enumerate(xr2):
            py[i1, i2] = np.diff(ndtr(ye - (x1 + x2)))
    py /= py.sum(axis=-1, keepdims=True)

    probs = np.einsum("u,vw,uvx,uwy,xyz->uvwxyz", pu, pv, px1, px2, py)
    probs /= probs.sum()
    axes = (Axis(AX_U, levels), Axis(AX_V1, levels), Axis(AX_V2, levels),
            Axis(AX_X1, levels), Axis(AX_X2, levels), Axis(AX_Y, y_levels))
    return JointDist(axes, probs)


def _normal_bin_means(edges: np.ndarray) -> np.ndarray:
    """Conditional means of a standard normal within consecutive bins."""
    from scipy.special import ndtr

    phi = lambda z: np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    lo, hi = edges[:-1], edges[1:]
    mass = ndtr(hi) - ndtr(lo)
    return (phi(lo) - phi(hi)) / np.maximum(mass, 1e-300)


def _bivariate_bin_probs(edges: np.ndarray, rho: float) -> np.ndarray:
    """Rectangle probabilities of a standard bivariate normal with
    correlation rho, via Gauss-Legendre integration over the first axis."""
    from scipy.special import ndtr

    n = edges.size - 1
    if rho >= 1.0 - 1e-12:
        p = np.diff(ndtr(edges))
        return np.diag(p)
    out = np.zeros((n, n))
    nodes, weights = np.polynomial.legendre.leggauss(64)
    sq = math.sqrt(1.0 - rho * rho)
    phi = lambda z: np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    for i in range(n):
        a, b = max(edges[i], -12.0), min(edges[i + 1], 12.0)
        if b <= a:
            continue
        z = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        w = 0.5 * (b - a) * weights * phi(z)
        for j in range(n):
            c, d = edges[j], edges[j + 1]
            out[i, j] = float(np.sum(
                w * (ndtr((d - rho * z) / sq) - ndtr((c - rho * z) / sq))
            ))
    return out
