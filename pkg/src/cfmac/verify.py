"""Property suites behind the ``verify`` command: structural identities and
cross-checks the package must satisfy, each reported with its tolerance and
the worst measured slack (slack >= 0 means pass).

Groups (quick mode runs all of them with smaller sample counts):
  entropy-identities        chain rule, symmetry of conditional information
  markov-factorization      X1 indep X2 given (U, V1, V2) after expansion
  crosslink-inequality      I(X1;Y|X2) + I(X2;Y|X1) >= I(X1,X2;Y) - I(X1;X2)
  mixture-derivatives       vanishing slope of I(X1;X2), lower slope of
                            I(X1,X2;Y) along the independent-to-dependent mix
  unbounded-input-equivalence  six-bound evaluation collapses to the
                            four-bound form on lifted inputs
  region-mixing             mixed-capacity region contains the mixture of
                            regions (sampled vertices, binary adder)
  conferencing-sandwich     conferencing inner <= facilitator region <=
                            conferencing outer at sampled angles
  optimizer-baselines       zero output capacity reproduces the independent
                            optimum; capacity monotonicity
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import probability as prob
from .channels import DiscreteMAC, binary_adder, random_channel
from .discrete import (
    CFConfig,
    cf_region_with_argmax,
    classical_sum_capacity,
    cin_infinite_region_bounds,
    evaluate_bounds,
    lambda_mixture,
    max_sum_rate,
    mixture_witness,
    evaluate_candidate,
)
from .optimize import OptimizerConfig, substream
from .probability import (
    AX_U, AX_V1, AX_V2, AX_X1, AX_X2, AX_Y, Axis, FactorizedInput, JointDist,
)
from .regions import cf_conferencing_bounds, contains, minkowski_sum


@dataclass
class PropertyResult:
    name: str
    tolerance: float
    slack: float
    passed: bool
    samples: int
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: tol={self.tolerance:.3g} "
                f"slack={self.slack:.6g} samples={self.samples}")


def _random_joint(rng, shape):
    p = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return p


def check_entropy_identities(seed=0, samples=200) -> PropertyResult:
    """Chain rule H(A,B) = H(A) + H(B|A) and symmetry of I(A;B|C)."""
    rng = substream(seed, 1)
    tol = 1e-9
    worst = np.inf
    for _ in range(samples):
        p = _random_joint(rng, (3, 2, 2))
        d = JointDist((Axis("A", 3), Axis("B", 2), Axis("C", 2)), p)
        hab = prob.entropy(d, ("A", "B"))
        # Independent H(B|A): average the per-row conditional entropies.
        pab = p.sum(axis=2)
        pa = pab.sum(axis=1)
        h_b_given_a = sum(
            pa[i] * prob.entropy_of(pab[i] / pa[i])
            for i in range(pa.size) if pa[i] > 0
        )
        chain = prob.entropy(d, ("A",)) + h_b_given_a
        worst = min(worst, tol - abs(hab - chain))
        iab = prob.conditional_mutual_information(d, ("A",), ("B",), ("C",))
        iba = prob.conditional_mutual_information(d, ("B",), ("A",), ("C",))
        worst = min(worst, 1e-12 - abs(iab - iba))
    return PropertyResult("entropy-identities", tol, float(worst),
                          worst >= 0, samples)


def check_markov_factorization(seed=0, samples=100) -> PropertyResult:
    """Expanded factorized inputs leave X1, X2 independent given the
    auxiliaries: I(X1;X2|U,V1,V2) below 1e-12."""
    rng = substream(seed, 2)
    tol = 1e-12
    worst = np.inf
    for _ in range(samples):
        p3 = _random_joint(rng, (2, 2, 2))
        c1 = rng.dirichlet(np.ones(2), size=(2, 2))
        c2 = rng.dirichlet(np.ones(2), size=(2, 2))
        f = FactorizedInput(
            JointDist((Axis(AX_U, 2), Axis(AX_V1, 2), Axis(AX_V2, 2)), p3),
            c1, c2)
        d = prob.expand_factorized(f)
        leak = prob.conditional_mutual_information(
            d, (AX_X1,), (AX_X2,), (AX_U, AX_V1, AX_V2))
        worst = min(worst, tol - leak)
    return PropertyResult("markov-factorization", tol, float(worst),
                          worst >= 0, samples)


def check_crosslink_inequality(seed=0, samples=1000) -> PropertyResult:
    """For any input law and channel, the two cross-conditioned single-user
    informations cover the joint information up to I(X1;X2)."""
    rng = substream(seed, 3)
    tol = 1e-9
    worst = np.inf
    for _ in range(samples):
        p = _random_joint(rng, (2, 2))
        ch = random_channel(rng, 2, 2, 3)
        d = JointDist((Axis(AX_X1, 2), Axis(AX_X2, 2)), p)
        dy = prob.push_through_channel(d, ch)
        lhs = (prob.conditional_mutual_information(dy, (AX_X1,), (AX_Y,), (AX_X2,))
               + prob.conditional_mutual_information(dy, (AX_X2,), (AX_Y,),
                                                     (AX_X1,)))
        rhs = (prob.mutual_information(dy, (AX_X1, AX_X2), (AX_Y,))
               - prob.mutual_information(dy, (AX_X1,), (AX_X2,)))
        worst = min(worst, lhs - rhs + tol)
    return PropertyResult("crosslink-inequality", tol, float(worst),
                          worst >= 0, samples)


def _random_mixture_pair(rng):
    a1 = rng.uniform(0.3, 0.7)
    a2 = rng.uniform(0.3, 0.7)
    pa = np.outer([a1, 1 - a1], [a2, 1 - a2])
    pb = rng.dirichlet(np.ones(4)).reshape(2, 2)
    return pa, pb


def check_mixture_derivatives(seed=0, samples=50) -> PropertyResult:
    """Along P_lam = (1-lam) Pa(x1)Pa(x2) + lam Pb(x1,x2): the slope of
    I(X1;X2) vanishes at 0 (|central diff at lam=h| <= 10 h), and the forward
    slope of I(X1,X2;Y) at 0 is at least I_b - I_a (within 1e-2)."""
    rng = substream(seed, 4)
    worst = np.inf
    axes = (Axis(AX_X1, 2), Axis(AX_X2, 2))

    def mi_pair(p):
        return prob.mutual_information(JointDist(axes, p), (AX_X1,), (AX_X2,))

    def mi_out(p, ch):
        dy = prob.push_through_channel(JointDist(axes, p), ch)
        return prob.mutual_information(dy, (AX_X1, AX_X2), (AX_Y,))

    for _ in range(samples):
        pa, pb = _random_mixture_pair(rng)
        ch = random_channel(rng, 2, 2, 2)
        for h in (1e-3, 1e-4):
            mix = (1 - 2 * h) * pa + 2 * h * pb
            slope = abs(mi_pair(mix) - mi_pair(pa)) / (2 * h)
            worst = min(worst, 10 * h - slope)
        h = 1e-4
        ia = mi_out(pa, ch)
        ib = mi_out(pb, ch)
        fwd = (mi_out((1 - h) * pa + h * pb, ch) - ia) / h
        worst = min(worst, fwd - (ib - ia) + 1e-2)
    return PropertyResult("mixture-derivatives", 1e-2, float(worst),
                          worst >= 0, samples)


def check_unbounded_input_equivalence(seed=0, samples=100) -> PropertyResult:
    """With huge facilitator input links and inputs lifted so V_i = X_i, the
    six-bound evaluation matches the four-bound form to 1e-12."""
    rng = substream(seed, 5)
    tol = 1e-12
    worst = np.inf
    for _ in range(samples):
        ch = random_channel(rng, 2, 2, 2)
        p_uxx = _random_joint(rng, (2, 2, 2))
        c1o, c2o = rng.uniform(0.2, 1.5, size=2)
        c10 = rng.uniform(0, min(c2o, 1.0))
        c20 = rng.uniform(0, min(c1o, 1.0))
        d = JointDist((Axis(AX_U, 2), Axis(AX_X1, 2), Axis(AX_X2, 2)), p_uxx)
        simple = cin_infinite_region_bounds(ch, d, c1o, c2o, c10, c20)

        f = FactorizedInput(
            JointDist((Axis(AX_U, 2), Axis(AX_V1, 2), Axis(AX_V2, 2)), p_uxx),
            np.tile(np.eye(2)[None], (2, 1, 1)),
            np.tile(np.eye(2)[None], (2, 1, 1)),
        )
        cf = CFConfig(10.0, 10.0, c1o, c2o, c10, c20)
        rec = evaluate_bounds(ch, f, cf)
        diffs = [
            abs(min(rec.r1_caps) - simple.r1_cap),
            abs(min(rec.r2_caps) - simple.r2_cap),
            abs(rec.sum_caps[3] - simple.sum_caps[0]),
            abs(rec.sum_caps[4] - simple.sum_caps[1]),
            abs(rec.slack - simple.slack),
        ]
        worst = min(worst, tol - max(diffs))
    return PropertyResult("unbounded-input-equivalence", tol, float(worst),
                          worst >= 0, samples)


def check_region_mixing(seed=0, pairs=3, angles=9,
                        lambdas=(0.25, 0.5, 0.75),
                        opt: OptimizerConfig | None = None) -> PropertyResult:
    """Sampled form of region convexity on the binary adder: every vertex of
    lam*R_a + (1-lam)*R_b sits inside the region at mixed capacities.  The
    mixed-capacity search is seeded with the branch-combination witness, and
    failures are retried at higher search effort before counting."""
    ch = binary_adder()
    opt = opt or OptimizerConfig(restarts=8, ascent_iters=12)
    tol = 1e-6
    rng = substream(seed, 6)
    worst = np.inf
    checked = 0
    for _ in range(pairs):
        caps_a = tuple(rng.uniform(0.0, 1.0, size=4))
        caps_b = tuple(rng.uniform(0.0, 1.0, size=4))
        ra, arg_a = cf_region_with_argmax(ch, caps_a, opt, angles)
        rb, arg_b = cf_region_with_argmax(ch, caps_b, opt, angles)
        for lam in lambdas:
            caps_mix = tuple(lam * a + (1 - lam) * b
                             for a, b in zip(caps_a, caps_b))
            witnesses = [mixture_witness(oa.candidate(), ob.candidate(), lam)
                         for oa, ob in zip(arg_a, arg_b)]
            rmix, _ = cf_region_with_argmax(ch, caps_mix, opt, angles,
                                            extra_seeds=witnesses)
            target = minkowski_sum(ra.scale(lam), rb.scale(1 - lam))
            redo = False
            for p in target.boundary:
                checked += 1
                if not contains(rmix, p, tol):
                    redo = True
            if redo:
                rmix, _ = cf_region_with_argmax(
                    ch, caps_mix,
                    opt.with_(restarts=opt.restarts * 3,
                              ascent_iters=opt.ascent_iters * 2),
                    angles, extra_seeds=witnesses)
            for p in target.boundary:
                margin = min(
                    rmix.support(th) - (np.cos(th) * p.r1 + np.sin(th) * p.r2)
                    for th in rmix.angles
                )
                worst = min(worst, margin + tol)
    return PropertyResult("region-mixing", tol, float(worst), worst >= 0,
                          checked)


def conf_blocks_to_cf_candidate(blocks, card_v1=2, card_v2=2):
    """Embed a conferencing input P(u)P(x1|u)P(x2|u) as a facilitator input
    with degenerate auxiliaries (V_i pinned to symbol 0)."""
    from .regions import _conf_blocks_to_params

    pu, px1, px2 = _conf_blocks_to_params([np.asarray(b) for b in blocks])
    cu = pu.size
    p3 = np.zeros((cu, card_v1, card_v2))
    p3[:, 0, 0] = pu
    c1t = np.repeat(px1[:, None, :], card_v1, axis=1)
    c2t = np.repeat(px2[:, None, :], card_v2, axis=1)
    return p3, c1t, c2t


def cf_candidate_to_conf_blocks(cand):
    """Fold the auxiliaries into the common part: U' = (U, V1, V2) turns a
    facilitator input into a conferencing input with the same statistics."""
    p3, c1t, c2t = cand
    cu, cv1, cv2 = p3.shape
    pu = p3.reshape(-1)
    px1 = np.repeat(c1t.reshape(cu * cv1, -1), cv2, axis=0)
    px2 = np.tile(c2t.reshape(cu, cv2, -1), (1, cv1, 1)).reshape(
        cu * cv1 * cv2, -1)
    return [pu] + list(px1) + list(px2)


def check_conferencing_sandwich(seed=0, angles=9,
                                opt: OptimizerConfig | None = None
                                ) -> PropertyResult:
    """Conferencing inner values <= facilitator values <= conferencing outer
    values, angle by angle, on the binary adder.  Each side of the sandwich
    is seeded with the other side's argmax (embedded or folded), so the
    comparison never fails from one optimizer missing what the other found."""
    from .regions import ConferenceCapacities, _conferencing_search, angle_grid

    ch = binary_adder()
    opt = opt or OptimizerConfig(restarts=8, ascent_iters=12)
    tol = 1e-6
    c1i, c2i, c1o, c2o = 0.4, 0.3, 0.25, 0.2
    th = angle_grid(angles)

    inner_conf = ConferenceCapacities(min(c1i, c2o), min(c2i, c1o))
    inner_pts, inner_args = _conferencing_search(ch, inner_conf, opt, th)

    cf_seeds = [conf_blocks_to_cf_candidate(b, opt.card_v1, opt.card_v2)
                for b in inner_args]
    _, optima = cf_region_with_argmax(ch, (c1i, c2i, c1o, c2o), opt,
                                      angles, extra_seeds=cf_seeds)

    outer_conf = ConferenceCapacities(c1i, c2i)
    outer_seeds = [cf_candidate_to_conf_blocks(o.candidate()) for o in optima]
    outer_pts, _ = _conferencing_search(ch, outer_conf, opt, th,
                                        extra_seeds=outer_seeds)

    worst = np.inf
    for k, theta in enumerate(th):
        w1, w2 = np.cos(theta), np.sin(theta)
        inner_v = w1 * inner_pts[k][0] + w2 * inner_pts[k][1]
        cf_v = optima[k].value
        outer_v = w1 * outer_pts[k][0] + w2 * outer_pts[k][1]
        worst = min(worst, cf_v - inner_v + tol, outer_v - cf_v + tol)
    return PropertyResult("conferencing-sandwich", tol, float(worst),
                          worst >= 0, angles)


def check_optimizer_baselines(seed=0,
                              opt: OptimizerConfig | None = None
                              ) -> PropertyResult:
    """Zero output capacity reproduces the independent-input optimum, and the
    optimized sum rate is monotone when capacities grow."""
    ch = binary_adder()
    opt = opt or OptimizerConfig(restarts=6, ascent_iters=15, seed=seed)
    tol = 1e-6
    worst = np.inf
    cla = classical_sum_capacity(ch, opt)
    v0, _ = max_sum_rate(ch, (0.7, 0.7, 0.0, 0.0), opt)
    worst = min(worst, tol - abs(v0 - cla))
    v_small, _ = max_sum_rate(ch, (0.7, 0.7, 0.05, 0.05), opt)
    v_big, _ = max_sum_rate(ch, (0.7, 0.7, 0.4, 0.4), opt)
    worst = min(worst, v_small - v0 + tol)
    worst = min(worst, v_big - v_small + tol)
    return PropertyResult("optimizer-baselines", tol, float(worst),
                          worst >= 0, 3)


QUICK_SIZES = dict(entropy=60, markov=40, crosslink=200, mixture=20,
                   cin=40, pairs=1, angles=7)
FULL_SIZES = dict(entropy=200, markov=100, crosslink=1000, mixture=50,
                  cin=100, pairs=3, angles=9)


def run_verify(mode: str = "quick", seed: int = 0) -> list[PropertyResult]:
    sizes = QUICK_SIZES if mode == "quick" else FULL_SIZES
    results = [
        check_entropy_identities(seed, sizes["entropy"]),
        check_markov_factorization(seed, sizes["markov"]),
        check_crosslink_inequality(seed, sizes["crosslink"]),
        check_mixture_derivatives(seed, sizes["mixture"]),
        check_unbounded_input_equivalence(seed, sizes["cin"]),
        check_region_mixing(seed, pairs=sizes["pairs"],
                            angles=sizes["angles"]),
        check_conferencing_sandwich(seed, angles=sizes["angles"]),
        check_optimizer_baselines(seed),
    ]
    return results


def report_json(results: list[PropertyResult]) -> str:
    return json.dumps(
        {
            "passed": all(r.passed for r in results),
            "properties": [
                {
                    "name": r.name,
                    "tolerance": r.tolerance,
                    "slack": r.slack,
                    "passed": r.passed,
                    "samples": r.samples,
                    "detail": r.detail,
                }
                for r in results
            ],
        },
        indent=2,
    )
