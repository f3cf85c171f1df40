"""Finite discrete probability: joint distributions, entropies, mutual
information, and the factorized two-encoder input structure.

All information quantities are in bits (base-2 logs).  0*log(0) is treated as
0 by continuity, and probabilities below ``ZERO_TOL`` are treated as exact
zeros inside log computations.  Alphabets are small (a handful of symbols per
axis), so everything is dense and exact up to float rounding.

Instances are immutable after construction; every operation here is a pure
function, safe for concurrent use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Probabilities below this are exact zeros for the purpose of p*log(p).
ZERO_TOL = 1e-15

# Tolerance for "sums to one" checks on distributions.
NORM_TOL = 1e-12

# Canonical axis names used by the factorized input structure.
AX_U, AX_V1, AX_V2, AX_X1, AX_X2, AX_Y = "U", "V1", "V2", "X1", "X2", "Y"


class SchemaError(ValueError):
    """A serialized object failed validation (bad shape, sums, names...)."""


@dataclass(frozen=True)
class Axis:
    name: str
    card: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("axis name must be nonempty")
        if self.card < 1:
            raise ValueError(f"axis {self.name!r}: cardinality must be >= 1")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class JointDist:
    """A joint distribution over named finite alphabets.

    ``probs`` is a dense tensor whose k-th dimension matches ``axes[k]``.
    Entries are nonnegative and sum to one within ``NORM_TOL``.
    """

    axes: tuple[Axis, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(
            a if isinstance(a, Axis) else Axis(a[0], int(a[1])) for a in self.axes
        )
        object.__setattr__(self, "axes", axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names: {names}")
        probs = _readonly(self.probs)
        shape = tuple(a.card for a in axes)
        if probs.shape != shape:
            raise ValueError(
                f"probs shape {probs.shape} does not match axes {shape}"
            )
        if probs.size and probs.min() < -ZERO_TOL:
            raise ValueError(f"negative probability {probs.min():.3e}")
        total = float(probs.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", probs)

    # -- axis bookkeeping -------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def axis_index(self, name: str) -> int:
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise KeyError(f"unknown axis {name!r} (have {list(self.names)})")

    def _indices(self, subset: Iterable[str]) -> list[int]:
        return [self.axis_index(n) for n in subset]

    # -- marginals ---------------------------------------------------------

    def marginal(self, subset: Sequence[str]) -> "JointDist":
        """Marginal distribution on ``subset``, in the given order."""
        if not subset:
            raise ValueError("marginal needs a nonempty axis subset")
        keep = self._indices(subset)
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        p = self.probs.sum(axis=drop) if drop else self.probs
        p = np.moveaxis(p, [sorted(keep).index(i) for i in keep], range(len(keep)))
        return JointDist(tuple(self.axes[i] for i in keep), p)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "axes": [{"name": a.name, "card": a.card} for a in self.axes],
            "probs": [float(x) for x in self.probs.ravel(order="C")],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "JointDist":
        axes, probs = _parse_axes_probs(obj)
        try:
            return cls(axes, probs)
        except ValueError as e:
            raise SchemaError(str(e)) from e


def _parse_axes_probs(obj: dict) -> tuple[tuple[Axis, ...], np.ndarray]:
    """Shared decoder for the ``{"axes": [...], "probs": [...]}`` schema.

    ``probs`` is flat, row-major in the declared axis order.
    """
    if not isinstance(obj, dict):
        raise SchemaError("top level: expected a JSON object")
    for key in ("axes", "probs"):
        if key not in obj:
            raise SchemaError(f"missing key {key!r}")
    axes = []
    for i, a in enumerate(obj["axes"]):
        if not isinstance(a, dict) or "name" not in a or "card" not in a:
            raise SchemaError(f"axes[{i}]: expected {{'name','card'}}")
        axes.append(Axis(str(a["name"]), int(a["card"])))
    axes = tuple(axes)
    shape = tuple(a.card for a in axes)
    flat = np.asarray(obj["probs"], dtype=float)
    if flat.ndim != 1 or flat.size != int(np.prod(shape)):
        raise SchemaError(
            f"probs: expected {int(np.prod(shape))} entries, got {flat.size}"
        )
    return axes, flat.reshape(shape, order="C")


def load_joint(path) -> JointDist:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
    return JointDist.from_json_dict(obj)


# ---------------------------------------------------------------------------
# Entropy and mutual information
# ---------------------------------------------------------------------------


def entropy_of(probs: np.ndarray) -> float:
    """Shannon entropy in bits of a probability tensor (any shape)."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > ZERO_TOL]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def entropy(d: JointDist, subset: Sequence[str]) -> float:
    """H of the marginal of ``d`` on ``subset``, in bits."""
    if not subset:
        raise ValueError("entropy needs a nonempty axis subset")
    keep = d._indices(subset)
    drop = tuple(i for i in range(len(d.axes)) if i not in keep)
    p = d.probs.sum(axis=drop) if drop else d.probs
    return entropy_of(p)


def conditional_mutual_information(
    d: JointDist,
    a: Sequence[str],
    b: Sequence[str],
    c: Sequence[str] = (),
) -> float:
    """I(A;B|C) in bits; ``c`` may be empty for plain mutual information.

    Computed as H(A,C) + H(B,C) - H(A,B,C) - H(C) and clamped to >= 0
    (float rounding can leave a residue of order 1e-12).
    """
    a, b, c = tuple(a), tuple(b), tuple(c)
    sets = [set(a), set(b), set(c)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise ValueError(f"axis sets must be pairwise disjoint: {a}, {b}, {c}")
    if not a or not b:
        raise ValueError("both a and b must be nonempty")
    # Validate names before computing, so unknown axes error by name.
    for n in a + b + c:
        d.axis_index(n)
    value = entropy(d, a + c) + entropy(d, b + c) - entropy(d, a + b + c)
    if c:
        value -= entropy(d, c)
    return max(0.0, value)


def mutual_information(d: JointDist, a: Sequence[str], b: Sequence[str]) -> float:
    return conditional_mutual_information(d, a, b, ())


# ---------------------------------------------------------------------------
# Channel push-through
# ---------------------------------------------------------------------------


def push_through_channel(input_dist: JointDist, channel) -> JointDist:
    """Append the channel output axis Y to a distribution containing X1, X2.

    ``channel`` provides ``card_x1``, ``card_x2``, ``card_y`` and a stochastic
    ``transition`` tensor of shape (card_x1, card_x2, card_y).
    """
    i1 = input_dist.axis_index(AX_X1)
    i2 = input_dist.axis_index(AX_X2)
    if input_dist.axes[i1].card != channel.card_x1:
        raise ValueError(
            f"X1 cardinality {input_dist.axes[i1].card} does not match "
            f"channel ({channel.card_x1})"
        )
    if input_dist.axes[i2].card != channel.card_x2:
        raise ValueError(
            f"X2 cardinality {input_dist.axes[i2].card} does not match "
            f"channel ({channel.card_x2})"
        )
    if AX_Y in input_dist.names:
        raise ValueError("input already has a Y axis")
    letters = [chr(ord("a") + i) for i in range(len(input_dist.axes))]
    sub_in = "".join(letters)
    sub_ch = letters[i1] + letters[i2] + "z"
    out = np.einsum(f"{sub_in},{sub_ch}->{sub_in}z", input_dist.probs,
                    channel.transition)
    return JointDist(input_dist.axes + (Axis(AX_Y, channel.card_y),), out)


# ---------------------------------------------------------------------------
# Factorized inputs  P(u,v1,v2) P(x1|u,v1) P(x2|u,v2)
# ---------------------------------------------------------------------------


def _check_conditional(t: np.ndarray, shape: tuple, what: str) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != shape:
        raise ValueError(f"{what}: shape {t.shape}, expected {shape}")
    if t.size and t.min() < -ZERO_TOL:
        raise ValueError(f"{what}: negative entry {t.min():.3e}")
    sums = t.sum(axis=-1)
    if np.abs(sums - 1.0).max() > NORM_TOL:
        raise ValueError(f"{what}: conditional slices must each sum to 1")
    return _readonly(t)


@dataclass(frozen=True)
class FactorizedInput:
    """The product-form encoder input P(u,v1,v2) P(x1|u,v1) P(x2|u,v2).

    ``p_uv1v2`` is a JointDist over axes (U, V1, V2); the conditionals are
    stochastic tensors of shapes (|U|,|V1|,|X1|) and (|U|,|V2|,|X2|).
    """

    p_uv1v2: JointDist
    p_x1_given_uv1: np.ndarray
    p_x2_given_uv2: np.ndarray

    def __post_init__(self):
        if self.p_uv1v2.names != (AX_U, AX_V1, AX_V2):
            raise ValueError(
                f"p_uv1v2 axes must be (U, V1, V2), got {self.p_uv1v2.names}"
            )
        cu, cv1, cv2 = (a.card for a in self.p_uv1v2.axes)
        cx1 = np.asarray(self.p_x1_given_uv1).shape[-1]
        cx2 = np.asarray(self.p_x2_given_uv2).shape[-1]
        object.__setattr__(
            self, "p_x1_given_uv1",
            _check_conditional(self.p_x1_given_uv1, (cu, cv1, cx1), "p(x1|u,v1)"),
        )
        object.__setattr__(
            self, "p_x2_given_uv2",
            _check_conditional(self.p_x2_given_uv2, (cu, cv2, cx2), "p(x2|u,v2)"),
        )

    @property
    def card_x1(self) -> int:
        return self.p_x1_given_uv1.shape[-1]

    @property
    def card_x2(self) -> int:
        return self.p_x2_given_uv2.shape[-1]

    def to_json_dict(self) -> dict:
        return {
            "p_uv1v2": self.p_uv1v2.to_json_dict(),
            "p_x1_given_uv1": np.asarray(self.p_x1_given_uv1).tolist(),
            "p_x2_given_uv2": np.asarray(self.p_x2_given_uv2).tolist(),
        }


def expand_factorized(f: FactorizedInput) -> JointDist:
    """The full joint P(u,v1,v2,x1,x2) of a factorized input."""
    probs = np.einsum(
        "uvw,uvx,uwy->uvwxy",
        f.p_uv1v2.probs, f.p_x1_given_uv1, f.p_x2_given_uv2,
    )
    cu, cv1, cv2 = (a.card for a in f.p_uv1v2.axes)
    axes = (
        Axis(AX_U, cu), Axis(AX_V1, cv1), Axis(AX_V2, cv2),
        Axis(AX_X1, f.card_x1), Axis(AX_X2, f.card_x2),
    )
    return JointDist(axes, probs)


def independent_inputs(p1: np.ndarray, p2: np.ndarray) -> FactorizedInput:
    """Degenerate factorized input with |U|=|V1|=|V2|=1 and X1 indep X2."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    pu = JointDist((Axis(AX_U, 1), Axis(AX_V1, 1), Axis(AX_V2, 1)),
                   np.ones((1, 1, 1)))
    return FactorizedInput(pu, p1.reshape(1, 1, -1), p2.reshape(1, 1, -1))


def lifted_joint_input(p_x1x2: np.ndarray) -> FactorizedInput:
    """Lift a joint P(x1,x2) to V_i = X_i with deterministic conditionals."""
    p = np.asarray(p_x1x2, dtype=float)
    c1, c2 = p.shape
    pu = JointDist(
        (Axis(AX_U, 1), Axis(AX_V1, c1), Axis(AX_V2, c2)), p.reshape(1, c1, c2)
    )
    return FactorizedInput(pu, np.eye(c1).reshape(1, c1, c1),
                           np.eye(c2).reshape(1, c2, c2))
