"""Discrete memoryless two-user MACs: the transition tensor P(y|x1,x2),
JSON (de)serialization, and a few standard small channels used in tests
and examples."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .probability import NORM_TOL, ZERO_TOL, Axis, SchemaError, _parse_axes_probs


@dataclass(frozen=True)
class DiscreteMAC:
    """A memoryless MAC with finite alphabets and transition P(y|x1,x2).

    ``transition`` has shape (card_x1, card_x2, card_y); every (x1, x2)
    slice is a distribution over y.
    """

    card_x1: int
    card_x2: int
    card_y: int
    transition: np.ndarray

    def __post_init__(self):
        t = np.array(self.transition, dtype=float, copy=True)
        shape = (self.card_x1, self.card_x2, self.card_y)
        if t.shape != shape:
            raise ValueError(f"transition shape {t.shape}, expected {shape}")
        if t.min() < -ZERO_TOL:
            raise ValueError(f"negative transition probability {t.min():.3e}")
        rows = t.sum(axis=-1)
        if np.abs(rows - 1.0).max() > NORM_TOL:
            bad = np.unravel_index(np.abs(rows - 1.0).argmax(), rows.shape)
            raise ValueError(
                f"P(y|x1={bad[0]},x2={bad[1]}) sums to {rows[bad]!r}, not 1"
            )
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)

    @classmethod
    def from_transition(cls, transition) -> "DiscreteMAC":
        t = np.asarray(transition, dtype=float)
        return cls(t.shape[0], t.shape[1], t.shape[2], t)

    # -- JSON schema: axes (X1, X2, Y) + flat row-major probs ---------------

    def to_json_dict(self) -> dict:
        return {
            "axes": [
                {"name": "X1", "card": self.card_x1},
                {"name": "X2", "card": self.card_x2},
                {"name": "Y", "card": self.card_y},
            ],
            "probs": [float(x) for x in self.transition.ravel(order="C")],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DiscreteMAC":
        axes, probs = _parse_axes_probs(obj)
        names = tuple(a.name for a in axes)
        if names != ("X1", "X2", "Y"):
            raise SchemaError(f"channel axes must be (X1, X2, Y), got {names}")
        try:
            return cls(axes[0].card, axes[1].card, axes[2].card, probs)
        except ValueError as e:
            raise SchemaError(str(e)) from e


def load_channel(path) -> DiscreteMAC:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
    return DiscreteMAC.from_json_dict(obj)


def save_channel(channel: DiscreteMAC, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel.to_json_dict(), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Standard small channels
# ---------------------------------------------------------------------------


def binary_adder() -> DiscreteMAC:
    """Y = X1 + X2 over {0,1,2}; dependence between inputs helps here."""
    t = np.zeros((2, 2, 3))
    for x1 in range(2):
        for x2 in range(2):
            t[x1, x2, x1 + x2] = 1.0
    return DiscreteMAC.from_transition(t)


def binary_xor() -> DiscreteMAC:
    """Y = X1 xor X2; dependent inputs gain nothing over independent ones."""
    t = np.zeros((2, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            t[x1, x2, x1 ^ x2] = 1.0
    return DiscreteMAC.from_transition(t)


def useless_channel(card_y: int = 2) -> DiscreteMAC:
    """Y independent of both inputs (uniform output)."""
    t = np.full((2, 2, card_y), 1.0 / card_y)
    return DiscreteMAC.from_transition(t)


def random_channel(rng: np.random.Generator, card_x1=2, card_x2=2, card_y=2,
                   floor: float = 0.0) -> DiscreteMAC:
    """Random stochastic transition tensor; ``floor`` blends toward uniform
    to keep rows away from zero when derivative checks need smoothness."""
    t = rng.dirichlet(np.ones(card_y), size=(card_x1, card_x2))
    if floor > 0.0:
        t = (1.0 - floor) * t + floor / card_y
    return DiscreteMAC.from_transition(t)
