"""Stochasticize truncation blocks by redistributing exit mass.

Every augmentation here adds each row's exit mass back into the set
according to a redistribution row, so the result dominates the corner
entrywise by construction.  Redistribution per row recovers the general
case; a single shared row is the linear case; a point mass is the
fixed-state case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .chain import Distribution, FiniteRate, FiniteStochastic
from .errors import SupportMismatchError
from .truncation import RateTruncationBlock, TruncationBlock

KINDS = ("general", "linear", "fixed-linear", "fixed-state", "first-state", "last-state")


@dataclass(frozen=True, eq=False)
class AugmentedMatrix:
    """A stochastic completion P_n of a truncation block, P_n >= B entrywise."""

    base: TruncationBlock
    P_n: FiniteStochastic
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        if np.any(self.P_n.matrix < self.base.B):
            raise ValueError("augmentation does not dominate the truncation block")

    @property
    def states(self) -> np.ndarray:
        return self.P_n.states

    def redistribution_row(self, x: int) -> Distribution:
        """Normalized added mass of row x; defined only for leaking rows."""
        i = self.base.set.local_index(x)
        e = self.base.exit[i]
        if e <= 0.0:
            raise ValueError(f"state {x} has no exit mass to redistribute")
        added = (self.P_n.matrix[i] - self.base.B[i]) / e
        keep = added > 0.0
        return Distribution(self.states[keep], added[keep] / added[keep].sum())

    def write_csv(self, fh) -> None:
        fh.write(",".join(str(int(s)) for s in self.states) + "\n")
        for row in self.P_n.matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True, eq=False)
class RateAugmented:
    """A rate-matrix completion Q_n of a rate block, dominating off-diagonals."""

    base: RateTruncationBlock
    Q_n: FiniteRate
    kind: str

    def __post_init__(self):
        off_base = self.base.Q.copy()
        off_new = self.Q_n.matrix.copy()
        np.fill_diagonal(off_base, 0.0)
        np.fill_diagonal(off_new, 0.0)
        if np.any(off_new < off_base):
            raise ValueError("rate augmentation does not dominate off-diagonal rates")


def _nu_vector(block: TruncationBlock | RateTruncationBlock, nu: Distribution) -> np.ndarray:
    try:
        return nu.dense_on(block.set.states)
    except SupportMismatchError as exc:
        raise SupportMismatchError(f"redistribution law not supported on the truncation set: {exc}") from exc


def augment_linear(block: TruncationBlock, nu: Distribution, kind: str = "linear") -> AugmentedMatrix:
    """P_n(x, y) = B(x, y) + exit(x) * nu(y)."""
    v = _nu_vector(block, nu)
    matrix = block.B + np.outer(block.exit, v)
    return AugmentedMatrix(block, FiniteStochastic(block.set.states, matrix), kind)


def augment_fixed_state(block: TruncationBlock, y: int) -> AugmentedMatrix:
    """Linear augmentation with a point mass at y (y must lie in the set)."""
    if y not in block.set:
        raise SupportMismatchError(f"state {y} not in the truncation set")
    return augment_linear(block, Distribution.point(y), kind="fixed-state")


def augment_first_state(block: TruncationBlock) -> AugmentedMatrix:
    return augment_linear(block, Distribution.point(int(block.set.states[0])), kind="first-state")


def augment_last_state(block: TruncationBlock) -> AugmentedMatrix:
    return augment_linear(block, Distribution.point(int(block.set.states[-1])), kind="last-state")


def augment_fixed_linear(block: TruncationBlock, weights: Callable[[int], float]) -> AugmentedMatrix:
    """Linear augmentation with a countable law renormalized over the set."""
    w = np.array([weights(int(x)) for x in block.set.states], dtype=np.float64)
    if np.any(w < 0.0):
        raise ValueError("redistribution weights must be nonnegative")
    total = float(w.sum())
    if total <= 0.0:
        raise ValueError("redistribution weights vanish on the truncation set")
    keep = w > 0.0
    nu = Distribution(block.set.states[keep], w[keep] / total)
    return augment_linear(block, nu, kind="fixed-linear")


def augment_general(block: TruncationBlock, rows: Mapping[int, Distribution]) -> AugmentedMatrix:
    """Per-row redistribution: P_n(x, .) = B(x, .) + exit(x) * rows[x].

    ``rows`` is keyed by global state index and must cover every row with
    positive exit mass; rows without exit mass may be omitted.
    """
    matrix = block.B.copy()
    for i, x in enumerate(block.set.states):
        e = block.exit[i]
        if e <= 0.0:
            continue
        if int(x) not in rows:
            raise ValueError(f"missing redistribution row for leaking state {int(x)}")
        matrix[i] += e * _nu_vector(block, rows[int(x)])
    return AugmentedMatrix(block, FiniteStochastic(block.set.states, matrix), "general")


def uniform_redistribution(block: TruncationBlock) -> dict[int, Distribution]:
    """Uniform-on-the-set redistribution for every leaking row."""
    k = block.set.size
    uniform = Distribution(block.set.states, np.full(k, 1.0 / k))
    return {int(x): uniform for i, x in enumerate(block.set.states) if block.exit[i] > 0.0}


def random_redistribution(block: TruncationBlock, seed: int) -> dict[int, Distribution]:
    """Seeded Dirichlet(1, ..., 1) redistribution rows for leaking rows."""
    rng = np.random.default_rng(seed)
    k = block.set.size
    out: dict[int, Distribution] = {}
    for i, x in enumerate(block.set.states):
        if block.exit[i] > 0.0:
            out[int(x)] = Distribution(block.set.states, rng.dirichlet(np.ones(k)))
    return out


def augment_uniform(block: TruncationBlock) -> AugmentedMatrix:
    return augment_general(block, uniform_redistribution(block))


def augment_random(block: TruncationBlock, seed: int) -> AugmentedMatrix:
    return augment_general(block, random_redistribution(block, seed))


def augment_rate_block(
    block: RateTruncationBlock, nu: Distribution, kind: str = "linear"
) -> RateAugmented:
    """Reroute exit rates into the set: Q_n(x, y) = Q(x, y) + exit(x) * nu(y).

    Redistribution mass aimed at x itself is folded into the diagonal (a
    self-rate means no added transition), which is exactly what makes the
    rows sum to zero.
    """
    v = _nu_vector(block, nu)
    matrix = block.Q + np.outer(block.exit, v)
    return RateAugmented(block, FiniteRate(block.set.states, matrix), kind)


def augment_rate_fixed_state(block: RateTruncationBlock, y: int) -> RateAugmented:
    if y not in block.set:
        raise SupportMismatchError(f"state {y} not in the truncation set")
    return augment_rate_block(block, Distribution.point(y), kind="fixed-state")


def augment_rate_first_state(block: RateTruncationBlock) -> RateAugmented:
    return augment_rate_block(block, Distribution.point(int(block.set.states[0])), kind="first-state")


def augment_rate_last_state(block: RateTruncationBlock) -> RateAugmented:
    return augment_rate_block(block, Distribution.point(int(block.set.states[-1])), kind="last-state")


def augment_rate_uniform(block: RateTruncationBlock) -> RateAugmented:
    k = block.set.size
    nu = Distribution(block.set.states, np.full(k, 1.0 / k))
    return augment_rate_block(block, nu, kind="linear")
