"""Core representations: countable chains, finite matrices, distributions.

States of a countable chain are nonnegative integers under a caller-supplied
enumeration; the library never re-enumerates.  Rows are materialized lazily
from a pure ``row_fn`` and memoized (the fill is idempotent, so concurrent
reads are safe).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import RowError, SupportMismatchError

# Rows must be stochastic to this absolute tolerance; worse rows are hard
# errors at materialization, never silently renormalized.
ROW_TOL = 1e-12

RATE_TOL = 1e-10


def _merge_pairs(pairs: Iterable[tuple[int, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Sort by target, merge duplicate targets, drop exact zeros."""
    items: dict[int, float] = {}
    for target, value in pairs:
        items[int(target)] = items.get(int(target), 0.0) + float(value)
    targets = np.array(sorted(items), dtype=np.int64)
    values = np.array([items[t] for t in targets], dtype=np.float64)
    keep = values != 0.0
    return targets[keep], values[keep]


@dataclass(frozen=True, eq=False)
class TransitionRow:
    """One row P(x, .) as sorted (target, prob) pairs with unit mass."""

    targets: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], state: int = -1) -> "TransitionRow":
        targets, probs = _merge_pairs(pairs)
        if targets.size and targets[0] < 0:
            raise RowError(state, float(targets[0]), "negative target state")
        if np.any(probs < 0.0):
            raise RowError(state, float(probs.min()), "negative transition probability")
        total = float(probs.sum())
        if abs(total - 1.0) > ROW_TOL:
            raise RowError(state, abs(total - 1.0), f"row mass {total!r} not within {ROW_TOL} of 1")
        return cls(targets, probs)

    def mass_in(self, states: np.ndarray) -> float:
        """Total probability assigned to ``states`` (sorted array)."""
        pos = np.searchsorted(states, self.targets)
        hit = (pos < states.size) & (states[np.minimum(pos, states.size - 1)] == self.targets)
        return float(self.probs[hit].sum())


@dataclass(frozen=True, eq=False)
class RateRow:
    """Off-diagonal rates Q(x, .) of one state; the diagonal is -sum."""

    targets: np.ndarray
    rates: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], state: int) -> "RateRow":
        targets, rates = _merge_pairs(pairs)
        if targets.size and targets[0] < 0:
            raise RowError(state, float(targets[0]), "negative target state")
        if np.any(targets == state):
            raise RowError(state, 0.0, "self-rate entry is not allowed")
        if np.any(rates < 0.0):
            raise RowError(state, float(rates.min()), "negative rate")
        return cls(targets, rates)

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())


class CountableChain:
    """Countable-state Markov chain given by a pure row function.

    ``row_fn`` maps a state to raw (target, prob) pairs; rows are checked and
    memoized on first access.  ``analytic_pi``, when present, evaluates the
    reference stationary mass at a state.  ``rows_exact`` is False for chains
    whose abstract rows have infinite support and are materialized as tails
    truncated within ROW_TOL; drift checks then require an explicit bound on
    the Lyapunov function over the dropped tail.
    """

    def __init__(
        self,
        row_fn: Callable[[int], Sequence[tuple[int, float]]],
        name: str,
        analytic_pi: Optional[Callable[[int], float]] = None,
        metadata: str = "",
        rows_exact: bool = True,
    ):
        self.row_fn = row_fn
        self.name = name
        self.analytic_pi = analytic_pi
        self.metadata = metadata
        self.rows_exact = rows_exact
        self._rows: dict[int, TransitionRow] = {}

    def row(self, x: int) -> TransitionRow:
        if x < 0:
            raise ValueError(f"state index must be nonnegative, got {x}")
        row = self._rows.get(x)
        if row is None:
            row = TransitionRow.from_pairs(self.row_fn(x), state=x)
            self._rows[x] = row
        return row

    def __repr__(self) -> str:
        return f"CountableChain({self.name!r})"


class CountableRateChain:
    """Countable-state Markov jump process given by a pure rate-row function."""

    def __init__(
        self,
        row_fn: Callable[[int], Sequence[tuple[int, float]]],
        name: str,
        analytic_pi: Optional[Callable[[int], float]] = None,
        metadata: str = "",
    ):
        self.row_fn = row_fn
        self.name = name
        self.analytic_pi = analytic_pi
        self.metadata = metadata
        self._rows: dict[int, RateRow] = {}

    def row(self, x: int) -> RateRow:
        if x < 0:
            raise ValueError(f"state index must be nonnegative, got {x}")
        row = self._rows.get(x)
        if row is None:
            row = RateRow.from_pairs(self.row_fn(x), state=x)
            self._rows[x] = row
        return row

    def __repr__(self) -> str:
        return f"CountableRateChain({self.name!r})"


@dataclass(frozen=True, eq=False)
class FiniteStochastic:
    """Dense stochastic matrix over an ordered list of global state labels."""

    states: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states, dtype=np.int64))
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=np.float64))
        k = self.states.size
        if self.matrix.shape != (k, k):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {k} states")
        if k and np.any(np.diff(self.states) <= 0):
            raise ValueError("state list must be strictly increasing")
        if np.any(self.matrix < 0.0):
            raise ValueError("stochastic matrix has a negative entry")
        defect = np.abs(self.matrix.sum(axis=1) - 1.0)
        if defect.size and defect.max() > ROW_TOL:
            bad = int(np.argmax(defect))
            raise RowError(int(self.states[bad]), float(defect.max()), "matrix row mass not 1")

    @property
    def size(self) -> int:
        return int(self.states.size)

    def index_of(self, state: int) -> int:
        pos = int(np.searchsorted(self.states, state))
        if pos >= self.states.size or self.states[pos] != state:
            raise SupportMismatchError(f"state {state} not in matrix state list")
        return pos


@dataclass(frozen=True, eq=False)
class FiniteRate:
    """Dense rate matrix: nonnegative off-diagonals, rows sum to zero."""

    states: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states, dtype=np.int64))
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=np.float64))
        k = self.states.size
        if self.matrix.shape != (k, k):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {k} states")
        if k and np.any(np.diff(self.states) <= 0):
            raise ValueError("state list must be strictly increasing")
        off = self.matrix.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0.0):
            raise ValueError("rate matrix has a negative off-diagonal entry")
        sums = np.abs(self.matrix.sum(axis=1))
        if sums.size and sums.max() > RATE_TOL:
            bad = int(np.argmax(sums))
            raise RowError(int(self.states[bad]), float(sums.max()), "rate row does not sum to 0")

    @property
    def size(self) -> int:
        return int(self.states.size)

    @property
    def jump_rates(self) -> np.ndarray:
        """Total jump rate per state, lambda(x) = -Q(x, x)."""
        return -np.diag(self.matrix)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Finite probability vector keyed by global state indices."""

    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", np.asarray(self.support, dtype=np.int64))
        object.__setattr__(self, "mass", np.asarray(self.mass, dtype=np.float64))
        if self.support.shape != self.mass.shape or self.support.ndim != 1:
            raise ValueError("support and mass must be 1-d arrays of equal length")
        if self.support.size and np.any(np.diff(self.support) <= 0):
            raise ValueError("support must be strictly increasing")
        if np.any(self.mass < 0.0):
            raise ValueError("distribution has negative mass")
        total = float(self.mass.sum())
        if abs(total - 1.0) > ROW_TOL:
            raise ValueError(f"distribution mass {total!r} not within {ROW_TOL} of 1")

    @classmethod
    def point(cls, state: int) -> "Distribution":
        return cls(np.array([state]), np.array([1.0]))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "Distribution":
        support, mass = _merge_pairs(pairs)
        return cls(support, mass)

    def mass_at(self, state: int) -> float:
        pos = int(np.searchsorted(self.support, state))
        if pos < self.support.size and self.support[pos] == state:
            return float(self.mass[pos])
        return 0.0

    def dense_on(self, states: np.ndarray) -> np.ndarray:
        """Mass vector aligned with ``states`` (sorted); support must fit."""
        states = np.asarray(states, dtype=np.int64)
        pos = np.searchsorted(states, self.support)
        ok = (pos < states.size) & (states[np.minimum(pos, states.size - 1)] == self.support)
        if not np.all(ok):
            missing = self.support[~ok]
            raise SupportMismatchError(f"support states {missing.tolist()} outside target state list")
        out = np.zeros(states.size)
        out[pos] = self.mass
        return out

    def write_csv(self, fh: TextIO) -> None:
        fh.write("state,mass\n")
        for s, m in zip(self.support, self.mass):
            fh.write(f"{int(s)},{m!r}\n")

    @classmethod
    def read_csv(cls, fh: TextIO) -> "Distribution":
        header = fh.readline().strip()
        if header != "state,mass":
            raise ValueError(f"unexpected distribution CSV header: {header!r}")
        pairs = []
        for line in fh:
            if not line.strip():
                continue
            s, m = line.split(",")
            pairs.append((int(s), float(m)))
        return cls.from_pairs(pairs)


@dataclass(frozen=True)
class RowViolation:
    state: int
    defect: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    window: int
    violations: tuple[RowViolation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_chain(chain: CountableChain, window: int) -> ValidationReport:
    """Check row invariants for states 0..window-1 without raising.

    Defect for a bad row mass is |mass - 1|; malformed entries (negative
    probabilities or targets) are reported with their own defect.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    violations = []
    for x in range(window):
        try:
            raw = list(chain.row_fn(x))
        except Exception as exc:  # row_fn itself failed
            violations.append(RowViolation(x, float("nan"), f"row_fn raised: {exc}"))
            continue
        targets, probs = _merge_pairs(raw)
        if targets.size and targets[0] < 0:
            violations.append(RowViolation(x, float(targets[0]), "negative target state"))
            continue
        if np.any(probs < 0.0):
            violations.append(RowViolation(x, float(probs.min()), "negative transition probability"))
            continue
        defect = abs(float(probs.sum()) - 1.0)
        if defect > ROW_TOL:
            violations.append(RowViolation(x, defect, "row mass not within tolerance of 1"))
    return ValidationReport(window=window, violations=tuple(violations))


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance: half the L1 distance over the union support."""
    union = np.union1d(p.support, q.support)
    return 0.5 * float(np.abs(p.dense_on(union) - q.dense_on(union)).sum())


def tv_to_analytic(p: Distribution, pi: Callable[[int], float]) -> float:
    """TV distance to a countable reference law evaluated pointwise.

    The reference mass off the finite support contributes exactly
    1 - pi(support), so tails never need enumerating.
    """
    ref = np.array([pi(int(x)) for x in p.support])
    return 0.5 * (float(np.abs(p.mass - ref).sum()) + (1.0 - float(ref.sum())))


def m_step_distribution(P: FiniteStochastic, mu0: Distribution, m: int) -> Distribution:
    """Distribution of X_m under P started from mu0 (m vector-matrix products)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    v = mu0.dense_on(P.states)
    for _ in range(m):
        v = v @ P.matrix
    return Distribution(P.states.copy(), v)
