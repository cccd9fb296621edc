"""Truncation sets and northwest-corner blocks.

A truncation set is a finite subset of the state space; the northwest corner
restricts the transition (or rate) matrix to it, recording each row's lost
mass as an exit weight.  Sublevel and prefix constructions scan a finite
window and warn (``WindowSuspectWarning``) whenever the window itself may
clip the true set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, TextIO

import numpy as np

from .chain import ROW_TOL, CountableChain, CountableRateChain
from .errors import EmptySetError, WindowSuspectWarning


@dataclass(frozen=True, eq=False)
class TruncationSet:
    """Strictly increasing list of retained states."""

    states: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states, dtype=np.int64))
        if self.states.size == 0:
            raise EmptySetError("truncation set is empty")
        if np.any(np.diff(self.states) <= 0):
            raise ValueError("truncation set states must be strictly increasing")

    @property
    def size(self) -> int:
        return int(self.states.size)

    def local_index(self, state: int) -> int:
        pos = int(np.searchsorted(self.states, state))
        if pos >= self.states.size or self.states[pos] != state:
            raise KeyError(f"state {state} not in truncation set")
        return pos

    def __contains__(self, state: int) -> bool:
        pos = int(np.searchsorted(self.states, state))
        return pos < self.states.size and self.states[pos] == state

    def write_csv(self, fh: TextIO) -> None:
        fh.write("state\n")
        for s in self.states:
            fh.write(f"{int(s)}\n")


@dataclass(frozen=True, eq=False)
class TruncationBlock:
    """Northwest corner: substochastic in-set matrix plus per-row exit mass."""

    set: TruncationSet
    B: np.ndarray
    exit: np.ndarray

    def __post_init__(self):
        k = self.set.size
        if self.B.shape != (k, k) or self.exit.shape != (k,):
            raise ValueError("block shapes do not match truncation set size")
        if np.any(self.B < 0.0) or np.any(self.exit < 0.0):
            raise ValueError("block entries and exits must be nonnegative")
        defect = np.abs(self.B.sum(axis=1) + self.exit - 1.0)
        if defect.max() > ROW_TOL:
            bad = int(self.set.states[int(np.argmax(defect))])
            raise ValueError(f"row {bad}: in-set mass plus exit differs from 1 by {defect.max():.3e}")


@dataclass(frozen=True, eq=False)
class RateTruncationBlock:
    """Rate-matrix corner: in-set rates with original diagonals, plus exit rates."""

    set: TruncationSet
    Q: np.ndarray
    exit: np.ndarray

    def __post_init__(self):
        k = self.set.size
        if self.Q.shape != (k, k) or self.exit.shape != (k,):
            raise ValueError("block shapes do not match truncation set size")
        if np.any(self.exit < 0.0):
            raise ValueError("exit rates must be nonnegative")


def sublevel_set(g: Callable[[int], float], level: float, window: int) -> TruncationSet:
    """States x < window with g(x) <= level (a closed sublevel set).

    Raises EmptySetError when nothing qualifies.  Warns when g(window-1)
    <= level, since the true sublevel set may then extend past the window.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    values = np.array([g(x) for x in range(window)], dtype=np.float64)
    if np.any(values < 0.0):
        bad = int(np.argmin(values))
        raise ValueError(f"g must be nonnegative; g({bad}) = {values[bad]}")
    states = np.nonzero(values <= level)[0]
    if states.size == 0:
        raise EmptySetError(f"no state in the window has g(x) <= {level}")
    if values[window - 1] <= level:
        warnings.warn(
            f"g({window - 1}) <= {level}: sublevel set may extend beyond the window",
            WindowSuspectWarning,
            stacklevel=2,
        )
    return TruncationSet(states.astype(np.int64))


def g_ordered_prefix(g: Callable[[int], float], k: int, window: int) -> TruncationSet:
    """Smallest >= k states by g-value, closed under ties at the boundary.

    The result A satisfies max_{x in A} g(x) <= min over the rest of the
    window, which is what sublevel-style truncations require.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if window < k:
        raise ValueError("window must be >= k")
    values = np.array([g(x) for x in range(window)], dtype=np.float64)
    if np.any(values < 0.0):
        bad = int(np.argmin(values))
        raise ValueError(f"g must be nonnegative; g({bad}) = {values[bad]}")
    order = np.lexsort((np.arange(window), values))
    boundary = values[order[k - 1]]
    states = np.nonzero(values <= boundary)[0]
    if values[window - 1] <= boundary:
        warnings.warn(
            f"g({window - 1}) <= boundary value {boundary}: prefix may extend beyond the window",
            WindowSuspectWarning,
            stacklevel=2,
        )
    return TruncationSet(states.astype(np.int64))


def interval_set(n: int) -> TruncationSet:
    """The interval {0, ..., n}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return TruncationSet(np.arange(n + 1, dtype=np.int64))


def northwest_corner(chain: CountableChain, A: TruncationSet) -> TruncationBlock:
    """Restrict the chain's rows to A; exit(x) = 1 - in-set mass.

    Computing the exit as one minus the retained mass keeps it exact even
    when a row's support extends far beyond any materialized window.
    """
    states = A.states
    k = states.size
    B = np.zeros((k, k))
    exit_mass = np.zeros(k)
    for i, x in enumerate(states):
        row = chain.row(int(x))
        pos = np.searchsorted(states, row.targets)
        hit = (pos < k) & (states[np.minimum(pos, k - 1)] == row.targets)
        B[i, pos[hit]] = row.probs[hit]
        exit_mass[i] = max(0.0, 1.0 - float(row.probs[hit].sum()))
    return TruncationBlock(A, B, exit_mass)


def rate_northwest_corner(qchain: CountableRateChain, A: TruncationSet) -> RateTruncationBlock:
    """Rate analog: keep in-set off-diagonal rates and the full diagonal.

    exit(x) = lambda(x) - retained off-diagonal rate, so block rows sum to
    -exit(x).
    """
    states = A.states
    k = states.size
    Q = np.zeros((k, k))
    exit_rate = np.zeros(k)
    for i, x in enumerate(states):
        row = qchain.row(int(x))
        pos = np.searchsorted(states, row.targets)
        hit = (pos < k) & (states[np.minimum(pos, k - 1)] == row.targets)
        Q[i, pos[hit]] = row.rates[hit]
        Q[i, i] = -row.total_rate
        exit_rate[i] = max(0.0, row.total_rate - float(row.rates[hit].sum()))
    return RateTruncationBlock(A, Q, exit_rate)
