"""N-mode bosonic states truncated at two total excitations.

Everything downstream (witness evaluation, the array simulator, the
estimators) works with states of at most two collective excitations, so a
dense but tiny representation is enough: one vacuum amplitude, N
single-excitation amplitudes, and an upper-triangular map of
double-excitation amplitudes keyed by unordered mode pairs (i <= j).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-12


class ModeCountMismatchError(ValueError):
    """Two states with different numbers of modes were combined."""


@dataclass(frozen=True)
class TruncatedState:
    """Pure state of ``n_modes`` bosonic modes with at most two excitations.

    amp1 is indexed by mode, amp2 by unordered pairs (i, j) with i <= j;
    i == j means a double excitation of a single mode.
    """

    n_modes: int
    amp0: complex
    amp1: tuple[complex, ...]
    amp2: dict[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")
        if len(self.amp1) != self.n_modes:
            raise ValueError("amp1 length must equal n_modes")
        for (i, j) in self.amp2:
            if not (0 <= i <= j < self.n_modes):
                raise ValueError(f"amp2 key {(i, j)} out of range for n_modes={self.n_modes}")

    def norm_sq(self) -> float:
        return (
            abs(self.amp0) ** 2
            + sum(abs(a) ** 2 for a in self.amp1)
            + sum(abs(a) ** 2 for a in self.amp2.values())
        )


@dataclass(frozen=True)
class ModeWeights:
    """Non-negative single-excitation weights (summing to 1) plus phases."""

    weights: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.phases):
            raise ValueError("weights and phases must have equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        total = sum(self.weights)
        if abs(total - 1.0) > NORM_TOL * max(1.0, len(self.weights)):
            raise ValueError(f"weights must sum to 1, got {total!r}")

    @property
    def n_modes(self) -> int:
        return len(self.weights)

    def amplitudes(self) -> np.ndarray:
        """Complex amplitudes sqrt(w_i) * exp(i phi_i)."""
        return np.sqrt(np.asarray(self.weights)) * np.exp(1j * np.asarray(self.phases))


def make_w_state(n_modes: int, phases: list[float] | tuple[float, ...]) -> TruncatedState:
    """Single excitation shared with equal weight 1/N over all modes."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if len(phases) != n_modes:
        raise ValueError(f"need {n_modes} phases, got {len(phases)}")
    inv = 1.0 / math.sqrt(n_modes)
    amp1 = tuple(cmath.exp(1j * p) * inv for p in phases)
    return TruncatedState(n_modes=n_modes, amp0=0j, amp1=amp1)


def make_weighted_w(weights: ModeWeights) -> TruncatedState:
    """Single-excitation state with amplitudes sqrt(w_i) e^{i phi_i}."""
    amp1 = tuple(complex(a) for a in weights.amplitudes())
    return TruncatedState(n_modes=weights.n_modes, amp0=0j, amp1=amp1)


def make_biseparable(n_modes: int, l: int, theta1: float, theta2: float) -> TruncatedState:
    """Product of two blocks: (cos t1 |vac> + sin t1 |W_l>) x (cos t2 |vac> + sin t2 |W_{N-l}>).

    The first block spans modes [0, l), the second [l, N). This is the
    extremal family for testing witness non-negativity on states without
    genuine high-depth entanglement.
    """
    n = n_modes
    if not (1 <= l <= n - 1):
        raise ValueError(f"l must be in [1, {n - 1}], got {l}")
    a0, a1 = math.cos(theta1), math.sin(theta1)
    b0, b1 = math.cos(theta2), math.sin(theta2)
    m = n - l
    amp0 = complex(a0 * b0)
    amp1 = [0j] * n
    for i in range(l):
        amp1[i] = complex(a1 * b0 / math.sqrt(l))
    for j in range(l, n):
        amp1[j] = complex(a0 * b1 / math.sqrt(m))
    amp2: dict[tuple[int, int], complex] = {}
    if a1 != 0.0 and b1 != 0.0:
        c = complex(a1 * b1 / math.sqrt(l * m))
        for i in range(l):
            for j in range(l, n):
                amp2[(i, j)] = c
    return TruncatedState(n_modes=n, amp0=amp0, amp1=tuple(amp1), amp2=amp2)


def sector_populations(state: TruncatedState) -> tuple[float, float, float]:
    """Squared norms of the zero/one/two-excitation sectors."""
    w0 = abs(state.amp0) ** 2
    w1 = sum(abs(a) ** 2 for a in state.amp1)
    w2 = sum(abs(a) ** 2 for a in state.amp2.values())
    return (w0, w1, w2)


def inner_product(a: TruncatedState, b: TruncatedState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.n_modes != b.n_modes:
        raise ModeCountMismatchError(
            f"mode counts differ: {a.n_modes} vs {b.n_modes}"
        )
    out = a.amp0.conjugate() * b.amp0
    out += sum(x.conjugate() * y for x, y in zip(a.amp1, b.amp1))
    for key, y in b.amp2.items():
        x = a.amp2.get(key)
        if x is not None:
            out += x.conjugate() * y
    return out
