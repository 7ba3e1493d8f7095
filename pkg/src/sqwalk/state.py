"""
Walker state on the two-dimensional lattice.

The coin space is spanned by ``|l>, |u>, |d>, |r>`` in that order, so a coin
spinor is a length-4 complex vector indexed by :class:`CoinIndex`. A
:class:`WaveFunction` stores one spinor per lattice site on a dense square
``[-T, T]^2`` where ``T`` is the lattice capacity; sites the walker cannot
have reached hold exact zeros.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NormalizationError

__all__ = [
    "CoinIndex",
    "InitialCoinState",
    "WaveFunction",
    "make_initial",
    "norm",
    "INPUT_NORM_TOL",
    "EVOLVED_NORM_TOL",
]

INPUT_NORM_TOL = 1e-12
EVOLVED_NORM_TOL = 1e-10


class CoinIndex(enum.IntEnum):
    L = 0
    U = 1
    D = 2
    R = 3


@dataclass(frozen=True)
class InitialCoinState:
    """Coin amplitudes ``(alpha, beta, gamma, delta)`` of the walker at the origin.

    Construction does not enforce normalization; :func:`make_initial` does.
    """

    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    @classmethod
    def from_sequence(cls, values: Sequence[complex]) -> "InitialCoinState":
        if len(values) != 4:
            raise ValueError(f"expected 4 coin amplitudes, got {len(values)}")
        return cls(*(complex(v) for v in values))

    @classmethod
    def from_reals(cls, values: Sequence[float]) -> "InitialCoinState":
        """Build from ``re, im`` pairs: ``(re_a, im_a, re_b, im_b, ...)``."""
        if len(values) != 8:
            raise ValueError(f"expected 8 reals (re/im of 4 amplitudes), got {len(values)}")
        return cls(*(complex(values[2 * i], values[2 * i + 1]) for i in range(4)))

    def as_array(self) -> NDArray[np.complex128]:
        return np.array([self.alpha, self.beta, self.gamma, self.delta], dtype=np.complex128)

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in (self.alpha, self.beta, self.gamma, self.delta))

    def normalized(self) -> "InitialCoinState":
        n = math.sqrt(self.norm_squared())
        if n == 0.0:
            raise NormalizationError(1.0, INPUT_NORM_TOL)
        return InitialCoinState.from_sequence(self.as_array() / n)

    def to_reals(self) -> list[float]:
        out: list[float] = []
        for a in (self.alpha, self.beta, self.gamma, self.delta):
            out.extend((a.real, a.imag))
        return out


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Spinor field at step ``t`` on the dense lattice ``[-capacity, capacity]^2``.

    ``amplitudes[x + capacity, y + capacity, j]`` is the amplitude of coin
    state ``j`` at site ``(x, y)``. The array is marked read-only.
    """

    t: int
    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        a = self.amplitudes
        if a.ndim != 3 or a.shape[0] != a.shape[1] or a.shape[2] != 4 or a.shape[0] % 2 != 1:
            raise ValueError(f"amplitudes must have shape (2T+1, 2T+1, 4), got {a.shape}")
        if self.t < 0 or self.t > (a.shape[0] - 1) // 2:
            raise ValueError(f"step {self.t} does not fit a lattice of capacity {(a.shape[0] - 1) // 2}")
        a.flags.writeable = False

    @property
    def capacity(self) -> int:
        return (self.amplitudes.shape[0] - 1) // 2

    @classmethod
    def localized(cls, spinor: Sequence[complex], capacity: int) -> "WaveFunction":
        """Point state ``|0,0> (x) spinor`` at ``t = 0``; no normalization check."""
        if capacity < 0:
            raise ValueError("capacity must be non-negative")
        n = 2 * capacity + 1
        amps = np.zeros((n, n, 4), dtype=np.complex128)
        amps[capacity, capacity, :] = np.asarray(spinor, dtype=np.complex128)
        return cls(0, amps)

    def window(self) -> NDArray[np.complex128]:
        """View of the square ``[-t, t]^2`` that contains the whole support."""
        c, t = self.capacity, self.t
        return self.amplitudes[c - t : c + t + 1, c - t : c + t + 1, :]

    def spinor(self, x: int, y: int) -> NDArray[np.complex128]:
        c = self.capacity
        if abs(x) > c or abs(y) > c:
            return np.zeros(4, dtype=np.complex128)
        return self.amplitudes[x + c, y + c, :].copy()

    def scaled(self, factor: complex) -> "WaveFunction":
        return WaveFunction(self.t, self.amplitudes * factor)


def make_initial(state: InitialCoinState, capacity: int = 0) -> WaveFunction:
    """Localize ``state`` at the origin at ``t = 0``.

    Raises
    ------
    NormalizationError
        If ``|alpha|^2 + |beta|^2 + |gamma|^2 + |delta|^2`` differs from one
        by more than ``INPUT_NORM_TOL``.
    """
    deviation = abs(state.norm_squared() - 1.0)
    if deviation > INPUT_NORM_TOL:
        raise NormalizationError(deviation, INPUT_NORM_TOL)
    return WaveFunction.localized(state.as_array(), capacity)


def norm(psi: WaveFunction) -> float:
    """Total probability ``sum |amplitude|^2`` over sites and coin states."""
    w = psi.window()
    return math.fsum((w.real**2 + w.imag**2).ravel().tolist())
