"""
The four fixed 4x4 coins and their self-avoidance zero patterns.

Rows and columns follow the coin ordering ``l, u, d, r``. Only the 4x4 block
is stored; the walk applies the same block at every site.
"""

from __future__ import annotations

import enum

import numpy as np
from numpy.typing import NDArray

from .state import CoinIndex

__all__ = ["CoinKind", "build_coin", "is_unitary", "zero_pattern", "resolve_coin"]

L, U, D, R = CoinIndex.L, CoinIndex.U, CoinIndex.D, CoinIndex.R


class CoinKind(enum.Enum):
    GROVER = "grover"
    SELF_AVOID_COIN = "sc"
    SELF_AVOID_POSITION = "sp"
    SELF_AVOID_COIN_POSITION = "scp"


_MATRICES = {
    CoinKind.GROVER: (
        0.5,
        [[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]],
    ),
    CoinKind.SELF_AVOID_COIN: (
        1.0 / np.sqrt(3.0),
        [[0, 1, 1, -1], [1, 0, 1, 1], [1, -1, 0, -1], [-1, -1, 1, 0]],
    ),
    CoinKind.SELF_AVOID_POSITION: (
        1.0 / np.sqrt(3.0),
        [[-1, -1, 1, 0], [1, -1, 0, -1], [1, 0, 1, 1], [0, 1, 1, -1]],
    ),
    CoinKind.SELF_AVOID_COIN_POSITION: (
        1.0 / np.sqrt(2.0),
        [[0, -1, 1, 0], [1, 0, 0, -1], [1, 0, 0, 1], [0, 1, 1, 0]],
    ),
}

# No flip onto the same coin state.
_DIAGONAL = frozenset((j, j) for j in CoinIndex)
# No flip onto the direction pointing back: (row, col) = (r, l), (d, u), (u, d), (l, r).
_REVERSAL = frozenset({(R, L), (D, U), (U, D), (L, R)})


def build_coin(kind: CoinKind) -> NDArray[np.complex128]:
    """Return a fresh copy of the coin matrix for ``kind``."""
    scale, pattern = _MATRICES[CoinKind(kind)]
    return scale * np.array(pattern, dtype=np.complex128)


def is_unitary(coin: NDArray[np.complex128], tol: float = 1e-12) -> bool:
    """True iff ``max |C^dagger C - I| <= tol`` entrywise."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    c = np.asarray(coin, dtype=np.complex128)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        return False
    dev = c.conj().T @ c - np.eye(c.shape[0])
    return bool(np.max(np.abs(dev)) <= tol)


def zero_pattern(kind: CoinKind) -> frozenset[tuple[CoinIndex, CoinIndex]]:
    """Entries ``(row, col)`` that self-avoidance forces to vanish."""
    kind = CoinKind(kind)
    if kind is CoinKind.GROVER:
        return frozenset()
    if kind is CoinKind.SELF_AVOID_COIN:
        return _DIAGONAL
    if kind is CoinKind.SELF_AVOID_POSITION:
        return _REVERSAL
    return _DIAGONAL | _REVERSAL


def resolve_coin(coin: "CoinKind | str | NDArray[np.complex128]") -> NDArray[np.complex128]:
    """Accept a kind, its short name, or an explicit 4x4 matrix."""
    if isinstance(coin, np.ndarray):
        if coin.shape != (4, 4):
            raise ValueError(f"coin matrix must be 4x4, got {coin.shape}")
        return coin.astype(np.complex128, copy=False)
    return build_coin(CoinKind(coin))
