"""
Probability distributions, rescaled histograms and joint moments.

Sums over lattice sites use :func:`math.fsum`, which is exactly rounded and
therefore independent of summation order. Histograms bin the rescaled
position ``(x/t, y/t)`` into a ``B x B`` grid over ``[-1, 1]^2``; each bin is
half-open ``[a, b)`` except the last one along each axis, which also holds
its right edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .state import WaveFunction

__all__ = [
    "Distribution",
    "RescaledHistogram",
    "distribution",
    "region_mass",
    "origin_block_mass",
    "rescaled_histogram",
    "empirical_moment",
    "bin_index",
    "l1_distance",
]


@dataclass(frozen=True, eq=False)
class Distribution:
    """Site probabilities at step ``t``; ``mass[x + t, y + t]`` is P(X_t = x, Y_t = y)."""

    t: int
    mass: NDArray[np.float64]

    def coordinates(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        r = np.arange(-self.t, self.t + 1)
        return np.meshgrid(r, r, indexing="ij")

    def at(self, x: int, y: int) -> float:
        if abs(x) > self.t or abs(y) > self.t:
            return 0.0
        return float(self.mass[x + self.t, y + self.t])

    def total(self) -> float:
        return math.fsum(self.mass.ravel().tolist())

    def support(self) -> NDArray[np.bool_]:
        """Sites reachable at step ``t``: ``|x|+|y| <= t`` and ``x+y+t`` even."""
        X, Y = self.coordinates()
        return (np.abs(X) + np.abs(Y) <= self.t) & ((X + Y + self.t) % 2 == 0)


@dataclass(frozen=True, eq=False)
class RescaledHistogram:
    """Masses on a ``B x B`` grid over ``[-1, 1]^2``, indexed ``values[ix, iy]``.

    ``point_mass`` records mass known to sit exactly at the origin (an atom
    of a limit law); it is already included in ``values``.
    """

    values: NDArray[np.float64]
    point_mass: float = 0.0
    discarded_fraction: float = 0.0

    @property
    def bins(self) -> int:
        return self.values.shape[0]

    @property
    def edges(self) -> NDArray[np.float64]:
        return np.linspace(-1.0, 1.0, self.bins + 1)

    @property
    def centers(self) -> NDArray[np.float64]:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def total(self) -> float:
        return math.fsum(self.values.ravel().tolist())

    def moment(self, r1: int, r2: int) -> float:
        """Joint moment with every bin's mass placed at its center."""
        c = self.centers
        X, Y = np.meshgrid(c, c, indexing="ij")
        return math.fsum((X**r1 * Y**r2 * self.values).ravel().tolist())

    def origin_block(self) -> float:
        """Mass in the bins touching the origin: one bin for odd B, the 2x2 block for even B."""
        b = self.bins
        if b % 2:
            return float(self.values[b // 2, b // 2])
        h = b // 2
        return math.fsum(self.values[h - 1 : h + 1, h - 1 : h + 1].ravel().tolist())


def distribution(psi: WaveFunction) -> Distribution:
    """Site probabilities ``sum_j |psi_j(x, y)|^2`` on the window ``[-t, t]^2``."""
    w = psi.window()
    mass = (w.real**2 + w.imag**2).sum(axis=-1)
    mass.flags.writeable = False
    return Distribution(psi.t, mass)


def region_mass(d: Distribution, predicate: Callable[[NDArray, NDArray], NDArray]) -> float:
    """Total mass on sites where ``predicate(X, Y)`` holds.

    ``predicate`` receives the integer coordinate arrays and must return a
    boolean array (or scalar) broadcastable to them.
    """
    X, Y = d.coordinates()
    mask = np.broadcast_to(np.asarray(predicate(X, Y), dtype=bool), X.shape)
    return math.fsum(d.mass[mask].tolist())


def origin_block_mass(d: Distribution, radius: int = 2) -> float:
    """Mass in the square ``|x|, |y| <= radius``."""
    return region_mass(d, lambda X, Y: (np.abs(X) <= radius) & (np.abs(Y) <= radius))


def bin_index(u: NDArray[np.float64], bins: int) -> NDArray[np.int64]:
    """Bin of each coordinate in ``[-1, 1]`` under the half-open rule."""
    idx = np.floor((np.asarray(u, dtype=np.float64) + 1.0) * (bins / 2.0)).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def rescaled_histogram(d: Distribution, bins: int) -> RescaledHistogram:
    """Histogram of ``(x/t, y/t)``.

    Bin indices come from integer arithmetic ``floor((x + t) B / 2t)`` so a
    site on a bin edge is assigned exactly, with no rounding.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    if d.t < 1:
        raise ValueError("rescaled histogram needs t >= 1")
    t = d.t
    r = np.arange(-t, t + 1)
    idx = np.minimum(((r + t) * bins) // (2 * t), bins - 1)
    IX, IY = np.meshgrid(idx, idx, indexing="ij")
    flat = (IX * bins + IY).ravel()
    values = np.bincount(flat, weights=d.mass.ravel(), minlength=bins * bins)
    return RescaledHistogram(values.reshape(bins, bins))


def empirical_moment(d: Distribution, r1: int, r2: int) -> float:
    """``E[(X_t/t)^r1 (Y_t/t)^r2]``; at ``t = 0`` the walker sits at the origin."""
    if r1 < 0 or r2 < 0:
        raise ValueError("moment orders must be non-negative")
    if d.t == 0:
        return d.total() if r1 == 0 and r2 == 0 else 0.0
    X, Y = d.coordinates()
    u = X / d.t
    v = Y / d.t
    return math.fsum((u**r1 * v**r2 * d.mass).ravel().tolist())


def l1_distance(a: RescaledHistogram, b: RescaledHistogram, merge_origin: bool | None = None) -> float:
    """Sum of absolute bin differences.

    When either histogram carries an origin atom and ``B`` is even, the atom
    sits on the corner shared by four bins, where bin masses do not converge
    weakly; those four bins are then compared as one block. ``merge_origin``
    forces the behaviour either way.
    """
    if a.bins != b.bins:
        raise ValueError("histograms have different bin counts")
    diff = a.values - b.values
    if merge_origin is None:
        merge_origin = a.point_mass > 0.0 or b.point_mass > 0.0
    if merge_origin and a.bins % 2 == 0:
        h = a.bins // 2
        block = math.fsum(diff[h - 1 : h + 1, h - 1 : h + 1].ravel().tolist())
        diff = diff.copy()
        diff[h - 1 : h + 1, h - 1 : h + 1] = 0.0
        return math.fsum(np.abs(diff).ravel().tolist()) + abs(block)
    return math.fsum(np.abs(diff).ravel().tolist())
