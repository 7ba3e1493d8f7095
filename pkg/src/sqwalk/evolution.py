"""
Coin-then-shift evolution of the walker.

One step applies the coin at every site and then moves each coin component
one lattice unit: ``l -> (-1, 0)``, ``u -> (0, +1)``, ``d -> (0, -1)``,
``r -> (+1, 0)``. The kernel is written in gather form: every output site
reads the coined spinors of its four neighbours, so output rows can be
computed by independent workers without changing a single bit of the result.
"""

from __future__ import annotations

import warnings
from typing import Iterable, Iterator

import numba
import numpy as np
from numpy.typing import NDArray

from .coins import CoinKind, is_unitary, resolve_coin
from .errors import LatticeBoundError
from .state import CoinIndex, InitialCoinState, WaveFunction, make_initial

__all__ = ["SHIFTS", "DEFAULT_T_MAX", "step", "evolve", "evolve_checkpoints", "propagate"]

DEFAULT_T_MAX = 1024

# numba probes TBB first and warns when the system copy is too old; it then
# falls back to another threading layer, which is all we need.
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)

SHIFTS: dict[CoinIndex, tuple[int, int]] = {
    CoinIndex.L: (-1, 0),
    CoinIndex.U: (0, 1),
    CoinIndex.D: (0, -1),
    CoinIndex.R: (1, 0),
}


@numba.njit(cache=True, inline="always")
def _coin_row(coin, row, src, ix, iy):
    acc = 0j
    for j in range(4):
        acc += coin[row, j] * src[ix, iy, j]
    return acc


@numba.njit(parallel=True, cache=True)
def _step_kernel(src, dst, coin, t, cap):  # pragma: no cover - compiled
    # src holds step t; dst receives step t + 1. Only sites with |x|+|y| <= t+1
    # and x+y+t+1 even are written. Any stale content of dst (step t - 1 when
    # double-buffering, or zeros) lives on that same site set, so it is fully
    # overwritten and every other site stays exactly zero.
    r = t + 1
    lo = cap - t
    hi = cap + t
    for ix in numba.prange(cap - r, cap + r + 1):
        x = ix - cap
        rem = r - (x if x >= 0 else -x)
        for iy in range(cap - rem, cap + rem + 1, 2):
            # l arrives from (x+1, y), u from (x, y-1), d from (x, y+1), r from (x-1, y)
            dst[ix, iy, 0] = _coin_row(coin, 0, src, ix + 1, iy) if ix + 1 <= hi else 0j
            dst[ix, iy, 1] = _coin_row(coin, 1, src, ix, iy - 1) if iy - 1 >= lo else 0j
            dst[ix, iy, 2] = _coin_row(coin, 2, src, ix, iy + 1) if iy + 1 <= hi else 0j
            dst[ix, iy, 3] = _coin_row(coin, 3, src, ix - 1, iy) if ix - 1 >= lo else 0j


def _checked_coin(coin) -> NDArray[np.complex128]:
    c = np.ascontiguousarray(resolve_coin(coin))
    if not is_unitary(c, 1e-10):
        raise ValueError("coin is not unitary within 1e-10")
    return c


def step(psi: WaveFunction, coin: CoinKind | str | NDArray[np.complex128]) -> WaveFunction:
    """Advance ``psi`` by one step, returning a new wave function."""
    c = _checked_coin(coin)
    if psi.t + 1 > psi.capacity:
        raise LatticeBoundError(
            f"step {psi.t + 1} exceeds lattice capacity {psi.capacity}"
        )
    dst = np.zeros_like(psi.amplitudes)
    _step_kernel(psi.amplitudes, dst, c, psi.t, psi.capacity)
    return WaveFunction(psi.t + 1, dst)


def _run(psi: WaveFunction, coin: NDArray[np.complex128], stops: list[int]) -> Iterator[WaveFunction]:
    cap = psi.capacity
    if stops and stops[-1] > cap:
        raise LatticeBoundError(f"step {stops[-1]} exceeds lattice capacity {cap}")
    a = psi.amplitudes.copy()
    b = np.zeros_like(a)
    t = psi.t
    for stop in stops:
        while t < stop:
            _step_kernel(a, b, coin, t, cap)
            a, b = b, a
            t += 1
        yield WaveFunction(t, a.copy())


def propagate(
    psi: WaveFunction, coin: CoinKind | str | NDArray[np.complex128], steps: int
) -> WaveFunction:
    """Apply ``steps`` steps to an arbitrary (not necessarily normalized) state."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    c = _checked_coin(coin)
    return next(_run(psi, c, [psi.t + steps]))


def evolve(
    state: InitialCoinState,
    kind: CoinKind | str | NDArray[np.complex128],
    t: int,
    t_max: int = DEFAULT_T_MAX,
    capacity: int | None = None,
) -> WaveFunction:
    """Wave function after ``t`` steps from ``state`` localized at the origin.

    The lattice is allocated with ``capacity`` (default ``t``) so the result
    can absorb further steps only if a larger capacity is requested.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t > t_max:
        raise LatticeBoundError(f"t = {t} exceeds t_max = {t_max}")
    cap = t if capacity is None else capacity
    psi = make_initial(state, cap)
    return propagate(psi, kind, t)


def evolve_checkpoints(
    state: InitialCoinState,
    kind: CoinKind | str | NDArray[np.complex128],
    times: Iterable[int],
    t_max: int = DEFAULT_T_MAX,
) -> Iterator[WaveFunction]:
    """Yield the wave function at each of ``times`` (sorted, deduplicated) in one run."""
    stops = sorted(set(int(s) for s in times))
    if not stops:
        return
    if stops[0] < 0:
        raise ValueError("times must be non-negative")
    if stops[-1] > t_max:
        raise LatticeBoundError(f"t = {stops[-1]} exceeds t_max = {t_max}")
    c = _checked_coin(kind)
    yield from _run(make_initial(state, stops[-1]), c, stops)
