"""
Momentum-space eigen-decomposition of the walk and the limit law it implies.

For a walker started at the origin the Fourier transform of the initial
state is the constant spinor ``(alpha, beta, gamma, delta)`` and one step acts
at momentum ``k`` as ``C(k) = R(k) C`` with
``R(k) = diag(e^{i kx}, e^{-i ky}, e^{i ky}, e^{-i kx})``. If ``C(k)`` has
eigenpairs ``(lambda_j, v_j)``, the rescaled position converges in law to the
distribution of the group velocity ``-grad_k arg lambda_j(k)`` with ``k``
uniform on the Brillouin zone and band ``j`` chosen with probability
``|<v_j | psi0>|^2``. Binning that distribution gives a limit density that is
independent of any closed form and works for every coin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coins import CoinKind, resolve_coin
from .errors import BandMatchingError, OracleError, SpectralError
from .state import InitialCoinState
from .statistics import RescaledHistogram, bin_index

__all__ = [
    "SpectralSample",
    "momentum_grid",
    "momentum_coin",
    "eigensystem",
    "group_velocity",
    "spectral_sample",
    "band_velocities",
    "oracle_histogram",
    "oracle_moments",
    "MATCH_THRESHOLD",
    "MAX_DISCARD_FRACTION",
]

MATCH_THRESHOLD = 0.5
MAX_DISCARD_FRACTION = 0.01
RESIDUAL_TOL = 1e-9
DEFAULT_H = 1e-5
# Velocities below this magnitude are counted as flat-band (origin atom) weight.
FLAT_BAND_SPEED = 1e-7
# eigenvalues closer than this are treated as one degenerate eigenspace
DEGENERACY_GAP = 1e-6

# Mixing weight for the Hermitian surrogate (U + U^H)/2 + c (U - U^H)/(2i). Its
# eigenvalues are sqrt(1 + c^2) cos(theta - atan c), which merge only when two
# phases sum to 2 atan c; the residual check catches those points.
_SURROGATE_MIX = 0.6180339887498949

CoinLike = CoinKind | str | NDArray[np.complex128]


def momentum_grid(n: int) -> NDArray[np.float64]:
    """Midpoints of ``n`` equal cells on ``[-pi, pi)``."""
    return -math.pi + 2.0 * math.pi * (np.arange(n) + 0.5) / n


def momentum_coin(coin: CoinLike, kx: ArrayLike, ky: ArrayLike) -> NDArray[np.complex128]:
    """``R(kx, ky) @ C``; broadcasts over ``kx``, ``ky`` and returns shape ``(..., 4, 4)``."""
    c = resolve_coin(coin)
    kx, ky = np.broadcast_arrays(np.asarray(kx, dtype=np.float64), np.asarray(ky, dtype=np.float64))
    ex, ey = np.exp(1j * kx), np.exp(1j * ky)
    phase = np.stack([ex, ey.conj(), ey, ex.conj()], axis=-1)
    return phase[..., :, None] * c


def _sorted_by_phase(lam: NDArray, vecs: NDArray) -> tuple[NDArray, NDArray]:
    ph = np.angle(lam)
    ph = np.where(ph >= math.pi, ph - 2.0 * math.pi, ph)
    order = np.argsort(ph, axis=-1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    return lam, vecs


def _residuals(m: NDArray, lam: NDArray, vecs: NDArray) -> NDArray[np.float64]:
    r = m @ vecs - vecs * lam[..., None, :]
    return np.linalg.norm(r, axis=-2)


def eigensystem(m: ArrayLike, check_unitary: bool = True) -> tuple[NDArray, NDArray]:
    """Eigenvalues and orthonormal eigenvectors (columns) of unitary matrices.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Unitary matrices, batched over leading axes.

    Returns
    -------
    eigenvalues : ndarray, shape (..., n)
        Sorted by phase in ``[-pi, pi)``.
    eigenvectors : ndarray, shape (..., n, n)
        ``eigenvectors[..., :, j]`` belongs to ``eigenvalues[..., j]``.

    Raises
    ------
    ValueError
        If an input deviates from unitarity by more than 1e-10.
    SpectralError
        If any residual ``|M v - lambda v|`` exceeds 1e-9.

    Notes
    -----
    A unitary matrix is normal, so it shares its eigenvectors with the
    Hermitian surrogate ``(U + U^H)/2 + c (U - U^H)/(2i)``; those come from the
    fast Hermitian solver and the eigenvalues are Rayleigh quotients. Where
    the surrogate is nearly degenerate the residual check fails and that
    matrix is re-solved with the general solver, followed by QR to
    orthonormalize any degenerate eigenspace.
    """
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[-1]
    if check_unitary:
        dev = np.abs(np.conj(np.swapaxes(m, -1, -2)) @ m - np.eye(n))
        if dev.size and dev.max() > 1e-10:
            raise ValueError(f"matrix is not unitary (deviation {dev.max():.2e})")
    mh = np.conj(np.swapaxes(m, -1, -2))
    surrogate = 0.5 * (m + mh) - 0.5j * _SURROGATE_MIX * (m - mh)
    _, vecs = np.linalg.eigh(surrogate)
    lam = np.einsum("...ij,...ik,...kj->...j", vecs.conj(), m, vecs)
    res = _residuals(m, lam, vecs)
    bad = res.max(axis=-1) > 0.1 * RESIDUAL_TOL
    if np.any(bad):
        w, v = np.linalg.eig(m[bad])
        q, _ = np.linalg.qr(v)
        lam_b = np.einsum("...ij,...ik,...kj->...j", q.conj(), m[bad], q)
        vecs[bad] = q
        lam[bad] = lam_b
        res[bad] = _residuals(m[bad], lam_b, q)
    if res.size and res.max() > RESIDUAL_TOL:
        raise SpectralError(f"eigen residual {res.max():.2e} exceeds {RESIDUAL_TOL:.0e}")
    return _sorted_by_phase(lam, vecs)


def _match(v0: NDArray, v1: NDArray) -> tuple[NDArray, NDArray]:
    """Best partner in ``v1`` for each band of ``v0`` and whether the match is trustworthy."""
    overlap = np.abs(np.einsum("...ij,...ik->...jk", v0.conj(), v1))
    partner = np.argmax(overlap, axis=-1)
    best = np.take_along_axis(overlap, partner[..., None], axis=-1)[..., 0]
    ok = best >= MATCH_THRESHOLD
    # two bands claiming the same partner cannot both be followed
    n = partner.shape[-1]
    claims = (partner[..., :, None] == np.arange(n)).sum(axis=-2)
    ok &= np.take_along_axis(claims, partner, axis=-1) == 1
    return partner, ok


def band_velocities(
    coin: CoinLike, kx: ArrayLike, ky: ArrayLike, h: float = DEFAULT_H
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    """Eigenpairs at ``k`` and group velocities of every band by central differences.

    Returns ``(eigenvalues, eigenvectors, velocities, ok)`` with velocities of
    shape ``(..., 4, 2)`` and ``ok`` flagging bands that were followed to all
    four neighbours ``k +- h e_x``, ``k +- h e_y`` and that are not degenerate
    with another band at ``k`` itself.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    c = resolve_coin(coin)
    kx, ky = np.broadcast_arrays(np.asarray(kx, dtype=np.float64), np.asarray(ky, dtype=np.float64))
    lam, vec = eigensystem(momentum_coin(c, kx, ky), check_unitary=False)
    vel = np.empty(lam.shape + (2,))
    gap = np.abs(lam[..., :, None] - lam[..., None, :]) + np.eye(lam.shape[-1]) * 4.0
    ok = gap.min(axis=-1) > DEGENERACY_GAP
    for axis, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
        lp, vp = eigensystem(momentum_coin(c, kx + dx, ky + dy), check_unitary=False)
        lm, vm = eigensystem(momentum_coin(c, kx - dx, ky - dy), check_unitary=False)
        pp, okp = _match(vec, vp)
        pm, okm = _match(vec, vm)
        ratio = np.take_along_axis(lp, pp, axis=-1) * np.conj(np.take_along_axis(lm, pm, axis=-1))
        # velocity = -d arg(lambda)/dk
        vel[..., axis] = -np.angle(ratio) / (2.0 * h)
        ok &= okp & okm
    return lam, vec, vel, ok


def group_velocity(coin: CoinLike, kx: float, ky: float, band: int, h: float = DEFAULT_H) -> tuple[float, float]:
    """Group velocity ``(vx, vy)`` of one band at one momentum.

    Bands are indexed in the phase order of :func:`eigensystem`.

    Raises
    ------
    BandMatchingError
        If the band cannot be followed to a neighbouring momentum (eigenvector
        overlap below 0.5, typically near a degeneracy).
    """
    _, _, vel, ok = band_velocities(coin, kx, ky, h)
    if not ok[band]:
        raise BandMatchingError(f"band {band} is not separable at k = ({kx}, {ky})")
    return float(vel[band, 0]), float(vel[band, 1])


@dataclass(frozen=True, eq=False)
class SpectralSample:
    kx: float
    ky: float
    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]
    overlaps: NDArray[np.float64]
    velocities: NDArray[np.float64]
    valid: NDArray[np.bool_]


def spectral_sample(
    coin: CoinLike, state: InitialCoinState, kx: float, ky: float, h: float = DEFAULT_H
) -> SpectralSample:
    lam, vec, vel, ok = band_velocities(coin, kx, ky, h)
    overlaps = np.abs(vec.conj().T @ state.as_array()) ** 2
    return SpectralSample(float(kx), float(ky), lam, vec, overlaps, vel, ok)


def _sweep(coin: CoinLike, state: InitialCoinState, n: int, h: float, rows_per_chunk: int):
    """Yield ``(weights, velocities, ok)`` for row blocks of the ``n x n`` momentum grid."""
    k = momentum_grid(n)
    psi0 = state.as_array()
    c = resolve_coin(coin)
    for start in range(0, n, rows_per_chunk):
        KX, KY = np.meshgrid(k[start : start + rows_per_chunk], k, indexing="ij")
        _, vec, vel, ok = band_velocities(c, KX, KY, h)
        w = np.abs(np.einsum("...ij,i->...j", vec.conj(), psi0)) ** 2 / (n * n)
        yield w, vel, ok


def _rows_per_chunk(n: int) -> int:
    return max(1, 40000 // n)


def oracle_histogram(
    coin: CoinLike,
    state: InitialCoinState,
    n: int = 400,
    bins: int = 50,
    h: float = DEFAULT_H,
) -> RescaledHistogram:
    """Binned limit law from band velocities on an ``n x n`` momentum grid.

    Samples whose band cannot be followed across ``k +- h`` are dropped; the
    dropped fraction (by count) is reported on the result.

    Raises
    ------
    OracleError
        If more than 1% of the ``4 n^2`` band samples are dropped.
    """
    if n < 1 or bins < 2:
        raise ValueError("need n >= 1 and bins >= 2")
    values = np.zeros(bins * bins)
    dropped = 0
    flat_mass: list[float] = []
    for w, vel, ok in _sweep(coin, state, n, h, _rows_per_chunk(n)):
        dropped += int(np.count_nonzero(~ok))
        ix = bin_index(vel[..., 0], bins)
        iy = bin_index(vel[..., 1], bins)
        flat = (ix * bins + iy)[ok]
        values += np.bincount(flat, weights=w[ok], minlength=bins * bins)
        speed = np.hypot(vel[..., 0], vel[..., 1])
        flat_mass.extend(w[ok & (speed <= FLAT_BAND_SPEED)].tolist())
    frac = dropped / (4.0 * n * n)
    if frac > MAX_DISCARD_FRACTION:
        raise OracleError(f"{100 * frac:.2f}% of band samples could not be followed (limit 1%)")
    return RescaledHistogram(
        values.reshape(bins, bins), point_mass=math.fsum(flat_mass), discarded_fraction=frac
    )


def oracle_moments(
    coin: CoinLike,
    state: InitialCoinState,
    orders: Iterable[tuple[int, int]],
    n: int = 400,
    h: float = DEFAULT_H,
) -> dict[tuple[int, int], float]:
    """Limit joint moments ``E[vx^r1 vy^r2]`` straight from the velocity samples."""
    orders = [tuple(o) for o in orders]
    parts: dict[tuple[int, int], list[float]] = {o: [] for o in orders}
    dropped = 0
    for w, vel, ok in _sweep(coin, state, n, h, _rows_per_chunk(n)):
        dropped += int(np.count_nonzero(~ok))
        vx, vy, wk = vel[..., 0][ok], vel[..., 1][ok], w[ok]
        for r1, r2 in orders:
            parts[(r1, r2)].append(math.fsum((wk * vx**r1 * vy**r2).tolist()))
    if dropped / (4.0 * n * n) > MAX_DISCARD_FRACTION:
        raise OracleError(f"{dropped} band samples could not be followed")
    return {o: math.fsum(v) for o, v in parts.items()}
