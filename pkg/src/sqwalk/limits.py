"""
Closed-form long-time limit densities of the rescaled position ``(X_t/t, Y_t/t)``.

Three laws are available:

* Grover walk: an atom of weight ``Delta`` at the origin plus an absolutely
  continuous part ``f * eta`` on the disk ``x^2 + y^2 < 1/2``.
* coin-space self-avoiding walk: ``f_sc (g1 + g2) eta_sc`` on the star-shaped
  region ``D_sc(|x|, |y|) > 0, |x|, |y| <= 1/3``.
* coin-and-position self-avoiding walk: ``f_scp eta_scp`` on the disk
  ``x^2 + y^2 < 1/4``.

Every density has integrable singularities on the boundary of its support,
which defeats equal-weight rules. Integrals are therefore computed with a
nested tanh-sinh rule over the exact support intervals: the outer variable
``x`` is split at the singular lines, and for each outer node the inner
variable runs over ``(-w(x), w(x))``, so every singularity sits on a panel
endpoint where tanh-sinh nodes cluster doubly exponentially.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import QuadratureError
from .state import InitialCoinState
from .statistics import RescaledHistogram, bin_index

__all__ = [
    "LimitModel",
    "GroverLimitParams",
    "LimitDensityModel",
    "grover_params",
    "grover_delta",
    "grover_density",
    "sc_discriminant",
    "sc_drift_coefficients",
    "sc_density",
    "scp_drift_coefficients",
    "scp_density",
    "quadrature_mass",
    "quadrature_moment",
    "limit_histogram",
    "density_grid",
]

_PI2 = math.pi**2


class LimitModel(enum.Enum):
    GROVER = "grover"
    SELF_AVOID_COIN = "sc"
    SELF_AVOID_COIN_POSITION = "scp"


def _amps(state: InitialCoinState) -> tuple[complex, complex, complex, complex]:
    return complex(state.alpha), complex(state.beta), complex(state.gamma), complex(state.delta)


def _re(z: complex) -> float:
    return z.real


@dataclass(frozen=True)
class GroverLimitParams:
    """Coefficients of ``eta = M1 - M2 x - M3 y + M4 x^2 + M5 y^2 + M6 x y`` and the atom weight."""

    M1: float
    M2: float
    M3: float
    M4: float
    M5: float
    M6: float
    delta: float


def grover_params(state: InitialCoinState) -> GroverLimitParams:
    a, b, g, d = _amps(state)
    bc, gc, dc = b.conjugate(), g.conjugate(), d.conjugate()
    pa, pb, pg, pd = abs(a) ** 2, abs(b) ** 2, abs(g) ** 2, abs(d) ** 2
    m1 = 0.5 + _re(a * dc + b * gc)
    m2 = pa - pd + _re(-a * bc - a * gc + b * dc + g * dc)
    m3 = -pb + pg + _re(a * bc - a * gc + b * dc - g * dc)
    m4 = 0.5 * (pa - pb - pg + pd) - _re(a * bc + a * gc + 3 * a * dc + b * gc + b * dc + g * dc)
    m5 = -0.5 * (pa - pb - pg + pd) - _re(a * bc + a * gc + a * dc + 3 * b * gc + b * dc + g * dc)
    m6 = -2.0 * _re(-a * bc + a * gc + b * dc - g * dc)
    return GroverLimitParams(m1, m2, m3, m4, m5, m6, grover_delta(state))


def grover_delta(state: InitialCoinState) -> float:
    """Weight of the origin atom in the Grover limit law."""
    a, b, g, d = _amps(state)
    bracket = (math.pi - 2) * (a + d) * (b.conjugate() + g.conjugate()) + (math.pi - 4) * (
        a * d.conjugate() + b * g.conjugate()
    )
    return bracket.real / math.pi + 0.5


def _as_float_arrays(x: ArrayLike, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    return np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))


def _out(v: NDArray[np.float64]) -> NDArray[np.float64] | float:
    return float(v) if v.ndim == 0 else v


def _grover_eval(x: NDArray, y: NDArray, p: GroverLimitParams) -> NDArray[np.float64]:
    inside = x * x + y * y < 0.5
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        f = 2.0 / (_PI2 * (x + y + 1.0) * (x - y + 1.0) * (x + y - 1.0) * (x - y - 1.0))
        eta = p.M1 - p.M2 * x - p.M3 * y + p.M4 * x * x + p.M5 * y * y + p.M6 * x * y
        v = f * eta
    return np.where(inside & np.isfinite(v), v, 0.0)


def grover_density(x: ArrayLike, y: ArrayLike, state: InitialCoinState) -> NDArray[np.float64] | float:
    """Absolutely continuous part of the Grover limit law; the atom is :func:`grover_delta`."""
    x, y = _as_float_arrays(x, y)
    return _out(_grover_eval(x, y, grover_params(state)))


def sc_discriminant(x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """``D_sc = 81(x^4 + y^4) - 18 x^2 y^2 - 18(x^2 + y^2) + 1``."""
    x, y = _as_float_arrays(x, y)
    x2, y2 = x * x, y * y
    return 81.0 * (x2 * x2 + y2 * y2) - 18.0 * x2 * y2 - 18.0 * (x2 + y2) + 1.0


def sc_drift_coefficients(state: InitialCoinState) -> tuple[float, float]:
    """``(cx, cy)`` with ``eta_sc = 1 + cx x + cy y``.

    The sign of both drift terms is opposite to the frequently quoted form
    ``1 + 2x[...] - 2y[...]``; the sign used here is the one reproduced by the
    lattice simulation and by the momentum-space eigen-decomposition of the
    same coin and shift (see tests/test_limits.py).
    """
    a, b, g, d = _amps(state)
    ax = abs(a) ** 2 - abs(d) ** 2 + _re((-a + g - d) * b.conjugate() + (a + b - d) * g.conjugate())
    ay = abs(b) ** 2 - abs(g) ** 2 + _re((b + g + d) * a.conjugate() + (a - b + g) * d.conjugate())
    return -2.0 * ax, 2.0 * ay


def _sc_eval(x: NDArray, y: NDArray, cx: float, cy: float) -> NDArray[np.float64]:
    ds = sc_discriminant(x, y)
    inside = (ds > 0.0) & (np.abs(x) <= 1.0 / 3.0) & (np.abs(y) <= 1.0 / 3.0)
    x2, y2 = x * x, y * y
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        root = np.sqrt(np.where(inside, ds, 1.0))
        base = 648.0 * (x2 * x2 + y2 * y2) + 576.0 * x2 * y2 - 324.0 * (x2 + y2) + 53.0
        tilt = 4.0 * (7.0 - 18.0 * (x2 + y2)) * root
        g1 = np.sqrt(np.maximum(base + tilt, 0.0))
        g2 = np.sqrt(np.maximum(base - tilt, 0.0))
        f = 1.0 / (_PI2 * (1.0 - 4.0 * x2) * (1.0 - 4.0 * y2) * root)
        v = f * (g1 + g2) * (1.0 + cx * x + cy * y)
    return np.where(inside & np.isfinite(v), v, 0.0)


def sc_density(x: ArrayLike, y: ArrayLike, state: InitialCoinState) -> NDArray[np.float64] | float:
    """Limit density of the coin-space self-avoiding walk."""
    x, y = _as_float_arrays(x, y)
    return _out(_sc_eval(x, y, *sc_drift_coefficients(state)))


def scp_drift_coefficients(state: InitialCoinState) -> tuple[float, float]:
    """``(cx, cy)`` with ``eta_scp = 1 + cx x + cy y``."""
    a, b, g, d = _amps(state)
    cx = -2.0 * (abs(a) ** 2 - abs(d) ** 2 - 2.0 * _re(b * g.conjugate()))
    cy = 2.0 * (abs(b) ** 2 - abs(g) ** 2 - 2.0 * _re(a * d.conjugate()))
    return cx, cy


def _scp_eval(x: NDArray, y: NDArray, cx: float, cy: float) -> NDArray[np.float64]:
    inside = x * x + y * y < 0.25
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        f = 4.0 / (_PI2 * (1.0 - 4.0 * x * x) * (1.0 - 4.0 * y * y))
        v = f * (1.0 + cx * x + cy * y)
    return np.where(inside & np.isfinite(v), v, 0.0)


def scp_density(x: ArrayLike, y: ArrayLike, state: InitialCoinState) -> NDArray[np.float64] | float:
    """Limit density of the coin-and-position self-avoiding walk."""
    x, y = _as_float_arrays(x, y)
    return _out(_scp_eval(x, y, *scp_drift_coefficients(state)))


@dataclass(frozen=True)
class LimitDensityModel:
    """A limit law bound to one initial coin state; coefficients are computed once."""

    kind: LimitModel
    state: InitialCoinState
    _coef: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = LimitModel(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is LimitModel.GROVER:
            coef = (grover_params(self.state),)
        elif kind is LimitModel.SELF_AVOID_COIN:
            coef = sc_drift_coefficients(self.state)
        else:
            coef = scp_drift_coefficients(self.state)
        object.__setattr__(self, "_coef", coef)

    @property
    def point_mass(self) -> float:
        """Weight of the atom at the origin (zero except for the Grover law)."""
        return self._coef[0].delta if self.kind is LimitModel.GROVER else 0.0

    @property
    def x_extent(self) -> float:
        return {
            LimitModel.GROVER: math.sqrt(0.5),
            LimitModel.SELF_AVOID_COIN: 1.0 / 3.0,
            LimitModel.SELF_AVOID_COIN_POSITION: 0.5,
        }[self.kind]

    @property
    def x_breaks(self) -> tuple[float, ...]:
        """Outer panel boundaries: support ends plus lines where the inner integral is singular."""
        e = self.x_extent
        if self.kind is LimitModel.GROVER:
            # the disk touches the poles x +- y = +-1 at (+-1/2, +-1/2)
            return (-e, -0.5, 0.0, 0.5, e)
        return (-e, 0.0, e)

    def density(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64] | float:
        x, y = _as_float_arrays(x, y)
        if self.kind is LimitModel.GROVER:
            v = _grover_eval(x, y, self._coef[0])
        elif self.kind is LimitModel.SELF_AVOID_COIN:
            v = _sc_eval(x, y, *self._coef)
        else:
            v = _scp_eval(x, y, *self._coef)
        return _out(v)

    def support(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.bool_]:
        """Indicator of the open support (strict inequalities)."""
        x, y = _as_float_arrays(x, y)
        if self.kind is LimitModel.GROVER:
            return x * x + y * y < 0.5
        if self.kind is LimitModel.SELF_AVOID_COIN_POSITION:
            return x * x + y * y < 0.25
        ax, ay = np.abs(x), np.abs(y)
        return (sc_discriminant(ax, ay) > 0.0) & (ax <= 1.0 / 3.0) & (ay <= 1.0 / 3.0)

    def half_width(self, x: ArrayLike) -> NDArray[np.float64]:
        """``w(x)`` such that the support's section at ``x`` is ``|y| < w(x)``."""
        x = np.asarray(x, dtype=np.float64)
        x2 = x * x
        if self.kind is LimitModel.GROVER:
            return np.sqrt(np.maximum(0.5 - x2, 0.0))
        if self.kind is LimitModel.SELF_AVOID_COIN_POSITION:
            return np.sqrt(np.maximum(0.25 - x2, 0.0))
        # D_sc is quadratic in y^2 with roots ((1 + x^2) -+ sqrt(20 x^2 (1 - 4x^2))) / 9;
        # for |x| <= 1/3 only the region below the smaller root meets |y| <= 1/3.
        lower = ((1.0 + x2) - np.sqrt(np.maximum(20.0 * x2 * (1.0 - 4.0 * x2), 0.0))) / 9.0
        return np.minimum(np.sqrt(np.maximum(lower, 0.0)), 1.0 / 3.0)


# Nodes of the tanh-sinh rule cover t in [-_TS_SPAN, _TS_SPAN]; the closest node
# then sits ~1e-20 (relative) from an endpoint. Wider spans only add nodes that
# round onto the endpoint.
_TS_SPAN = 3.5


@lru_cache(maxsize=32)
def _tanh_sinh(n: int) -> tuple[NDArray, NDArray, NDArray]:
    """Fractions from the left/right endpoint and weights of an n-point rule on [0, 1]."""
    t = np.linspace(-_TS_SPAN, _TS_SPAN, n)
    h = t[1] - t[0]
    z = 0.5 * math.pi * np.sinh(t)
    from_left = 1.0 / (1.0 + np.exp(-2.0 * z))
    from_right = 1.0 / (1.0 + np.exp(2.0 * z))
    w = 0.25 * math.pi * h * np.cosh(t) / np.cosh(z) ** 2
    for arr in (from_left, from_right, w):
        arr.flags.writeable = False
    return from_left, from_right, w


def _place(lo: NDArray, hi: NDArray, n: int) -> tuple[NDArray, NDArray]:
    """Nodes and weights of the rule mapped onto ``[lo, hi]`` (broadcast over leading axes)."""
    fl, fr, w = _tanh_sinh(n)
    lo = lo[..., None]
    hi = hi[..., None]
    span = hi - lo
    nodes = np.where(fl <= 0.5, lo + span * fl, hi - span * fr)
    return nodes, span * w


def _panel_integrals(
    model: LimitDensityModel,
    x_edges: NDArray,
    y_edges: NDArray,
    n: int,
    r1: int = 0,
    r2: int = 0,
) -> tuple[NDArray, NDArray]:
    """Integrals of ``x^r1 y^r2 density`` over each outer panel times each inner segment.

    Returns ``(panels, values)`` where ``panels`` holds the outer breakpoints
    actually used and ``values[i, j]`` is the integral over
    ``[panels[i], panels[i+1]] x [y_edges[j], y_edges[j+1]]``.
    """
    e = model.x_extent
    breaks = np.concatenate([np.asarray(model.x_breaks), np.asarray(x_edges, dtype=np.float64)])
    breaks = np.unique(np.clip(breaks, -e, e))
    y_edges = np.asarray(y_edges, dtype=np.float64)
    out = np.zeros((len(breaks) - 1, len(y_edges) - 1))
    for i, (a, b) in enumerate(zip(breaks[:-1], breaks[1:])):
        if b <= a:
            continue
        xs, wx = _place(np.asarray(a), np.asarray(b), n)
        w = model.half_width(xs)[:, None]
        lo = np.clip(y_edges[None, :-1], -w, w)
        hi = np.clip(y_edges[None, 1:], -w, w)
        ys, wy = _place(lo, hi, n)
        X = np.broadcast_to(xs[:, None, None], ys.shape)
        v = np.asarray(model.density(X, ys))
        if r1 or r2:
            v = v * X**r1 * ys**r2
        inner = np.sum(v * wy, axis=-1)
        out[i] = np.sum(inner * wx[:, None], axis=0)
    return breaks, out


def _continuous_integral(model: LimitDensityModel, r1: int, r2: int, resolution: int) -> float:
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    _, vals = _panel_integrals(model, np.array([]), np.array([-1.0, 0.0, 1.0]), resolution, r1, r2)
    return math.fsum(vals.ravel().tolist())


def _with_doubling(fn, resolution: int, tol: float | None) -> float:
    value = fn(resolution)
    if tol is None:
        return value
    finer = fn(2 * resolution)
    if abs(finer - value) > tol:
        raise QuadratureError(
            f"doubling resolution {resolution} -> {2 * resolution} changed the result by "
            f"{abs(finer - value):.3e} > {tol:.1e}"
        )
    return finer


def quadrature_mass(model: LimitDensityModel, resolution: int = 128, tol: float | None = None) -> float:
    """Integral of the absolutely continuous density over its support.

    Tends to 1 for the self-avoiding laws and to ``1 - Delta`` for the Grover
    law. With ``tol`` set the integral is repeated at twice the resolution and
    :class:`~sqwalk.errors.QuadratureError` is raised if the two differ by
    more than ``tol``; the finer value is returned.
    """
    return _with_doubling(lambda n: _continuous_integral(model, 0, 0, n), resolution, tol)


def quadrature_moment(
    model: LimitDensityModel, r1: int, r2: int, resolution: int = 128, tol: float | None = None
) -> float:
    """``E[x^r1 y^r2]`` under the full limit law (atom included)."""
    if r1 < 0 or r2 < 0:
        raise ValueError("moment orders must be non-negative")
    atom = model.point_mass if r1 == 0 and r2 == 0 else 0.0
    return atom + _with_doubling(lambda n: _continuous_integral(model, r1, r2, n), resolution, tol)


def limit_histogram(model: LimitDensityModel, bins: int, resolution: int = 64) -> RescaledHistogram:
    """Exact bin masses of the limit law on the ``bins x bins`` grid over ``[-1, 1]^2``.

    Bin edges become panel and segment boundaries, so each bin is integrated
    with its own tanh-sinh rule. The Grover atom goes to the bin that contains
    the origin under the half-open rule.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    edges = np.linspace(-1.0, 1.0, bins + 1)
    y_edges = np.unique(np.concatenate([edges, [0.0]]))
    panels, vals = _panel_integrals(model, edges, y_edges, max(resolution, 8))
    ix = bin_index(0.5 * (panels[:-1] + panels[1:]), bins)
    iy = bin_index(0.5 * (y_edges[:-1] + y_edges[1:]), bins)
    flat = (ix[:, None] * bins + iy[None, :]).ravel()
    values = np.bincount(flat, weights=vals.ravel(), minlength=bins * bins).reshape(bins, bins)
    atom = model.point_mass
    if atom:
        o = bin_index(np.array(0.0), bins)
        values[o, o] += atom
    return RescaledHistogram(values, point_mass=atom)


def density_grid(model: LimitDensityModel, bins: int) -> tuple[NDArray, NDArray]:
    """Bin centers and the continuous density evaluated on them (``values[ix, iy]``)."""
    edges = np.linspace(-1.0, 1.0, bins + 1)
    c = 0.5 * (edges[:-1] + edges[1:])
    X, Y = np.meshgrid(c, c, indexing="ij")
    return c, np.asarray(model.density(X, Y))
