"""
Command-line interface.

    sqwalk walk    --coin grover --steps 100 --init 0.5,0,0,0.5,0,0.5,-0.5,0 --out walk.csv
    sqwalk limit   --coin scp --bins 50 --out density.csv
    sqwalk oracle  --coin sp --grid 400 --bins 50 --out oracle.csv
    sqwalk compare --coin sc --steps 200 --bins 20
    sqwalk moments --coin scp --steps 400 --out moments.csv

Each run prints a JSON summary on stdout; with ``--out PATH`` the data goes to
``PATH`` and the summary to ``PATH`` with a ``.json`` suffix.

Exit codes: 0 success, 2 configuration error, 3 numerical invariant
violation, 4 comparison above threshold.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .coins import CoinKind, build_coin, is_unitary
from .errors import NormalizationError, SqwalkError
from .evolution import DEFAULT_T_MAX, evolve, evolve_checkpoints
from .limits import LimitDensityModel, LimitModel, density_grid, limit_histogram, quadrature_moment
from .spectral import oracle_histogram, oracle_moments
from .state import EVOLVED_NORM_TOL, InitialCoinState, WaveFunction, norm
from .statistics import (
    Distribution,
    RescaledHistogram,
    distribution,
    empirical_moment,
    l1_distance,
    origin_block_mass,
    rescaled_histogram,
)

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_COMPARE = 0, 2, 3, 4

COMMANDS = ("walk", "limit", "oracle", "compare", "moments")
SUMMARY_MOMENTS = ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1))
TABLE_MOMENTS = tuple((r1, r2) for r1 in range(3) for r2 in range(3))
DEFAULT_INIT = "0.5,0,0,0.5,0,0.5,-0.5,0"
DEFAULT_QUAD_RESOLUTION = 128
DEFAULT_K_GRID = 200
DEFAULT_COMPARE_TOL = 0.15
CSV_SUM_TOL = 1e-9


class ConfigError(SqwalkError):
    pass


class InvariantViolation(SqwalkError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    coin: str
    steps: int
    init: InitialCoinState
    bins: int
    grid: int | None
    out: Path | None
    tolerance: float | None
    reference: str = "auto"
    seed: int | None = None

    def coin_matrix(self) -> np.ndarray:
        return load_coin(self.coin)

    def limit_model(self) -> LimitModel | None:
        try:
            return LimitModel(self.coin)
        except ValueError:
            return None


def _fmt(v: float) -> str:
    return repr(float(v))


def load_coin(spec: str) -> np.ndarray:
    """Coin by short name, or ``file:PATH`` with 4 lines of 4 complex entries."""
    if spec.startswith("file:"):
        path = Path(spec[5:])
        try:
            rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
            matrix = np.array([[complex(tok) for tok in row] for row in rows], dtype=np.complex128)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read coin file {path}: {exc}") from exc
        if matrix.shape != (4, 4):
            raise ConfigError(f"coin file {path} must hold 4 rows of 4 entries, got shape {matrix.shape}")
        if not is_unitary(matrix, 1e-10):
            raise ConfigError(f"coin in {path} is not unitary within 1e-10")
        return matrix
    try:
        return build_coin(CoinKind(spec))
    except ValueError:
        raise ConfigError(f"unknown coin {spec!r}; use grover, sc, sp, scp or file:PATH") from None


def _parse_init(text: str, normalize: bool) -> InitialCoinState:
    try:
        vals = [float(v) for v in text.split(",")]
        state = InitialCoinState.from_reals(vals)
    except ValueError as exc:
        raise ConfigError(f"--init needs 8 comma-separated reals: {exc}") from None
    if normalize:
        return state.normalized()
    dev = abs(state.norm_squared() - 1.0)
    if dev > 1e-9:
        raise ConfigError(f"--init is not normalized (|norm^2 - 1| = {dev:.2e}); pass --normalize")
    return state.normalized()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqwalk", description="Two-dimensional self-avoiding quantum walks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--coin", default="grover", help="grover | sc | sp | scp | file:PATH")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--init", default=DEFAULT_INIT, help="re,im pairs of alpha, beta, gamma, delta")
    p.add_argument("--normalize", action="store_true", help="rescale --init to unit norm")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--grid", type=int, default=None, help="momentum grid N (oracle) or quadrature resolution")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--reference", choices=("auto", "closed", "oracle"), default="auto")
    p.add_argument("--seed", type=int, default=None, help="reserved; the pipeline is deterministic")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.steps < 0 or args.steps > DEFAULT_T_MAX:
        raise ConfigError(f"--steps must be in [0, {DEFAULT_T_MAX}]")
    if args.bins < 2:
        raise ConfigError("--bins must be >= 2")
    if args.grid is not None and args.grid < 1:
        raise ConfigError("--grid must be positive")
    cfg = RunConfig(
        command=args.command,
        coin=args.coin,
        steps=args.steps,
        init=_parse_init(args.init, args.normalize),
        bins=args.bins,
        grid=args.grid,
        out=args.out,
        tolerance=args.tolerance,
        reference=args.reference,
        seed=args.seed,
    )
    cfg.coin_matrix()
    return cfg


def _summary(cfg: RunConfig, **extra) -> dict:
    out = {"command": cfg.command, "coin": cfg.coin, "steps": cfg.steps, "init": cfg.init.to_reals()}
    out.update(extra)
    return out


def _moment_dict(fn) -> dict[str, float]:
    return {f"{r1},{r2}": fn(r1, r2) for r1, r2 in SUMMARY_MOMENTS}


def _write_summary(cfg: RunConfig, summary: dict) -> str:
    text = json.dumps(summary, sort_keys=True)
    if cfg.out is not None:
        path = cfg.out.with_suffix(".json")
        if path == cfg.out:
            path = cfg.out.with_name(cfg.out.name + ".summary.json")
        path.write_text(text + "\n")
    return text


def _write_lines(path: Path, header: str, rows: list[str]) -> None:
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows))


def _check_sum(values: Sequence[float], expected: float, what: str) -> None:
    total = math.fsum(values)
    if abs(total - expected) > CSV_SUM_TOL:
        raise InvariantViolation(f"{what} sums to {total!r}, expected {expected!r}")


def write_walk_csv(path: Path, psi: WaveFunction) -> None:
    d = distribution(psi)
    t, cap = psi.t, psi.capacity
    rows, probs = [], []
    for x in range(-t, t + 1):
        rem = t - abs(x)
        for y in range(-rem, rem + 1, 2):
            a = psi.amplitudes[x + cap, y + cap]
            p = float(d.mass[x + t, y + t])
            probs.append(p)
            rows.append(",".join([str(x), str(y)] + [_fmt(c) for z in a for c in (z.real, z.imag)] + [_fmt(p)]))
    _check_sum(probs, 1.0, "walk CSV probability column")
    _write_lines(path, "x,y,re_l,im_l,re_u,im_u,re_d,im_d,re_r,im_r,p", rows)


def write_grid_csv(path: Path, centers: np.ndarray, values: np.ndarray, expected_sum: float | None = None) -> None:
    rows = []
    for i, cx in enumerate(centers):
        for j, cy in enumerate(centers):
            rows.append(f"{_fmt(cx)},{_fmt(cy)},{_fmt(values[i, j])}")
    if expected_sum is not None:
        _check_sum(values.ravel().tolist(), expected_sum, f"{path.name} value column")
    _write_lines(path, "x_center,y_center,value", rows)


def _walk(cfg: RunConfig) -> WaveFunction:
    psi = evolve(cfg.init, cfg.coin_matrix(), cfg.steps)
    drift = abs(norm(psi) - 1.0)
    if drift > EVOLVED_NORM_TOL:
        raise InvariantViolation(f"norm drift {drift:.2e} exceeds {EVOLVED_NORM_TOL:.0e}")
    return psi


def _walk_summary(d: Distribution) -> dict:
    return {
        "total_prob": d.total(),
        "origin_block_mass": origin_block_mass(d),
        "moments": _moment_dict(lambda r1, r2: empirical_moment(d, r1, r2)),
    }


def cmd_walk(cfg: RunConfig) -> tuple[dict, int]:
    psi = _walk(cfg)
    d = distribution(psi)
    if cfg.out is not None:
        write_walk_csv(cfg.out, psi)
    return _summary(cfg, **_walk_summary(d)), EXIT_OK


def _require_closed_form(cfg: RunConfig) -> LimitDensityModel:
    model = cfg.limit_model()
    if model is None:
        if cfg.coin == CoinKind.SELF_AVOID_POSITION.value:
            raise ConfigError("no closed-form limit law exists for the position-space coin 'sp'; use the oracle reference")
        raise ConfigError(f"no closed-form limit law for coin {cfg.coin!r}; use the oracle reference")
    return LimitDensityModel(model, cfg.init)


def cmd_limit(cfg: RunConfig) -> tuple[dict, int]:
    model = _require_closed_form(cfg)
    res = cfg.grid or DEFAULT_QUAD_RESOLUTION
    centers, values = density_grid(model, cfg.bins)
    if cfg.out is not None:
        write_grid_csv(cfg.out, centers, values)
    extra = {"moments": _moment_dict(lambda r1, r2: quadrature_moment(model, r1, r2, max(res, 64)))}
    extra["total_prob"] = extra["moments"]["0,0"]
    if model.kind is LimitModel.GROVER:
        extra["delta"] = model.point_mass
    return _summary(cfg, **extra), EXIT_OK


def cmd_oracle(cfg: RunConfig) -> tuple[dict, int]:
    n = cfg.grid or DEFAULT_K_GRID
    coin = cfg.coin_matrix()
    h = oracle_histogram(coin, cfg.init, n, cfg.bins)
    if cfg.out is not None:
        write_grid_csv(cfg.out, h.centers, h.values, expected_sum=h.total())
    moments = oracle_moments(coin, cfg.init, SUMMARY_MOMENTS, n)
    extra = {
        "total_prob": h.total(),
        "discarded_fraction": h.discarded_fraction,
        "point_mass": h.point_mass,
        "moments": {f"{r1},{r2}": moments[(r1, r2)] for r1, r2 in SUMMARY_MOMENTS},
    }
    return _summary(cfg, **extra), EXIT_OK


def _use_oracle(cfg: RunConfig) -> bool:
    if cfg.reference == "oracle":
        return True
    if cfg.reference == "closed":
        _require_closed_form(cfg)
        return False
    return cfg.limit_model() is None


def _reference_histogram(cfg: RunConfig) -> RescaledHistogram:
    if _use_oracle(cfg):
        return oracle_histogram(cfg.coin_matrix(), cfg.init, cfg.grid or DEFAULT_K_GRID, cfg.bins)
    res = max(cfg.grid or 64, 8)
    return limit_histogram(LimitDensityModel(cfg.limit_model(), cfg.init), cfg.bins, res)


def _reference_moments(cfg: RunConfig, orders) -> dict[tuple[int, int], float]:
    if _use_oracle(cfg):
        return oracle_moments(cfg.coin_matrix(), cfg.init, orders, cfg.grid or DEFAULT_K_GRID)
    model = LimitDensityModel(cfg.limit_model(), cfg.init)
    res = max(cfg.grid or DEFAULT_QUAD_RESOLUTION, 64)
    return {o: quadrature_moment(model, *o, res) for o in orders}


def cmd_compare(cfg: RunConfig) -> tuple[dict, int]:
    if cfg.steps < 1:
        raise ConfigError("compare needs --steps >= 1")
    d = distribution(_walk(cfg))
    sim = rescaled_histogram(d, cfg.bins)
    ref = _reference_histogram(cfg)
    dist = l1_distance(sim, ref)
    ref_m = _reference_moments(cfg, SUMMARY_MOMENTS)
    threshold = DEFAULT_COMPARE_TOL if cfg.tolerance is None else cfg.tolerance
    if cfg.out is not None:
        write_grid_csv(cfg.out, sim.centers, sim.values, expected_sum=1.0)
        ref_path = cfg.out.with_name(cfg.out.stem + "_reference" + (cfg.out.suffix or ".csv"))
        write_grid_csv(ref_path, ref.centers, ref.values, expected_sum=ref.total())
    extra = _walk_summary(d)
    extra.update(
        l1_distance=dist,
        threshold=threshold,
        reference="oracle" if _use_oracle(cfg) else "closed",
        moment_deltas={f"{r1},{r2}": extra["moments"][f"{r1},{r2}"] - ref_m[(r1, r2)] for r1, r2 in SUMMARY_MOMENTS},
    )
    if ref.point_mass:
        extra["delta"] = ref.point_mass
    if ref.discarded_fraction:
        extra["discarded_fraction"] = ref.discarded_fraction
    return _summary(cfg, **extra), EXIT_OK if dist <= threshold else EXIT_COMPARE


def cmd_moments(cfg: RunConfig) -> tuple[dict, int]:
    times = sorted({t for t in (50, 100, 200) if t <= cfg.steps} | {cfg.steps})
    ref = _reference_moments(cfg, TABLE_MOMENTS)
    scale = max(0.5 * (ref[(2, 0)] + ref[(0, 2)]), 0.0)
    rows, worst = [], 0.0
    last = None
    for psi in evolve_checkpoints(cfg.init, cfg.coin_matrix(), times):
        d = distribution(psi)
        last = d
        for r1, r2 in TABLE_MOMENTS:
            emp = empirical_moment(d, r1, r2)
            lim = ref[(r1, r2)]
            rows.append(f"{psi.t},{r1},{r2},{_fmt(emp)},{_fmt(lim)},{_fmt(emp - lim)}")
            if psi.t == cfg.steps:
                worst = max(worst, abs(emp - lim) / max(abs(lim), scale, 1e-300))
    if cfg.out is not None:
        _write_lines(cfg.out, "t,r1,r2,empirical,limit,delta", rows)
    extra = _walk_summary(last)
    extra.update(max_relative_error=worst, reference="oracle" if _use_oracle(cfg) else "closed")
    failed = cfg.tolerance is not None and worst > cfg.tolerance
    return _summary(cfg, **extra), EXIT_COMPARE if failed else EXIT_OK


_DISPATCH = {
    "walk": cmd_walk,
    "limit": cmd_limit,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "moments": cmd_moments,
}


def run(cfg: RunConfig) -> tuple[dict, int]:
    return _DISPATCH[cfg.command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        summary, code = run(cfg)
    except (ConfigError, NormalizationError) as exc:
        print(f"sqwalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SqwalkError, FloatingPointError) as exc:
        print(f"sqwalk: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(_write_summary(cfg, summary))
    return code


if __name__ == "__main__":
    sys.exit(main())
