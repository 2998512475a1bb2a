"""Command-line front end.

    metrocross sweep      --channel pauli-xy --n 4 --strategies parallel,ancilla --grid 0:1:0.02
    metrocross crossover  --channel amplitude-damping --n 2 --strategies parallel,ancilla
    metrocross reproduce  fig2 --out data/
    metrocross surface    --points 41 --out surface.csv

Exit codes: 0 success, 2 configuration error, 3 optimizer failure, 4 no crossover.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from metrocross import noise_estimation as ne
from metrocross.channels import AMPLITUDE_DAMPING, DEPOLARIZING, NOISE_FAMILIES, PAULI_XY
from metrocross.errors import MetrocrossError, NoSignChange, OptimizerFailure, ParamOutOfRange
from metrocross.optimizer import OptimizerOptions
from metrocross.phase_covariant_surface import DEFAULT_POINTS, default_grid, surface
from metrocross.records import SWEEP_COLUMNS, SweepRecord, records_to_rows, render, to_json, write_text
from metrocross.strategies import (
    CLASSICAL,
    CrossoverResult,
    StrategyConfig,
    StrategyEvaluation,
    amplitude_damping_bound_efficiency_form,
    canonical_kind,
    classical_reference,
    crossover,
    evaluate,
    fig4_factors,
    is_tie,
    literature_bound,
)

log = logging.getLogger("metrocross")

EXIT_OK, EXIT_CONFIG, EXIT_OPTIMIZER, EXIT_NO_CROSSING = 0, 2, 3, 4

DEFAULT_SEED = 42
DEFAULT_GRID = "0:1:0.02"
DEFAULT_CROSSOVER_GRID = "0.02:0.98:0.04"
DEFAULT_T_GRID = "0.01:0.99:0.01"
FIGURES = ("fig2", "fig3", "fig4", "figA1", "figB1")
FIGURE_CHANNELS = {"fig2": PAULI_XY, "fig3": DEPOLARIZING, "fig4": AMPLITUDE_DAMPING}
FIGURE_STRATEGIES = ("parallel", "ancilla_assisted", "intermediate", "classical")

CONVENTION_NOTES = {
    PAULI_XY: "Totals are per N channel uses (repetitions x block QFI). No literature bound applies.",
    DEPOLARIZING: (
        "Totals are per N channel uses (repetitions x block QFI). "
        "Bound: N (1-eta)^(5/4) / (1 - (1-eta)^(5/4))."
    ),
    AMPLITUDE_DAMPING: (
        "Totals are per N channel uses (repetitions x block QFI). The ancilla closed form "
        "8(1-eta)/(1+sqrt(1-eta))^2 counts two uses of the block. The two-probe closed form is "
        "evaluated at the efficiency 1-eta. Bound printed as N eta/(1-eta); bound_efficiency_form "
        "gives N (1-eta)/eta."
    ),
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    step: float

    @classmethod
    def parse(cls, text: str) -> Grid:
        try:
            lo, hi, step = (float(x) for x in str(text).split(":"))
        except ValueError:
            raise ConfigError(f"grid must look like lo:hi:step, got {text!r}") from None
        if not lo < hi:
            raise ConfigError(f"grid needs lo < hi, got {lo} and {hi}")
        if not step > 0:
            raise ConfigError(f"grid step must be positive, got {step}")
        return cls(lo, hi, step)

    def values(self) -> list[float]:
        n = int(np.floor((self.hi - self.lo) / self.step + 1e-9))
        vals = [round(self.lo + i * self.step, 12) for i in range(n + 1)]
        if self.hi - vals[-1] > 1e-9 * self.step:
            vals.append(self.hi)
        return vals


@dataclass(frozen=True)
class RunConfig:
    channel: str
    n_uses: int
    strategies: tuple[str, ...]
    grid: Grid
    optimizer: OptimizerOptions
    output_path: str | None
    format: str
    tol: float


def _split_strategies(value: Any) -> tuple[str, ...]:
    if value is None:
        return ()
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return tuple(s.strip() for s in items if str(s).strip())


def load_config_file(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def resolve(args: argparse.Namespace, *, default_grid: str = DEFAULT_GRID, need_strategies: bool = True) -> RunConfig:
    """Merge command-line flags over config-file values over built-in defaults."""
    file_cfg = load_config_file(getattr(args, "config", None))

    def pick(name: str, default: Any) -> Any:
        value = getattr(args, name, None)
        if value is not None:
            return value
        return file_cfg.get(name, default)

    channel = pick("channel", PAULI_XY)
    if channel not in NOISE_FAMILIES:
        raise ConfigError(f"--channel must be one of {', '.join(NOISE_FAMILIES)}, got {channel!r}")
    try:
        n_uses = int(pick("n", 4))
        seed = int(pick("seed", DEFAULT_SEED))
        starts = int(pick("starts", OptimizerOptions.n_starts))
        tol = float(pick("tol", 1e-3))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if n_uses < 1:
        raise ConfigError("--n must be at least 1")
    if starts < 1:
        raise ConfigError("--starts must be at least 1")
    if not tol > 0:
        raise ConfigError("--tol must be positive")
    strategies = _split_strategies(pick("strategies", None))
    if need_strategies and not strategies:
        raise ConfigError("--strategies must name at least one strategy")
    try:
        strategies = tuple(canonical_kind(s) for s in strategies)
    except MetrocrossError as exc:
        raise ConfigError(str(exc)) from None
    fmt = pick("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"--format must be csv or json, got {fmt!r}")
    grid = Grid.parse(pick("grid", default_grid))
    return RunConfig(
        channel=channel,
        n_uses=n_uses,
        strategies=strategies,
        grid=grid,
        optimizer=OptimizerOptions(n_starts=starts, seed=seed),
        output_path=pick("out", None),
        format=fmt,
        tol=tol,
    )


def _configs(cfg: RunConfig) -> list[StrategyConfig]:
    try:
        return [StrategyConfig.make(s, cfg.n_uses) for s in cfg.strategies]
    except MetrocrossError as exc:
        raise ConfigError(str(exc)) from None


def _bound(channel: str, eta: float, n: int) -> float | None:
    try:
        return literature_bound(channel, eta, n)
    except ParamOutOfRange:
        return None


def _evaluate_at(scfg: StrategyConfig, channel: str, eta: float, opt: OptimizerOptions, warm: dict) -> StrategyEvaluation:
    try:
        ev = evaluate(scfg, channel, eta, opt, seeds=warm.get(scfg.kind, []))
    except OptimizerFailure as exc:
        raise OptimizerFailure(f"{scfg.kind} at {channel} eta={eta:g}: {exc}") from exc
    warm[scfg.kind] = [ev.optimal_state]
    return ev


def sweep_records(cfg: RunConfig) -> list[SweepRecord]:
    """One record per (grid point, strategy), in grid order."""
    configs = _configs(cfg)
    warm: dict[str, list] = {}
    out = []
    for eta in cfg.grid.values():
        if not 0.0 <= eta <= 1.0:
            raise ConfigError(f"grid point {eta} outside [0, 1]")
        for scfg in configs:
            ev = _evaluate_at(scfg, cfg.channel, eta, cfg.optimizer, warm)
            report = ev.optimizer_report
            out.append(
                SweepRecord(
                    channel=cfg.channel,
                    param_name="eta",
                    param_value=eta,
                    strategy=scfg.kind,
                    n_uses=scfg.n_uses,
                    block_qfi=ev.block_qfi,
                    total_qfi=ev.total_qfi,
                    bound_value=_bound(cfg.channel, eta, cfg.n_uses),
                    classical_reference=classical_reference(cfg.channel, eta, cfg.n_uses),
                    starts_converged=report.starts_converged if report else None,
                    spread=report.spread if report else None,
                    seed=cfg.optimizer.seed,
                )
            )
    return out


def cmd_sweep(args: argparse.Namespace, stdout=sys.stdout) -> int:
    cfg = resolve(args)
    rows = records_to_rows(sweep_records(cfg))
    write_text(cfg.output_path, render(rows, SWEEP_COLUMNS, cfg.format), stdout)
    return EXIT_OK


def bracket_crossing(cfg: RunConfig, a: StrategyConfig, b: StrategyConfig) -> tuple[float, float]:
    """First grid interval on which ``total(a) - total(b)`` changes sign."""
    warm: dict[str, list] = {}
    prev = None
    for eta in cfg.grid.values():
        qa = _evaluate_at(a, cfg.channel, eta, cfg.optimizer, warm).total_qfi
        qb = _evaluate_at(b, cfg.channel, eta, cfg.optimizer, warm).total_qfi
        diff = 0.0 if is_tie(qa, qb) else qa - qb
        if prev is not None and (diff == 0 or prev[1] * diff < 0):
            return prev[0], eta
        if diff != 0 and qa + qb > 0:
            prev = (eta, diff)
    raise NoSignChange(f"{a.kind} and {b.kind} do not cross on the grid {cfg.grid.lo}:{cfg.grid.hi}:{cfg.grid.step}")


def crossover_report(cfg: RunConfig, res: CrossoverResult, a: StrategyConfig, b: StrategyConfig) -> dict[str, Any]:
    return {
        "channel": cfg.channel,
        "param_name": "eta",
        "n_uses": cfg.n_uses,
        "strategy_a": a.kind,
        "strategy_b": b.kind,
        "eta_star": res.eta,
        "efficiency_star": res.efficiency,
        "bracket": list(res.bracket),
        "bracket_width": res.bracket_width,
        "qfi_a": res.qfi_a,
        "qfi_b": res.qfi_b,
        "tol": cfg.tol,
        "seed": cfg.optimizer.seed,
        "starts": cfg.optimizer.n_starts,
        "note": CONVENTION_NOTES[cfg.channel],
    }


def cmd_crossover(args: argparse.Namespace, stdout=sys.stdout) -> int:
    cfg = resolve(args, default_grid=DEFAULT_CROSSOVER_GRID)
    if len(cfg.strategies) != 2:
        raise ConfigError("crossover needs exactly two strategies, e.g. --strategies parallel,ancilla")
    a, b = _configs(cfg)
    lo, hi = bracket_crossing(cfg, a, b)
    res = crossover(a, b, cfg.channel, lo, hi, cfg.tol, cfg.optimizer)
    report = crossover_report(cfg, res, a, b)
    stdout.write(
        f"eta* = {res.eta:.6f} (1 - eta* = {res.efficiency:.6f}), bracket width {res.bracket_width:.3g}\n"
        f"QFI {a.kind} = {res.qfi_a:.10g}, QFI {b.kind} = {res.qfi_b:.10g}\n"
        f"note: {report['note']}\n"
    )
    if cfg.output_path:
        write_text(cfg.output_path, to_json(report), stdout)
    return EXIT_OK


# figure data ---------------------------------------------------------------------


def strategy_panel(channel: str, n: int, etas: Sequence[float], opt: OptimizerOptions) -> tuple[list[dict], list[dict]]:
    """Total QFI of each strategy (panel a) and ancilla ratios (panel b) on ``etas``."""
    configs = [StrategyConfig.make(s, n) for s in FIGURE_STRATEGIES]
    warm: dict[str, list] = {}
    panel_a, panel_b = [], []
    for eta in etas:
        row: dict[str, Any] = {"eta": eta, "efficiency": round(1 - eta, 12)}
        for scfg in configs:
            row[scfg.kind] = _evaluate_at(scfg, channel, eta, opt, warm).total_qfi
        row["classical_reference"] = classical_reference(channel, eta, n)
        row["bound"] = _bound(channel, eta, n)
        if channel == AMPLITUDE_DAMPING:
            row["bound_efficiency_form"] = amplitude_damping_bound_efficiency_form(eta, n) if 0 < eta < 1 else None
        panel_a.append(row)
        anc = row["ancilla_assisted"]
        ratios: dict[str, Any] = {"eta": eta, "efficiency": row["efficiency"]}
        for other in ("parallel", "intermediate", CLASSICAL):
            ratios[f"ancilla_over_{other}"] = anc / row[other] if row[other] > 1e-12 else None
        panel_b.append(ratios)
    return panel_a, panel_b


def _write_table(out_dir: Path, name: str, rows: list[dict], fmt: str, stdout) -> Path:
    columns = list(rows[0]) if rows else []
    path = out_dir / f"{name}.{fmt}"
    write_text(path, render(rows, columns, fmt), stdout)
    return path


def surface_rows(points: int, opt: OptimizerOptions) -> tuple[list[dict], int, int]:
    kappas, etas = default_grid(points)
    res = surface(kappas, etas, opt)
    rows = [
        {
            "kappa": p.kappa,
            "eta_par": p.eta_par,
            "eta_perp": p.eta_perp,
            "qfi_ancilla": p.qfi_ancilla,
            "qfi_parallel": p.qfi_parallel,
            "difference": p.difference,
        }
        for p in res.points
    ]
    return rows, len(res.skipped), len(res.failed)


def cmd_reproduce(args: argparse.Namespace, stdout=sys.stdout) -> int:
    figure = args.figure
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    cfg = resolve(args, default_grid=DEFAULT_T_GRID if figure == "figB1" else DEFAULT_GRID, need_strategies=False)
    out_dir = Path(cfg.output_path or ".")
    written = []
    if figure in FIGURE_CHANNELS:
        channel = FIGURE_CHANNELS[figure]
        n = getattr(args, "n", None) or 4
        panel_a, panel_b = strategy_panel(channel, n, cfg.grid.values(), cfg.optimizer)
        written.append(_write_table(out_dir, f"{figure}_a", panel_a, cfg.format, stdout))
        written.append(_write_table(out_dir, f"{figure}_b", panel_b, cfg.format, stdout))
        if figure == "fig4":
            rows = []
            for eta in cfg.grid.values():
                if 0 < eta < 1:
                    r_i, r_iii = fig4_factors(eta)
                    rows.append({"eta": eta, "ratio_i_ii": r_i, "ratio_iii_ii": r_iii})
            written.append(_write_table(out_dir, "fig4_factors", rows, cfg.format, stdout))
    elif figure == "figA1":
        rows, skipped, failed = surface_rows(args.points, cfg.optimizer)
        log.info("surface: %d points, %d skipped as not CPTP, %d failed", len(rows), skipped, failed)
        written.append(_write_table(out_dir, "figA1", rows, cfg.format, stdout))
    else:
        ts = [t for t in cfg.grid.values() if 0 < t < 1]
        opt = ne.bures_options(n_starts=cfg.optimizer.n_starts if args.starts else 8, seed=cfg.optimizer.seed)
        written.append(_write_table(out_dir, "figB1", ne.figure_rows(ts, opt), cfg.format, stdout))
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_surface(args: argparse.Namespace, stdout=sys.stdout) -> int:
    cfg = resolve(args, need_strategies=False)
    rows, skipped, failed = surface_rows(args.points, cfg.optimizer)
    log.info("surface: %d points, %d skipped as not CPTP, %d failed", len(rows), skipped, failed)
    columns = ("kappa", "eta_par", "eta_perp", "qfi_ancilla", "qfi_parallel", "difference")
    write_text(cfg.output_path, render(rows, columns, cfg.format), stdout)
    return EXIT_OK


# parser ----------------------------------------------------------------------------


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--channel", help=f"noise family: {', '.join(NOISE_FAMILIES)}")
    p.add_argument("--n", type=int, help="total channel uses N")
    p.add_argument("--strategies", help="comma-separated: parallel, ancilla, intermediate, classical")
    p.add_argument("--grid", help="noise grid lo:hi:step")
    p.add_argument("--tol", type=float, help="crossover bracket width (default 1e-3)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--starts", type=int, help="optimizer starts per evaluation (default 32)")
    p.add_argument("--out", help="output file (sweep, surface, crossover) or directory (reproduce)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with defaults for the flags above")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metrocross", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
    parser.add_argument("--config", default=None, help="JSON file with defaults for the flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()

    p = sub.add_parser("sweep", parents=[common], help="QFI of each strategy over a noise grid")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("crossover", parents=[common], help="noise level where two strategies meet")
    p.set_defaults(func=cmd_crossover)
    p = sub.add_parser("reproduce", parents=[common], help="data behind a figure")
    p.add_argument("figure", help=f"one of {', '.join(FIGURES)}")
    p.add_argument("--points", type=int, default=DEFAULT_POINTS, help="grid points per axis for figA1")
    p.set_defaults(func=cmd_reproduce)
    p = sub.add_parser("surface", parents=[common], help="phase-covariant QFI difference surface")
    p.add_argument("--points", type=int, default=DEFAULT_POINTS, help="grid points per axis")
    p.set_defaults(func=cmd_surface)
    return parser


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr, format="%(message)s")
    try:
        if getattr(args, "points", DEFAULT_POINTS) < 2:
            raise ConfigError("--points must be at least 2")
        return args.func(args, stdout)
    except ConfigError as exc:
        stderr.write(f"metrocross: error: {exc}\n")
        return EXIT_CONFIG
    except OptimizerFailure as exc:
        stderr.write(f"metrocross: optimizer failure: {exc}\n")
        return EXIT_OPTIMIZER
    except NoSignChange as exc:
        stderr.write(f"metrocross: no crossover: {exc}\n")
        return EXIT_NO_CROSSING
    except (MetrocrossError, ValueError) as exc:
        stderr.write(f"metrocross: error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
