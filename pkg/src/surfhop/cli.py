"""Command-line interface: runs, oracle comparisons, jump tables, model scans.

Subcommands
-----------
run         propagate one engine (bo | fssh | qtsh | exact) and write frames
            as ``PREFIX.csv`` plus a JSON summary as ``PREFIX.json``.
compare     run a trajectory engine and the exact oracle on one configuration;
            write aligned frames and a verdict JSON with deviation maxima and
            pass/fail flags.
jump-table  tabulate the continuous-force momentum transfer against the
            rescaling-root values for a list of incoming momenta.
scan        tabulate the model surfaces and coupling profile over a q range.

Configuration is a flat ``key = value`` text file (``--config``), overridden
by command-line flags.  Unknown keys are rejected.  Exit codes: 0 success,
2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Optional, Sequence

from .dynamics import EngineKind, impulsive_jump
from .ensemble import EnsembleFrame, InitialCondition, RunConfig, run_ensemble
from .errors import (
    ConfigurationError,
    GridTooSmallError,
    PropagationError,
    SingularJumpError,
)
from .model import HBAR, ModelPotential
from .qgrid import Grid, run_exact

CSV_HEADER = "t,p_plus,p_minus,alpha,beta,energy,work,frustrated,consistency_gap"

_ENGINES = ("bo", "fssh", "qtsh", "exact")
_SURFACES = ("upper", "lower")


def _cast_engine(value: str) -> str:
    value = value.strip().lower()
    if value not in _ENGINES:
        raise ConfigurationError(f"engine must be one of {_ENGINES}, got {value!r}")
    return value


def _cast_surface(value: str) -> str:
    value = value.strip().lower()
    if value not in _SURFACES:
        raise ConfigurationError(f"surface must be one of {_SURFACES}, got {value!r}")
    return value


def _cast_int(value) -> int:
    try:
        return int(str(value).strip())
    except ValueError as exc:
        raise ConfigurationError(f"expected an integer, got {value!r}") from exc


def _cast_float(value) -> float:
    try:
        return float(str(value).strip())
    except ValueError as exc:
        raise ConfigurationError(f"expected a number, got {value!r}") from exc


# Config-file keys, their casts, and the run defaults.
_CONFIG_SCHEMA = {
    "engine": (_cast_engine, "qtsh"),
    "n": (_cast_int, 10000),
    "seed": (_cast_int, 42),
    "dt": (_cast_float, 0.25),
    "t_final": (_cast_float, 2500.0),
    "stride": (_cast_int, 20),
    "a": (_cast_float, 0.01),
    "b": (_cast_float, 1.6),
    "c": (_cast_float, 0.002),
    "d_width": (_cast_float, 1.0),
    "mass": (_cast_float, 2000.0),
    "k0": (_cast_float, 10.0),
    "q0": (_cast_float, -5.0),
    "sigma_q": (_cast_float, 1.0),
    "surface": (_cast_surface, "upper"),
    "exact_dt": (_cast_float, 0.1),
    "x_min": (_cast_float, -30.0),
    "x_max": (_cast_float, 50.0),
    "n_points": (_cast_int, 4096),
}


def parse_config_file(path: str) -> dict:
    """Read a flat key = value config file; ``#`` and ``;`` start comments."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    out: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{path}:{lineno}: expected key = value, got {raw.strip()!r}"
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_SCHEMA:
            raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in out:
            raise ConfigurationError(f"{path}:{lineno}: duplicate config key {key!r}")
        cast, _ = _CONFIG_SCHEMA[key]
        out[key] = cast(value)
    return out


def _resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    cfg = {key: default for key, (_, default) in _CONFIG_SCHEMA.items()}
    config_path = getattr(args, "config", None)
    if config_path:
        cfg.update(parse_config_file(config_path))
    for key, (cast, _) in _CONFIG_SCHEMA.items():
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = cast(value)
    return cfg


def _build_model(cfg: dict) -> ModelPotential:
    try:
        return ModelPotential(
            a=cfg["a"],
            b=cfg["b"],
            c=cfg["c"],
            d_width=cfg["d_width"],
            mass=cfg["mass"],
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def _build_run_config(cfg: dict) -> RunConfig:
    model = _build_model(cfg)
    ic = InitialCondition(
        q0=cfg["q0"], k0=cfg["k0"], sigma_q=cfg["sigma_q"], surface0=cfg["surface"]
    )
    # The exact oracle reuses the run parameters; its engine field is unused.
    engine = EngineKind(cfg["engine"]) if cfg["engine"] != "exact" else EngineKind.QTSH
    return RunConfig(
        model=model,
        ic=ic,
        engine=engine,
        n=cfg["n"],
        dt=cfg["dt"],
        t_final=cfg["t_final"],
        seed=cfg["seed"],
        stride=cfg["stride"],
    )


def _grid_from_config(cfg: dict) -> Grid:
    return Grid(x_min=cfg["x_min"], x_max=cfg["x_max"], n_points=cfg["n_points"])


def _format_float(value: float) -> str:
    return f"{value:.16e}"


def _frame_row(frame: EnsembleFrame) -> str:
    return ",".join(
        [
            _format_float(frame.t),
            _format_float(frame.p_plus),
            _format_float(frame.p_minus),
            _format_float(frame.mean_alpha),
            _format_float(frame.mean_beta),
            _format_float(frame.energy),
            _format_float(frame.work),
            str(frame.frustrated_count),
            _format_float(frame.consistency_gap),
        ]
    )


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _write_text(path: str, text: str) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _summarize(frames: Sequence[EnsembleFrame], engine: str, wall: float) -> dict:
    last = frames[-1]
    e0 = frames[0].energy
    return {
        "engine": engine,
        "n_frames": len(frames),
        "final_t": last.t,
        "final_p_plus": last.p_plus,
        "final_p_minus": last.p_minus,
        "final_alpha": last.mean_alpha,
        "final_beta": last.mean_beta,
        "final_energy": last.energy,
        "final_work": last.work,
        "initial_energy": e0,
        "max_energy_drift": max(abs(f.energy - e0) for f in frames),
        "max_consistency_gap": max(f.consistency_gap for f in frames),
        "frustrated_total": last.frustrated_count,
        "wall_time_s": wall,
    }


def _config_echo(cfg: dict) -> dict:
    return {key: cfg[key] for key in _CONFIG_SCHEMA}


def _run_frames(cfg: dict):
    """Propagate per cfg["engine"] and return its frame list."""
    run_cfg = _build_run_config(cfg)
    if cfg["engine"] == "exact":
        return run_exact(run_cfg, grid=_grid_from_config(cfg), dt=cfg["exact_dt"])
    return run_ensemble(run_cfg).frames


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    start = time.perf_counter()
    frames = _run_frames(cfg)
    wall = time.perf_counter() - start
    csv_lines = [CSV_HEADER] + [_frame_row(f) for f in frames]
    _write_text(args.out + ".csv", "\n".join(csv_lines) + "\n")
    report = {
        "config": _config_echo(cfg),
        "summary": _summarize(frames, cfg["engine"], wall),
    }
    _write_text(args.out + ".json", json.dumps(report, indent=2) + "\n")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if cfg["engine"] == "exact":
        raise ConfigurationError("compare needs a trajectory engine (bo|fssh|qtsh)")
    engine = cfg["engine"]
    run_cfg = _build_run_config(cfg)
    start = time.perf_counter()
    engine_frames = run_ensemble(run_cfg).frames
    exact_frames = run_exact(run_cfg, grid=_grid_from_config(cfg), dt=cfg["exact_dt"])
    wall = time.perf_counter() - start
    if len(engine_frames) != len(exact_frames):
        raise RuntimeError(
            "frame grids differ between engine and oracle "
            f"({len(engine_frames)} vs {len(exact_frames)} frames)"
        )
    for fe, fx in zip(engine_frames, exact_frames):
        if abs(fe.t - fx.t) > 1e-9:
            raise RuntimeError(f"frame times diverge: {fe.t} vs {fx.t}")

    header = "t," + ",".join(
        f"{name}_{engine},{name}_exact"
        for name in ("p_plus", "p_minus", "alpha", "beta", "energy")
    ) + f",work_{engine}"
    rows = [header]
    for fe, fx in zip(engine_frames, exact_frames):
        rows.append(
            ",".join(
                [
                    _format_float(fe.t),
                    _format_float(fe.p_plus),
                    _format_float(fx.p_plus),
                    _format_float(fe.p_minus),
                    _format_float(fx.p_minus),
                    _format_float(fe.mean_alpha),
                    _format_float(fx.mean_alpha),
                    _format_float(fe.mean_beta),
                    _format_float(fx.mean_beta),
                    _format_float(fe.energy),
                    _format_float(fx.energy),
                    _format_float(fe.work),
                ]
            )
        )
    _write_text(args.out + ".csv", "\n".join(rows) + "\n")

    def deltas(pick):
        series = [abs(pick(fe) - pick(fx)) for fe, fx in zip(engine_frames, exact_frames)]
        return max(series), series[-1]

    max_dp, fin_dp = deltas(lambda f: f.p_plus)
    max_dm, fin_dm = deltas(lambda f: f.p_minus)
    max_da, fin_da = deltas(lambda f: f.mean_alpha)
    max_db, fin_db = deltas(lambda f: f.mean_beta)
    e0 = engine_frames[0].energy
    engine_drift = max(abs(f.energy - e0) for f in engine_frames)
    x0 = exact_frames[0].energy
    exact_drift = max(abs(f.energy - x0) for f in exact_frames)
    tol_p = 0.05
    tol_drift = 1e-4
    verdict = {
        "config": _config_echo(cfg),
        "engine": engine,
        "n_frames": len(engine_frames),
        "max_abs_delta_p_plus": max_dp,
        "final_abs_delta_p_plus": fin_dp,
        "max_abs_delta_p_minus": max_dm,
        "final_abs_delta_p_minus": fin_dm,
        "max_abs_delta_alpha": max_da,
        "final_abs_delta_alpha": fin_da,
        "max_abs_delta_beta": max_db,
        "final_abs_delta_beta": fin_db,
        "engine_max_energy_drift": engine_drift,
        "exact_max_energy_drift": exact_drift,
        "engine_final_work": engine_frames[-1].work,
        "tolerance_p_plus": tol_p,
        "tolerance_energy_drift": tol_drift,
        "pass_p_plus": bool(max_dp <= tol_p),
        "pass_energy_drift": bool(engine_drift <= tol_drift),
        "wall_time_s": wall,
    }
    _write_text(args.out + ".json", json.dumps(verdict, indent=2) + "\n")
    return 0


def _parse_momenta(text: str) -> list:
    items = [piece.strip() for piece in text.split(",")]
    momenta = []
    for item in items:
        if not item:
            continue
        momenta.append(_cast_float(item))
    if not momenta:
        raise ConfigurationError(f"no momenta given in {text!r}")
    return momenta


JUMP_TABLE_HEADER = (
    "pk,hbar_omega,qtsh_down,qtsh_up,fssh_down,fssh_up,"
    "fssh_up_frustrated,rel_discrepancy,singular"
)


def jump_table_rows(
    model: ModelPotential, momenta: Sequence[float], q_star: float = 0.0
) -> list:
    """One dict per momentum comparing the two momentum-transfer formulas."""
    ad = model.adiabatic(q_star)
    gap = HBAR * float(ad.omega)
    mass = model.mass
    rows = []
    nan = float("nan")
    for pk in momenta:
        row = {
            "pk": pk,
            "hbar_omega": gap,
            "qtsh_down": nan,
            "qtsh_up": nan,
            "fssh_down": nan,
            "fssh_up": nan,
            "fssh_up_frustrated": False,
            "rel_discrepancy": nan,
            "singular": False,
        }
        try:
            row["qtsh_down"] = impulsive_jump(model, q_star, pk, "down")
            row["qtsh_up"] = impulsive_jump(model, q_star, pk, "up")
        except SingularJumpError:
            row["singular"] = True
            rows.append(row)
            continue
        sign = 1.0 if pk >= 0.0 else -1.0
        fssh_down = sign * math.sqrt(pk * pk + 2.0 * mass * gap) - pk
        row["fssh_down"] = fssh_down
        kinetic = pk * pk / (2.0 * mass)
        if kinetic < gap:
            row["fssh_up_frustrated"] = True
        else:
            row["fssh_up"] = sign * math.sqrt(pk * pk - 2.0 * mass * gap) - pk
        if fssh_down != 0.0:
            row["rel_discrepancy"] = abs(row["qtsh_down"] - fssh_down) / abs(fssh_down)
        rows.append(row)
    return rows


def cmd_jump_table(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    model = _build_model(cfg)
    momenta = _parse_momenta(args.momenta)
    rows = jump_table_rows(model, momenta, q_star=args.q_star)
    lines = [JUMP_TABLE_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    _format_float(row["pk"]),
                    _format_float(row["hbar_omega"]),
                    _format_float(row["qtsh_down"]),
                    _format_float(row["qtsh_up"]),
                    _format_float(row["fssh_down"]),
                    _format_float(row["fssh_up"]),
                    "true" if row["fssh_up_frustrated"] else "false",
                    _format_float(row["rel_discrepancy"]),
                    "true" if row["singular"] else "false",
                ]
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


SCAN_HEADER = "q,v1,v2,v12,vplus,vminus,omega,phi,d"


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    model = _build_model(cfg)
    if args.n_q < 2:
        raise ConfigurationError(f"scan needs at least 2 points, got {args.n_q}")
    if not args.q_max > args.q_min:
        raise ConfigurationError(
            f"q_max must exceed q_min, got [{args.q_min}, {args.q_max}]"
        )
    lines = [SCAN_HEADER]
    span = args.q_max - args.q_min
    for i in range(args.n_q):
        q = args.q_min + span * i / (args.n_q - 1)
        dia = model.diabatic(q)
        ad = model.adiabatic(q)
        lines.append(
            ",".join(
                _format_float(float(v))
                for v in (
                    q,
                    dia.v1,
                    dia.v2,
                    dia.v12,
                    ad.vplus,
                    ad.vminus,
                    ad.omega,
                    ad.phi,
                    ad.d,
                )
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--a", type=float, help="diabatic asymptote (hartree)")
    parser.add_argument("--b", type=float, help="diabatic steepness (1/bohr)")
    parser.add_argument("--c", type=float, help="coupling strength (hartree)")
    parser.add_argument("--d-width", dest="d_width", type=float,
                        help="coupling Gaussian width parameter (1/bohr^2)")
    parser.add_argument("--mass", type=float, help="particle mass (a.u.)")


def _add_run_flags(parser: argparse.ArgumentParser, engines: Sequence[str]) -> None:
    parser.add_argument("--engine", choices=list(engines))
    parser.add_argument("--n", type=int, help="trajectory count")
    parser.add_argument("--seed", type=int, help="ensemble seed")
    parser.add_argument("--dt", type=float, help="trajectory time step (a.u.)")
    parser.add_argument("--t-final", dest="t_final", type=float,
                        help="propagation horizon (a.u.)")
    parser.add_argument("--stride", type=int, help="steps between frames")
    parser.add_argument("--k0", type=float, help="initial mean wavevector")
    parser.add_argument("--q0", type=float, help="initial packet center (bohr)")
    parser.add_argument("--sigma-q", dest="sigma_q", type=float,
                        help="initial position width (bohr)")
    parser.add_argument("--surface", choices=list(_SURFACES),
                        help="initially occupied adiabatic surface")
    _add_model_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfhop",
        description="Mixed quantum-classical dynamics on a two-state avoided crossing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="propagate one engine and write CSV + JSON")
    _add_run_flags(p_run, _ENGINES)
    p_run.add_argument("--out", required=True,
                       help="output prefix (writes PREFIX.csv and PREFIX.json)")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser(
        "compare", help="run a trajectory engine against the exact oracle"
    )
    _add_run_flags(p_cmp, ("bo", "fssh", "qtsh"))
    p_cmp.add_argument("--out", required=True,
                       help="output prefix (writes PREFIX.csv and PREFIX.json)")
    p_cmp.set_defaults(func=cmd_compare)

    p_jump = sub.add_parser(
        "jump-table", help="tabulate hop momentum transfers for a momentum list"
    )
    _add_model_flags(p_jump)
    p_jump.add_argument("--momenta", default="3,10,25",
                        help="comma-separated incoming momenta (a.u.)")
    p_jump.add_argument("--q-star", dest="q_star", type=float, default=0.0,
                        help="position at which transfers are evaluated (bohr)")
    p_jump.add_argument("--out", help="output CSV path (default: stdout)")
    p_jump.set_defaults(func=cmd_jump_table)

    p_scan = sub.add_parser("scan", help="tabulate the model profile over q")
    _add_model_flags(p_scan)
    p_scan.add_argument("--q-min", dest="q_min", type=float, default=-4.0)
    p_scan.add_argument("--q-max", dest="q_max", type=float, default=4.0)
    p_scan.add_argument("--n-q", dest="n_q", type=int, default=801,
                        help="number of scan points")
    p_scan.add_argument("--out", help="output CSV path (default: stdout)")
    p_scan.set_defaults(func=cmd_scan)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PropagationError, GridTooSmallError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
