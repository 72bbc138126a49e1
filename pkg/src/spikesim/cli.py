"""Command-line front end: run trajectories, stability and drift reports,
spike analyses, and the figure-reproduction presets, writing CSV/JSON files.

Option precedence: built-in defaults < config file (flat key=value lines)
< SPIKESIM_* environment variables < command-line flags.  Exit codes:
0 success, 1 usage error, 2 runtime error.
"""

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__, io
from .jump import (
    ProcessKind,
    build_global,
    build_meanfield,
    build_oneunit,
    simulate,
)
from .lyapunov import scan_drift_condition
from .model import ModelParams, State, stability_report
from .ode import integrate
from .spikes import (
    InsufficientDataError,
    PathSeries,
    correlation,
    detect_plateaus,
    detect_spikes,
    fit_exponential,
    lln_sup_distance,
    pair_plateau_spike,
    tail_survival,
)

ENV_PREFIX = "SPIKESIM_"

# Resolvable option table: name -> (type, default).
OPTION_DEFAULTS: dict[str, tuple[type, object]] = {
    "alpha": (float, 0.01),
    "beta": (float, 1.0),
    "gamma": (float, 100.0),
    "p": (float, 7.0),
    "n_units": (int, 10),
    "seed": (int, 1),
    "t_end": (float, 200.0),
    "max_jumps": (int, None),
    "r0": (float, 0.01),
    "n0": (float, 0.01),
    "a0": (float, None),
    "thr": (float, None),
    "dt": (float, 1e-3),
    "epsilon": (float, 0.1),
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """One trajectory-producing run plus optional analyses."""

    params: ModelParams
    mode: str  # ds | global | meanfield | oneunit
    n_units: int = 1
    initial: State = State(0.0, 0.0)
    t_end: float | None = 200.0
    max_jumps: int | None = None
    dt: float = 1e-3
    seed: int = 1
    out: str | None = None
    a0: float | None = None
    thr: float | None = None
    lln_reference: bool = False
    report_out: str | None = None
    pairs_out: str | None = None
    survival_out: str | None = None
    label: str = "run"


def preset(name: str) -> list[RunConfig]:
    """Figure-reproduction recipes: caption parameters plus documented
    defaults (horizon 200 for sample paths, 1e5 for statistics; seed 1)."""
    p100 = ModelParams(alpha=0.01, beta=1.0, gamma=100.0, p=7.0)
    p2 = ModelParams(alpha=0.01, beta=1.0, gamma=2.0, p=7.0)
    start = State(0.01, 0.01)

    def path_runs(params: ModelParams, tag: str) -> list[RunConfig]:
        return [
            RunConfig(params=params, mode="ds", initial=start, label=f"{tag}_ds"),
            RunConfig(params=params, mode="global", n_units=10, initial=start,
                      label=f"{tag}_global_n10"),
            RunConfig(params=params, mode="global", n_units=50, initial=start,
                      label=f"{tag}_global_n50"),
        ]

    if name == "fig1":
        return path_runs(p100, "fig1")
    if name == "fig2":
        return path_runs(p2, "fig2")
    if name == "fig3":
        return [
            RunConfig(params=p100, mode="ds", initial=start, label="fig3_ds_gamma100"),
            RunConfig(params=p2, mode="ds", initial=start, label="fig3_ds_gamma2"),
            RunConfig(params=p100, mode="meanfield", initial=start,
                      label="fig3_meanfield_gamma100"),
            RunConfig(params=p2, mode="meanfield", initial=start,
                      label="fig3_meanfield_gamma2"),
        ]
    if name == "fig5":
        return [
            RunConfig(params=p100, mode="oneunit", initial=State(0.0, 0.0),
                      label="fig5_oneunit_gamma100"),
            RunConfig(params=p2, mode="oneunit", initial=State(0.0, 0.0),
                      label="fig5_oneunit_gamma2"),
        ]
    if name == "fig6":
        # Amplitude-tail statistics; trajectories are not kept, only the
        # survival curves and fits.
        return [
            RunConfig(params=p100, mode="oneunit", initial=State(0.0, 0.0),
                      t_end=1e5, a0=10.0, label="fig6_oneunit_gamma100"),
            RunConfig(params=p2, mode="oneunit", initial=State(0.0, 0.0),
                      t_end=1e5, a0=20.0, label="fig6_oneunit_gamma2"),
        ]
    if name == "fig7":
        # Plateau-amplitude scatter data under both plateau definitions.
        runs = []
        for params, tag, a0 in ((p100, "gamma100", 10.0), (p2, "gamma2", 20.0)):
            for thr in (0.0, 10.0):
                runs.append(
                    RunConfig(params=params, mode="oneunit", initial=State(0.0, 0.0),
                              t_end=1e5, a0=a0, thr=thr,
                              label=f"fig7_oneunit_{tag}_thr{int(thr)}")
                )
        return runs
    raise UsageError(f"unknown preset {name!r} (know fig1, fig2, fig3, fig5, fig6, fig7)")


def run(config: RunConfig, outdir: str | Path = ".") -> list[Path]:
    """Execute one RunConfig; returns the artifact paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    report: dict = {"mode": config.mode, "seed": config.seed, "label": config.label}

    if config.mode == "ds":
        if config.t_end is None:
            raise UsageError("ds mode needs --t-end")
        traj = integrate(config.params, config.initial, config.t_end, dt=config.dt)
        out = Path(config.out) if config.out else outdir / f"{config.label}.csv"
        io.write_ode_csv(out, traj, {"r0": config.initial.r, "n0": config.initial.n})
        written.append(out)
        series = PathSeries.from_ode(traj)
        jump_traj = None
    else:
        spec = _build_spec(config)
        initial = spec.lattice_state(config.initial.r, config.initial.n)
        jump_traj = simulate(
            spec,
            initial,
            t_end=config.t_end,
            max_jumps=config.max_jumps,
            seed=config.seed,
        )
        report["n_events"] = jump_traj.n_events
        report["terminated_by"] = jump_traj.terminated_by.value
        # Keep the raw path when explicitly requested, or when it is the
        # only artifact; statistics-only runs skip the (large) CSV.
        if config.out or (config.a0 is None and config.thr is None):
            out = Path(config.out) if config.out else outdir / f"{config.label}_seed{config.seed}.csv"
            io.write_jump_csv(out, jump_traj)
            written.append(out)
        series = PathSeries.from_jump(jump_traj)

    spikes = None
    if config.a0 is not None:
        spikes = detect_spikes(series, config.a0)
        amps = [s.amplitude for s in spikes]
        report["spikes"] = {"a0": config.a0, "count": len(spikes)}
        try:
            fit = fit_exponential(amps, config.a0)
            report["spikes"]["tail_fit"] = fit.to_dict()
            grid, survival = tail_survival(amps, config.a0)
            surv_path = (
                Path(config.survival_out)
                if config.survival_out
                else outdir / f"{config.label}_survival.csv"
            )
            io.write_survival_csv(
                surv_path, grid, survival, config.params,
                {"a0": config.a0, "seed": config.seed, "mode": config.mode},
            )
            written.append(surv_path)
        except InsufficientDataError as exc:
            report["spikes"]["tail_fit"] = None
            report["spikes"]["note"] = str(exc)

    if config.thr is not None:
        plateaus = detect_plateaus(series, config.thr)
        report["plateaus"] = {"thr": config.thr, "count": len(plateaus)}
        if spikes is not None:
            pairs = pair_plateau_spike(plateaus, spikes)
            pairs_path = (
                Path(config.pairs_out)
                if config.pairs_out
                else outdir / f"{config.label}_pairs.csv"
            )
            io.write_pairs_csv(
                pairs_path, pairs, config.params,
                {"a0": config.a0, "thr": config.thr, "seed": config.seed},
            )
            written.append(pairs_path)
            try:
                report["correlation"] = correlation(pairs).to_dict()
            except InsufficientDataError as exc:
                report["correlation"] = {"note": str(exc)}

    if config.lln_reference and jump_traj is not None and config.t_end is not None:
        ref = integrate(config.params, config.initial, config.t_end, dt=config.dt)
        report["lln_sup_distance"] = lln_sup_distance(jump_traj, ref, config.t_end)

    if config.a0 is not None or config.thr is not None or config.lln_reference:
        report_path = (
            Path(config.report_out)
            if config.report_out
            else outdir / f"{config.label}_report.json"
        )
        io.write_json(report_path, report, config.params)
        written.append(report_path)
    return written


def _build_spec(config: RunConfig):
    if config.mode == "global":
        return build_global(config.params, config.n_units)
    if config.mode == "meanfield":
        return build_meanfield(config.params)
    if config.mode == "oneunit":
        return build_oneunit(config.params)
    raise UsageError(f"unknown mode {config.mode!r}")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract here is 1.
    def error(self, message: str):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_param_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--p", type=float)
    sub.add_argument("--config", help="flat key=value config file")


def build_parser() -> _Parser:
    parser = _Parser(prog="spikesim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"spikesim {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    ds = subs.add_parser("ds", help="integrate the deterministic system")
    _add_param_flags(ds)
    ds.add_argument("--r0", type=float)
    ds.add_argument("--n0", type=float)
    ds.add_argument("--t-end", type=float, dest="t_end")
    ds.add_argument("--dt", type=float)
    ds.add_argument("--out", required=True)

    st = subs.add_parser("stability", help="stationary point, eigenvalues, regime")
    _add_param_flags(st)
    st.add_argument("--out", required=True)

    sim = subs.add_parser("simulate", help="simulate a jump process")
    _add_param_flags(sim)
    sim.add_argument("--mode", choices=["global", "meanfield", "oneunit"], required=True)
    sim.add_argument("--n-units", type=int, dest="n_units")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--t-end", type=float, dest="t_end")
    sim.add_argument("--max-jumps", type=int, dest="max_jumps")
    sim.add_argument("--r0", type=float)
    sim.add_argument("--n0", type=float)
    sim.add_argument("--a0", type=float, help="spike threshold; enables tail analysis")
    sim.add_argument("--thr", type=float, help="plateau threshold; enables pairing")
    sim.add_argument("--lln-reference", action="store_true",
                     help="also integrate the ODE and report the sup distance")
    sim.add_argument("--out", required=True)
    sim.add_argument("--report-out", dest="report_out")
    sim.add_argument("--pairs-out", dest="pairs_out")
    sim.add_argument("--survival-out", dest="survival_out")

    an = subs.add_parser("analyze", help="spike/plateau analysis of a trajectory CSV")
    an.add_argument("--input", required=True)
    an.add_argument("--a0", type=float)
    an.add_argument("--thr", type=float)
    an.add_argument("--out", required=True)
    an.add_argument("--pairs-out", dest="pairs_out")

    ly = subs.add_parser("lyapunov", help="drift-condition scan")
    _add_param_flags(ly)
    ly.add_argument("--mode", choices=["meanfield", "oneunit"], required=True)
    ly.add_argument("--epsilon", type=float)
    ly.add_argument("--box-kr", type=int, dest="box_kr")
    ly.add_argument("--box-kn", type=int, dest="box_kn")
    ly.add_argument("--out", required=True)

    pr = subs.add_parser("preset", help="run a figure-reproduction recipe")
    pr.add_argument("name", help="fig1 | fig2 | fig3 | fig5 | fig6 | fig7")
    pr.add_argument("--outdir", default=".")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--t-end", type=float, dest="t_end",
                    help="override the preset horizon (all runs)")
    return parser


def _read_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line without '=': {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _resolve(name: str, args: argparse.Namespace, file_values: dict[str, str]):
    """defaults < config file < environment < flags."""
    typ, value = OPTION_DEFAULTS[name]
    if name in file_values:
        value = typ(file_values[name])
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        value = typ(env)
    flag = getattr(args, name, None)
    if flag is not None:
        value = flag
    return value


def _params_from(args: argparse.Namespace, file_values: dict[str, str]) -> ModelParams:
    try:
        return ModelParams(
            alpha=_resolve("alpha", args, file_values),
            beta=_resolve("beta", args, file_values),
            gamma=_resolve("gamma", args, file_values),
            p=_resolve("p", args, file_values),
        )
    except ValueError as exc:
        raise UsageError(f"invalid parameter combination: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"spikesim: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures: bad paths, caps, blowups
        print(f"spikesim: runtime error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args: argparse.Namespace) -> int:
    file_values = _read_config_file(getattr(args, "config", None))

    if args.command == "ds":
        params = _params_from(args, file_values)
        config = RunConfig(
            params=params,
            mode="ds",
            initial=State(_resolve("r0", args, file_values), _resolve("n0", args, file_values)),
            t_end=_resolve("t_end", args, file_values),
            dt=_resolve("dt", args, file_values),
            out=args.out,
        )
        run(config, outdir=Path(args.out).parent)
        return 0

    if args.command == "stability":
        params = _params_from(args, file_values)
        io.write_json(args.out, stability_report(params).to_dict(), params)
        return 0

    if args.command == "simulate":
        params = _params_from(args, file_values)
        config = RunConfig(
            params=params,
            mode=args.mode,
            n_units=_resolve("n_units", args, file_values),
            initial=State(_resolve("r0", args, file_values), _resolve("n0", args, file_values)),
            t_end=None if args.max_jumps is not None and args.t_end is None
            else _resolve("t_end", args, file_values),
            max_jumps=args.max_jumps,
            seed=_resolve("seed", args, file_values),
            a0=_resolve("a0", args, file_values),
            thr=_resolve("thr", args, file_values),
            lln_reference=args.lln_reference,
            out=args.out,
            report_out=args.report_out,
            pairs_out=args.pairs_out,
            survival_out=args.survival_out,
            label=Path(args.out).stem,
        )
        run(config, outdir=Path(args.out).parent)
        return 0

    if args.command == "analyze":
        return _run_analyze(args)

    if args.command == "lyapunov":
        params = _params_from(args, file_values)
        kind = ProcessKind.MEANFIELD if args.mode == "meanfield" else ProcessKind.ONEUNIT
        box = None
        if args.box_kr is not None or args.box_kn is not None:
            if args.box_kr is None or args.box_kn is None:
                raise UsageError("provide both --box-kr and --box-kn or neither")
            box = (args.box_kr, args.box_kn)
        report = scan_drift_condition(
            kind, params, epsilon=_resolve("epsilon", args, file_values), scan_box=box
        )
        io.write_json(args.out, report.to_dict(), params)
        return 0 if (report.passed or report.inconclusive) else 2

    if args.command == "preset":
        runs = preset(args.name)
        for config in runs:
            if args.seed is not None:
                config = replace(config, seed=args.seed)
            if args.t_end is not None:
                config = replace(config, t_end=args.t_end)
            for path in run(config, outdir=args.outdir):
                print(path)
        return 0

    raise UsageError(f"unknown command {args.command!r}")


def _run_analyze(args: argparse.Namespace) -> int:
    meta, columns = io.read_trajectory_csv(args.input)
    if "t" not in columns or "n" not in columns:
        raise UsageError(f"{args.input}: expected columns t and n")
    try:
        params = ModelParams(
            alpha=float(meta["alpha"]), beta=float(meta["beta"]),
            gamma=float(meta["gamma"]), p=float(meta["p"]),
        )
    except KeyError as exc:
        raise UsageError(f"{args.input}: missing parameter header {exc}") from exc
    is_step = "channel" in meta
    t = columns["t"]
    series = PathSeries(times=t, values=columns["n"], t_end=float(t[-1]), step=is_step)

    report: dict = {"input": str(args.input), "mode": meta.get("mode", "unknown")}
    spikes = None
    if args.a0 is not None:
        spikes = detect_spikes(series, args.a0)
        amps = [s.amplitude for s in spikes]
        report["spikes"] = {"a0": args.a0, "count": len(spikes)}
        try:
            report["spikes"]["tail_fit"] = fit_exponential(amps, args.a0).to_dict()
        except InsufficientDataError as exc:
            report["spikes"]["tail_fit"] = None
            report["spikes"]["note"] = str(exc)
    if args.thr is not None:
        plateaus = detect_plateaus(series, args.thr)
        report["plateaus"] = {"thr": args.thr, "count": len(plateaus)}
        if spikes is not None:
            pairs = pair_plateau_spike(plateaus, spikes)
            if args.pairs_out:
                io.write_pairs_csv(args.pairs_out, pairs, params,
                                   {"a0": args.a0, "thr": args.thr})
            try:
                report["correlation"] = correlation(pairs).to_dict()
            except InsufficientDataError as exc:
                report["correlation"] = {"note": str(exc)}
    io.write_json(args.out, report, params)
    return 0


if __name__ == "__main__":
    sys.exit(main())
