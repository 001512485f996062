"""Command-line front end.

Subcommands::

    blockprox run        one configuration, one trace CSV per algorithm
    blockprox compare    algorithm x alpha x seed grid, per-cell CSVs, mean traces and a figure
    blockprox validate   quick invariant self-check
    blockprox reference  compute and store the reference KT point

Options can also come from a JSON file (``--config``) whose keys are the
long option names with dashes replaced by underscores; flags given on the
command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import BlockVector, KTPoint, kt_residual
from .exceptions import NumericalError, PlanViolation, ReferenceFailure, UndefinedMetric
from .schedule import CyclicSweep, FullActivation, RandomSubset
from .solver_dr import DRConfig, dr_run
from .solver_ps import PSConfig, ps_run
from .trace import write_trace_csv

DEFAULTS = {
    "experiment": "exp1",
    "instance": None,
    "instance_seed": 0,
    "d": None,
    "p": None,
    "side": None,
    "q": None,
    "s": None,
    "algorithm": "both",
    "alpha": 1.0,
    "alphas": "0.1,0.4,0.7,1.0",
    "plan": "auto",
    "seed": 0,
    "seeds": "20",
    "epochs": None,
    "gamma": None,
    "mu": None,
    "lam": None,
    "output": None,
    "plot": None,
    "reference": None,
    "trace_every": None,
    "timing": False,
    "quiet": False,
}

SOLVER_ERRORS = (NumericalError, PlanViolation, ReferenceFailure, UndefinedMetric)


class UsageError(Exception):
    pass


def _common(sub: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    sub.add_argument("--config", default=S, help="JSON file with default option values")
    sub.add_argument("--experiment", choices=["exp1", "exp2", "custom"], default=S)
    sub.add_argument("--instance", default=S, help="instance .npz file for --experiment custom")
    sub.add_argument("--instance-seed", type=int, default=S, help="seed of the generated instance")
    sub.add_argument("--d", type=int, default=S, help="exp1 ambient dimension")
    sub.add_argument("--p", type=int, default=S, help="exp1 number of measurements")
    sub.add_argument("--side", type=int, default=S, help="exp2 image side")
    sub.add_argument("--q", type=int, default=S, help="exp2 kept rows")
    sub.add_argument("--s", type=int, default=S, help="exp2 blur blocks")
    sub.add_argument("--gamma", type=float, default=S, help="scale parameter (gamma_i for PS)")
    sub.add_argument("--mu", type=float, default=S, help="PS dual scale parameter")
    sub.add_argument("--lam", type=float, default=S, help="relaxation parameter in (0, 2)")
    sub.add_argument("--reference", default=S, help="reference .npz written by 'blockprox reference'")
    sub.add_argument("--quiet", action="store_true", default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="blockprox", description="Block-activated proximal splitting solvers.")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run one configuration")
    _common(run)
    run.add_argument("--algorithm", choices=["dr", "ps", "both"], default=S)
    run.add_argument("--alpha", type=float, default=S, help="activation fraction on the epoch side")
    run.add_argument("--plan", choices=["auto", "full", "random", "cyclic"], default=S,
                     help="auto: random for dr, cyclic for ps")
    run.add_argument("--seed", type=int, default=S, help="seed of the random activation plan")
    run.add_argument("--epochs", type=float, default=S, help="epoch budget")
    run.add_argument("--trace-every", type=float, default=S, help="record every E epochs")
    run.add_argument("--timing", action="store_true", default=S, help="fill wall_ms")
    run.add_argument("--output", default=S, help="CSV path (suffixed _dr/_ps for --algorithm both); stdout if absent")
    run.add_argument("--plot", default=S, help="figure path (.svg or .png)")

    cmp_ = subs.add_parser("compare", help="alpha x algorithm x seed grid")
    _common(cmp_)
    cmp_.add_argument("--algorithm", choices=["dr", "ps", "both"], default=S)
    cmp_.add_argument("--alphas", default=S, help="comma-separated activation fractions")
    cmp_.add_argument("--seeds", default=S, help="a count N (seeds 0..N-1) or a comma-separated list")
    cmp_.add_argument("--epochs", type=float, default=S, help="epoch budget")
    cmp_.add_argument("--trace-every", type=float, default=S, help="record every E epochs (default 1)")
    cmp_.add_argument("--timing", action="store_true", default=S, help="fill wall_ms")
    cmp_.add_argument("--output", default=S, help="output directory (default: compare-<experiment>)")
    cmp_.add_argument("--plot", default=S, help="figure path (default: <output>/error.svg)")

    val = subs.add_parser("validate", help="run the invariant self-check")
    val.add_argument("--quiet", action="store_true", default=S)

    ref = subs.add_parser("reference", help="compute and store the reference point")
    _common(ref)
    ref.add_argument("--output", default=S, help="destination .npz")
    return parser


def resolve_options(parser: argparse.ArgumentParser, argv) -> dict:
    """Merge defaults, the JSON config and explicit flags (in increasing priority)."""
    given = vars(parser.parse_args(argv))
    opts = dict(DEFAULTS)
    if "config" in given:
        try:
            with open(given["config"]) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {given['config']}: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(config) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        opts.update(config)
    opts.update({k: v for k, v in given.items() if k != "config"})
    return opts


def _log(opts, msg: str) -> None:
    if not opts.get("quiet"):
        print(msg, file=sys.stderr)


def load(opts):
    from .experiments.presets import load_experiment

    size_keys = {"exp1": ("d", "p"), "exp2": ("side", "q", "s")}.get(opts["experiment"], ())
    sizes = {k: int(opts[k]) for k in size_keys if opts.get(k) is not None}
    try:
        exp = load_experiment(opts["experiment"], seed=int(opts["instance_seed"]), path=opts.get("instance"),
                              **sizes)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if opts.get("gamma") is not None:
        exp.dr_params["gamma"] = exp.ps_params["gamma"] = float(opts["gamma"])
    if opts.get("lam") is not None:
        exp.dr_params["relaxation"] = exp.ps_params["relaxation"] = float(opts["lam"])
    if opts.get("mu") is not None:
        exp.ps_params["mu"] = float(opts["mu"])
    return exp


def save_reference(path, problem, point: KTPoint) -> None:
    np.savez(path, x=point.x.flat(), v_star=point.v_star.flat(),
             primal_dims=np.array(problem.primal_dims), dual_dims=np.array(problem.dual_dims),
             kt_residual=kt_residual(problem, point))


def load_reference(path, problem) -> BlockVector:
    with np.load(path, allow_pickle=False) as z:
        if list(z["primal_dims"]) != problem.primal_dims:
            raise UsageError(f"reference {path} does not match the problem dimensions")
        return BlockVector.from_flat(z["x"], problem.primal_dims)


def get_reference(opts, exp) -> BlockVector:
    if opts.get("reference"):
        try:
            return load_reference(opts["reference"], exp.problem)
        except OSError as exc:
            raise UsageError(f"cannot read reference {opts['reference']}: {exc}") from exc
    _log(opts, "computing reference point ...")
    return exp.reference().x


def _check_alpha(alpha: float, count: int) -> float:
    if not 0.0 < alpha <= 1.0:
        raise UsageError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha * count < 1e-9:
        raise UsageError("alpha selects no block")
    return alpha


def make_plan(kind: str, algorithm: str, problem, alpha: float, epoch_side: str, seed: int):
    a_primal, a_dual = (alpha, 1.0) if epoch_side == "primal" else (1.0, alpha)
    if kind == "auto":
        kind = "random" if algorithm == "dr" else "cyclic"
    if kind == "full":
        return FullActivation(problem.m, problem.p)
    if kind == "random":
        return RandomSubset(problem.m, problem.p, a_primal, a_dual, seed=seed)
    return CyclicSweep.from_fractions(problem.m, problem.p, a_primal, a_dual)


def cmd_run(opts) -> int:
    exp = load(opts)
    problem = exp.problem
    count = problem.m if exp.epoch_side == "primal" else problem.p
    alpha = _check_alpha(float(opts["alpha"]), count)
    epochs = float(opts["epochs"]) if opts.get("epochs") is not None else exp.epoch_budget
    algorithms = ["dr", "ps"] if opts["algorithm"] == "both" else [opts["algorithm"]]
    if opts.get("output") is None and len(algorithms) > 1:
        raise UsageError("--algorithm both needs --output")
    configs = {}
    for alg in algorithms:
        plan = make_plan(opts["plan"], alg, problem, alpha, exp.epoch_side, int(opts["seed"]))
        if alg == "dr":
            configs[alg] = DRConfig(plan=plan, max_iterations=10**9, **exp.dr_params)
            configs[alg].validate()
        else:
            configs[alg] = PSConfig(plan=plan, max_iterations=10**9, **exp.ps_params)
            configs[alg].validate(problem)
    ref = get_reference(opts, exp)
    curves = {}
    for alg, cfg in configs.items():
        common = dict(reference=ref, epoch_side=exp.epoch_side, max_epochs=epochs,
                      trace_every=opts.get("trace_every"), timing=bool(opts.get("timing")))
        if alg == "dr":
            _, records = dr_run(problem, cfg, **common)
        else:
            _, records = ps_run(problem, cfg, **common)
        out = opts.get("output")
        if out is None:
            write_trace_csv(records, sys.stdout)
        else:
            path = Path(out)
            if len(algorithms) > 1:
                path = path.with_name(f"{path.stem}_{alg}{path.suffix or '.csv'}")
            path.parent.mkdir(parents=True, exist_ok=True)
            write_trace_csv(records, path)
            _log(opts, f"wrote {path}")
        curves[(alg, alpha)] = np.array([[r.epochs, r.error_db] for r in records])
    if opts.get("plot"):
        from .plotting import plot_error_traces

        plot_error_traces(curves, opts["plot"], title=exp.name)
        _log(opts, f"wrote {opts['plot']}")
    return 0


def _parse_list(text, cast, what):
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    try:
        return [cast(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {text!r}") from exc


def _parse_seeds(text) -> list[int]:
    if isinstance(text, int):
        return list(range(text))
    seeds = _parse_list(text, int, "seeds")
    if isinstance(text, str) and "," not in text:
        return list(range(seeds[0]))
    return seeds


def cmd_compare(opts) -> int:
    from .experiments.comparison import run_comparison
    from .plotting import plot_error_traces

    exp = load(opts)
    problem = exp.problem
    count = problem.m if exp.epoch_side == "primal" else problem.p
    alphas = [_check_alpha(a, count) for a in _parse_list(opts["alphas"], float, "alphas")]
    seeds = _parse_seeds(opts["seeds"])
    if not seeds or not alphas:
        raise UsageError("need at least one seed and one alpha")
    epochs = float(opts["epochs"]) if opts.get("epochs") is not None else exp.epoch_budget
    algorithms = ["dr", "ps"] if opts["algorithm"] == "both" else [opts["algorithm"]]
    DRConfig(**exp.dr_params).validate()
    PSConfig(**exp.ps_params).validate(problem)
    out = Path(opts.get("output") or f"compare-{exp.name}")
    out.mkdir(parents=True, exist_ok=True)
    ref = get_reference(opts, exp)
    result = run_comparison(problem, algorithms, alphas, seeds, epochs, ref, epoch_side=exp.epoch_side,
                            dr_params=exp.dr_params, ps_params=exp.ps_params,
                            trace_every=opts.get("trace_every") or 1.0, timing=bool(opts.get("timing")),
                            progress=lambda a, al, s: _log(opts, f"{a} alpha={al:g} seed={s}"))
    for (alg, alpha, seed), records in result.traces.items():
        write_trace_csv(records, out / f"{alg}_alpha{alpha:g}_seed{seed}.csv")
    with open(out / "mean.csv", "w", newline="") as fh:
        fh.write("algorithm,alpha,epochs,error_db\n")
        for (alg, alpha), rows in result.means.items():
            for ep, err in rows:
                fh.write(f"{alg},{alpha:g},{ep:.6f},{err:.6f}\n")
    plot_path = opts.get("plot") or out / "error.svg"
    plot_error_traces(result.means, plot_path, title=f"{exp.name}: normalized error, mean over {len(seeds)} seeds")
    _log(opts, f"wrote {len(result.traces)} traces, {out / 'mean.csv'} and {plot_path}")
    return 0


def cmd_validate(opts) -> int:
    from .validation import run_checks

    ok = run_checks(report=(lambda s: None) if opts.get("quiet") else print)
    return 0 if ok else 1


def cmd_reference(opts) -> int:
    exp = load(opts)
    point = exp.reference()
    out = opts.get("output") or f"reference-{exp.name}.npz"
    save_reference(out, exp.problem, point)
    _log(opts, f"wrote {out} (KT residual {kt_residual(exp.problem, point):.2e})")
    return 0


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "validate": cmd_validate, "reference": cmd_reference}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        opts = resolve_options(parser, argv)
        return COMMANDS[opts["command"]](opts)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except SOLVER_ERRORS as exc:
        print(f"blockprox: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"blockprox: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
