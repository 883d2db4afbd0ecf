"""Command-line interface: generate benchmarks, run trials, report metrics.

Three subcommands:

* ``gen-benchmark`` — write a synthetic learning-curve table (JSON lines);
* ``run`` — simulate repeated seeded trials against a table and write one
  CSV row per trial;
* ``report`` — turn one or more results files into a metrics CSV
  (success rates over a time grid, expected times, censoring counts).

Every command accepts ``--config FILE`` (YAML, nested sections described
in the README); individual flags override config values.  Results files
carry a fingerprint of the settings that produced them so that rows from
different settings cannot be merged silently.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Mapping, Sequence

import click
import yaml

from . import __version__
from .engine import Arm, default_portfolio, run_trial
from .metrics import (
    TrialEnsemble,
    TrialRow,
    UndefinedMetricError,
    expected_time,
    merge_ensembles,
    success_rate,
    theoretical_diversity,
)
from .space import SearchSpace
from .table import CurveModel, SurrogateTable, TableFormatError, generate_synthetic, load_table, write_table
from .termination import EtrPolicy

_RESULT_COLUMNS = (
    "trial_index",
    "seed",
    "tau_seconds",
    "evals_started",
    "evals_terminated",
    "evals_completed",
    "duplicates_resolved",
)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise click.ClickException(f"cannot parse config {path}: {exc}")
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise click.ClickException(f"config {path} must be a mapping at top level")
    return cfg


def _pick(flag: Any, cfg: Mapping[str, Any], key: str, default: Any) -> Any:
    """Precedence: explicit flag > config entry > default."""
    if flag is not None:
        return flag
    if key in cfg and cfg[key] is not None:
        return cfg[key]
    return default


def _synthetic_table(block: Mapping[str, Any]) -> SurrogateTable:
    if "space" not in block:
        raise click.ClickException("synthetic section needs a 'space' list")
    try:
        space = SearchSpace.from_json_list(block["space"])
    except (ValueError, KeyError, TypeError) as exc:
        raise click.ClickException(f"bad space definition: {exc}")
    known = {
        "max_epoch",
        "y_range",
        "lambda_range",
        "noise",
        "late_fraction",
        "late_floor",
        "epoch_time_range",
        "n_modes",
    }
    model_kwargs = {}
    for key in known:
        if key in block and block[key] is not None:
            value = block[key]
            model_kwargs[key] = tuple(value) if isinstance(value, list) else value
    try:
        model = CurveModel(**model_kwargs)
        return generate_synthetic(
            space, int(block.get("n", 200)), int(block.get("seed", 0)), model
        )
    except ValueError as exc:
        raise click.ClickException(f"cannot generate table: {exc}")


def _resolve_table(table_flag: str | None, cfg: Mapping[str, Any]) -> SurrogateTable:
    path = table_flag if table_flag is not None else cfg.get("table")
    if path is not None:
        try:
            return load_table(path)
        except (OSError, TableFormatError) as exc:
            raise click.ClickException(str(exc))
    if "synthetic" in cfg:
        return _synthetic_table(cfg["synthetic"])
    raise click.ClickException("no benchmark: pass --table or a 'table'/'synthetic' config section")


def _parse_arms(spec: Sequence[str] | str) -> tuple[Arm, ...]:
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    arms = []
    for item in spec:
        try:
            model, acq = item.strip().lower().split("-")
            arms.append(Arm(model, acq))
        except ValueError as exc:
            raise click.ClickException(f"bad arm {item!r} (expected e.g. 'gp-ei'): {exc}")
    if not arms:
        raise click.ClickException("empty arm list")
    return tuple(arms)


def _format_tau(tau: float | None) -> str:
    return "" if tau is None else f"{tau:.3f}"


def _write_results(path: str, rows: Sequence[TrialRow], fingerprint: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# fingerprint: {fingerprint}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_RESULT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.trial_index,
                    r.seed,
                    _format_tau(r.tau),
                    r.evals_started,
                    r.evals_terminated,
                    r.evals_completed,
                    r.duplicates_resolved,
                ]
            )


def load_results(path: str) -> TrialEnsemble:
    """Read a results CSV produced by ``divbo run``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline()
            if not first.startswith("# fingerprint: "):
                raise TableFormatError(f"{path}: missing fingerprint header")
            fingerprint = first[len("# fingerprint: ") :].strip()
            reader = csv.DictReader(fh)
            rows = []
            for rec in reader:
                tau = rec["tau_seconds"]
                rows.append(
                    TrialRow(
                        trial_index=int(rec["trial_index"]),
                        seed=int(rec["seed"]),
                        tau=float(tau) if tau else None,
                        evals_started=int(rec["evals_started"]),
                        evals_terminated=int(rec["evals_terminated"]),
                        evals_completed=int(rec["evals_completed"]),
                        duplicates_resolved=int(rec["duplicates_resolved"]),
                    )
                )
    except OSError as exc:
        raise click.ClickException(str(exc))
    except (KeyError, ValueError, TableFormatError) as exc:
        raise click.ClickException(f"cannot parse results file {path}: {exc}")
    if not rows:
        raise click.ClickException(f"{path}: no trial rows")
    return TrialEnsemble(tuple(rows), fingerprint)


@click.group()
@click.version_option(version=__version__, prog_name="divbo")
def main() -> None:
    """Diversified-portfolio hyperparameter optimization on tabular benchmarks."""


@main.command("gen-benchmark")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--n", type=int, help="number of configurations (overrides config)")
@click.option("--seed", type=int, help="generator seed (overrides config)")
def gen_benchmark(config_path: str | None, out: str, n: int | None, seed: int | None) -> None:
    """Write a synthetic benchmark table as JSON lines."""
    cfg = _load_config(config_path)
    block = dict(cfg.get("synthetic", {}))
    if n is not None:
        block["n"] = n
    if seed is not None:
        block["seed"] = seed
    table = _synthetic_table(block)
    write_table(table, out)
    click.echo(f"wrote {len(table)} configurations to {out} (digest {table.content_digest()})")


@main.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--trials", type=int, help="number of seeded trials")
@click.option("--seed", type=int, help="base seed; trial i uses seed+i")
@click.option("--workers", type=int, help="simulated parallel workers (M)")
@click.option(
    "--algorithm", type=click.Choice(["portfolio", "hedge", "random"]), default=None
)
@click.option("--arms", type=str, help="comma list like gp-ei,rf-ucb (portfolio only)")
@click.option("--etr", type=click.Choice(["none", "cr", "msr"]), default=None)
@click.option("--alpha", type=float, help="objective transform knee parameter")
@click.option("--beta", type=float, help="termination aggressiveness")
@click.option(
    "--duplicates",
    type=click.Choice(["naive", "random", "next_candidate", "in_progress"]),
    default=None,
)
@click.option("--target-top-k", type=int, help="target = k-th best terminal accuracy")
@click.option("--target-accuracy", type=float, help="explicit target accuracy")
@click.option("--time-budget", type=float, help="virtual seconds before censoring")
@click.option("--jobs", type=int, default=1, show_default=True, help="worker processes for trials")
def run(
    config_path: str | None,
    table_path: str | None,
    out: str,
    trials: int | None,
    seed: int | None,
    workers: int | None,
    algorithm: str | None,
    arms: str | None,
    etr: str | None,
    alpha: float | None,
    beta: float | None,
    duplicates: str | None,
    target_top_k: int | None,
    target_accuracy: float | None,
    time_budget: float | None,
    jobs: int,
) -> None:
    """Simulate repeated trials and write one CSV row per trial."""
    cfg = _load_config(config_path)
    rcfg = cfg.get("run", {}) or {}
    table = _resolve_table(table_path, cfg)

    n_trials = int(_pick(trials, rcfg, "trials", 10))
    base_seed = int(_pick(seed, rcfg, "seed", 0))
    n_workers = int(_pick(workers, rcfg, "workers", 1))
    algo = _pick(algorithm, rcfg, "algorithm", "portfolio")
    etr_kind = _pick(etr, rcfg, "etr", "none")
    a = float(_pick(alpha, rcfg, "alpha", 0.3))
    b = float(_pick(beta, rcfg, "beta", 0.1))
    strategy = _pick(duplicates, rcfg, "duplicates", "in_progress")
    budget = _pick(time_budget, rcfg, "time_budget", None)
    dispatch = _pick(None, rcfg, "dispatch", "idle_any")
    gp_samples = int(_pick(None, rcfg, "gp_samples", 1))
    mode = _pick(None, rcfg, "mode", "mean")
    fit_seconds = float(_pick(None, rcfg, "model_fit_seconds", 0.0))
    arm_spec = _pick(arms, rcfg, "arms", None)
    if n_trials < 1:
        raise click.ClickException("trials must be >= 1")

    if target_accuracy is not None and target_top_k is not None:
        raise click.ClickException("give either --target-accuracy or --target-top-k, not both")
    target_c = _pick(target_accuracy, rcfg, "target_accuracy", None)
    if target_c is None:
        k = int(_pick(target_top_k, rcfg, "target_top_k", 10))
        try:
            target_c = table.target_accuracy(k)
        except ValueError as exc:
            raise click.ClickException(str(exc))
    target_c = float(target_c)

    portfolio = _parse_arms(arm_spec) if arm_spec else default_portfolio()
    try:
        policy = EtrPolicy(kind=etr_kind, beta=b, mode=mode)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    fingerprint = json.dumps(
        {
            "algorithm": algo,
            "arms": [arm.name for arm in portfolio] if algo == "portfolio" else None,
            "alpha": a,
            "beta": b,
            "dispatch": dispatch,
            "duplicates": strategy,
            "etr": etr_kind,
            "gp_samples": gp_samples,
            "mode": mode,
            "model_fit_seconds": fit_seconds,
            "table": table.content_digest(),
            "target": target_c,
            "time_budget": budget,
            "version": 1,
            "workers": n_workers,
        },
        sort_keys=True,
    )

    def one(i: int) -> TrialRow:
        result = run_trial(
            table,
            target_c,
            portfolio=portfolio,
            algorithm=algo,
            workers=n_workers,
            alpha=a,
            etr=policy,
            duplicate_strategy=strategy,
            seed=base_seed + i,
            time_budget=budget,
            dispatch=dispatch,
            gp_samples=gp_samples,
            model_fit_seconds=fit_seconds,
        )
        return TrialRow(
            trial_index=i,
            seed=base_seed + i,
            tau=result.tau,
            evals_started=result.evals_started,
            evals_terminated=result.evals_terminated,
            evals_completed=result.evals_completed,
            duplicates_resolved=result.duplicates_resolved,
        )

    try:
        if jobs > 1:
            from joblib import Parallel, delayed

            rows = Parallel(n_jobs=jobs)(delayed(one)(i) for i in range(n_trials))
        else:
            rows = [one(i) for i in range(n_trials)]
    except ValueError as exc:
        raise click.ClickException(str(exc))

    rows = sorted(rows, key=lambda r: r.trial_index)
    _write_results(out, rows, fingerprint)
    succeeded = sum(1 for r in rows if r.tau is not None)
    click.echo(f"wrote {len(rows)} trials to {out} ({succeeded} reached the target)")


def _parse_t_grid(text: str | None, cfg_grid: Any) -> list[float]:
    if text is not None:
        parts = [p.strip() for p in text.split(",") if p.strip()]
    elif cfg_grid:
        parts = [str(p) for p in cfg_grid]
    else:
        raise click.ClickException("no time grid: pass --t-grid or a report.t_grid config entry")
    grid = []
    for p in parts:
        try:
            value = math.inf if p.lower() in ("inf", "infinity") else float(p)
        except ValueError:
            raise click.ClickException(f"bad time value {p!r} in grid")
        if value < 0:
            raise click.ClickException(f"time {p} must be >= 0")
        grid.append(value)
    return grid


def _format_t(t: float) -> str:
    return "inf" if math.isinf(t) else f"{t:.3f}"


@main.command("report")
@click.argument("results", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--t-grid", "t_grid", type=str, help="comma list of seconds; 'inf' allowed")
@click.option("--diversity-m", type=int, help="add the 1-(1-s)^m diversity column")
@click.option("--merge", is_flag=True, help="pool all inputs into one ensemble (fingerprints must match)")
def report(
    results: tuple[str, ...],
    config_path: str | None,
    out: str,
    t_grid: str | None,
    diversity_m: int | None,
    merge: bool,
) -> None:
    """Summarize results files into a metrics CSV."""
    cfg = _load_config(config_path)
    rcfg = cfg.get("report", {}) or {}
    grid = _parse_t_grid(t_grid, rcfg.get("t_grid"))
    m = diversity_m if diversity_m is not None else rcfg.get("diversity_m")
    if m is not None and m < 1:
        raise click.ClickException("diversity-m must be >= 1")

    ensembles = [(path, load_results(path)) for path in results]
    if merge:
        try:
            ensembles = [("merged", merge_ensembles([e for _, e in ensembles]))]
        except ValueError as exc:
            raise click.ClickException(str(exc))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["file", "quantity", "t_seconds", "value"])
    for path, ensemble in ensembles:
        taus = ensemble.taus
        for t in grid:
            s = success_rate(taus, t)
            writer.writerow([path, "success_rate", _format_t(t), f"{s:.6f}"])
            if m is not None:
                writer.writerow(
                    [path, f"diversity_m{m}", _format_t(t), f"{theoretical_diversity(s, m):.6f}"]
                )
        try:
            mean_h, std_h, censored = expected_time(taus, in_hours=True)
        except UndefinedMetricError as exc:
            raise click.ClickException(f"{path}: {exc}")
        writer.writerow([path, "expected_time_mean_hours", "", f"{mean_h:.6f}"])
        writer.writerow([path, "expected_time_std_hours", "", f"{std_h:.6f}"])
        writer.writerow([path, "censored", "", str(censored)])
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    click.echo(f"wrote report for {len(ensembles)} ensemble(s) to {out}")


if __name__ == "__main__":
    main()
