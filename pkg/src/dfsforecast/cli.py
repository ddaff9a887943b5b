"""Command-line entry point: generate, train, forecast, eval.

Every command reads a ``section.key=value`` config (defaults reproduce the
Mackey-Glass setup) and writes CSV/text artifacts into the output directory.
Set ``DFS_LOG_LEVEL`` (e.g. ``DEBUG``) for more logging.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path

from . import config as config_mod
from . import mackey_glass as mg
from .config import RunConfig
from .dfsla import dfsla_train
from .disturbed import load_model, save_model, taylor_coefficients
from .errors import ContractViolation, CoverageHoleError, DeadRuleError, NumericalFailure, TrustRegionError
from .fuzzy import FuzzyPartition, enumerate_rules, select_top_fired
from .metrics import SUMMARY_HEADER, ErrorSummary, compare
from .taylor import FREE_RUN, ONE_STEP, ForecastResult, TaylorStepConfig, forecast

log = logging.getLogger("dfsforecast")

EXIT_OK, EXIT_CONTRACT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
DERIVATIVES = "derivatives"
MODES = (ONE_STEP, FREE_RUN, DERIVATIVES)

DATA_FILE = "mg.csv"
MODEL_FILE = "model.txt"
REPORT_FILE = "train_report.txt"
CONFIG_FILE = "config.txt"
PRED_FILES = {ONE_STEP: "pred_one_step.csv", FREE_RUN: "pred_free_run.csv"}
DERIV_FILE = "deriv.csv"
METRICS_FILE = "metrics.csv"


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_summaries(path: Path, named: list[tuple[str, ErrorSummary]]) -> None:
    _write_rows(path, SUMMARY_HEADER, [s.csv_row(name) for name, s in named])


def cmd_generate(cfg: RunConfig, out: Path) -> Path:
    cfg.validate()
    out.mkdir(parents=True, exist_ok=True)
    series = mg.generate(cfg.mg, cfg.spacing, order=3)
    path = out / DATA_FILE
    mg.write_csv(series, path)
    (out / CONFIG_FILE).write_text(cfg.dumps())
    log.info("wrote %s (%d rows)", path, len(series.times))
    return path


def load_series(cfg: RunConfig, data_path: Path) -> mg.MgSeries:
    series = mg.read_csv(data_path)
    if not math.isclose(series.spacing, cfg.spacing, rel_tol=1e-12):
        raise ContractViolation(f"{data_path} has spacing {series.spacing}, config says {cfg.spacing}")
    return mg.with_fourth_derivative(series, cfg.mg)


def embed(cfg: RunConfig, series: mg.MgSeries):
    return mg.build_embedding(
        series, cfg.lags, start=cfg.start, n_train=cfg.n_train, n_test=cfg.n_test,
        spacing=cfg.spacing, horizon=cfg.h,
    )


def cmd_train(cfg: RunConfig, out: Path, data_path: Path | None = None):
    cfg.validate()
    out.mkdir(parents=True, exist_ok=True)
    series = load_series(cfg, data_path or out / DATA_FILE)
    train, _ = embed(cfg, series)
    partition = FuzzyPartition.uniform(cfg.intervals, cfg.counts)
    rules = select_top_fired(partition, enumerate_rules(partition), train.inputs, cfg.k)
    model, report = dfsla_train(partition, rules, train, cfg.r, cfg.s, ridge=cfg.ridge)
    save_model(model, out / MODEL_FILE)
    (out / REPORT_FILE).write_text(report.to_text())
    log.info("trained %d rules, residual norms %s", report.rule_count, report.residual_norms)
    return model, report


def _test_window(cfg: RunConfig, series: mg.MgSeries):
    """History on the h-grid ending one step before the test split, plus truth."""
    stride = cfg.stride
    k0 = series.index_of(cfg.start + cfg.n_train * cfg.spacing)
    steps = cfg.n_test // stride
    base = k0 - stride
    if base < 0:
        raise ContractViolation("no history before the test split")
    history = series.x[base % stride: base + 1: stride]
    truth = series.x[base + stride: base + stride * (steps + 1): stride]
    return history, truth, steps, float(series.times[base])


def run_forecast(cfg: RunConfig, model, series: mg.MgSeries, mode: str) -> ForecastResult:
    history, truth, steps, t0 = _test_window(cfg, series)
    step_cfg = TaylorStepConfig(nu=cfg.nu, h=cfg.h)
    return forecast(model, history, step_cfg, cfg.lags, steps, mode=mode, truth=truth, t0=t0)


def derivative_forecast(cfg: RunConfig, model, series: mg.MgSeries):
    """Model derivative series ``x', x'', x'''`` on the test inputs."""
    _, test = embed(cfg, series)
    values, holes = taylor_coefficients(model, test.inputs, fallback=True)
    if holes.any():
        log.info("%d coverage holes on the test inputs; nearest-rule fallback used", int(holes.sum()))
    n = min(3, model.order_r + 1)
    hats = [values[:, i] * math.factorial(i) for i in range(n)]
    truths = [test.targets[:, i] for i in range(n)]
    return test.times, truths, hats


def cmd_forecast(cfg: RunConfig, out: Path, mode: str, model_path=None, data_path=None):
    cfg.validate()
    if mode not in MODES:
        raise ContractViolation(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    out.mkdir(parents=True, exist_ok=True)
    model = load_model(model_path or out / MODEL_FILE)
    series = load_series(cfg, data_path or out / DATA_FILE)
    if mode == DERIVATIVES:
        times, truths, hats = derivative_forecast(cfg, model, series)
        names = [f"x{i + 1}" for i in range(len(hats))]
        header = ["t"] + [c for name in names for c in (name, name + "_hat")]
        rows = []
        for k, t in enumerate(times):
            row = [_fmt(t)]
            for tr, hat in zip(truths, hats):
                row += [_fmt(tr[k]), _fmt(hat[k])]
            rows.append(row)
        _write_rows(out / DERIV_FILE, header, rows)
        summaries = [(name, compare(hat, tr)) for name, tr, hat in zip(names, truths, hats)]
        _write_summaries(out / "summary_derivatives.csv", summaries)
        return summaries
    result = run_forecast(cfg, model, series, mode)
    rows = [
        [_fmt(t), _fmt(tr), _fmt(p), _fmt(tr - p)]
        for t, tr, p in zip(result.times, result.truth, result.predicted)
    ]
    _write_rows(out / PRED_FILES[mode], ["t", "truth", "pred", "residual"], rows)
    if result.fallback_steps:
        log.warning("%d forecast steps used the nearest-rule fallback", len(result.fallback_steps))
    summaries = [(mode, compare(result.predicted, result.truth))]
    _write_summaries(out / f"summary_{mode.replace('-', '_')}.csv", summaries)
    return summaries


def cmd_eval(cfg: RunConfig, out: Path):
    """Full reproduction: generate, train, and forecast in every mode."""
    cmd_generate(cfg, out)
    cmd_train(cfg, out)
    summaries = []
    for mode in MODES:
        summaries += cmd_forecast(cfg, out, mode)
    _write_summaries(out / METRICS_FILE, summaries)
    return summaries


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfsforecast", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("generate", "integrate Mackey-Glass and write mg.csv"),
        ("train", "fit a disturbed fuzzy model from mg.csv"),
        ("forecast", "forecast the test split with the trained model"),
        ("eval", "run generate, train and all forecast modes"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="key=value config file (defaults if omitted)")
        sp.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        if name in ("train", "forecast"):
            sp.add_argument("--data", type=Path, help="series CSV (default: <out>/mg.csv)")
        if name == "forecast":
            sp.add_argument("--model", type=Path, help="model file (default: <out>/model.txt)")
            sp.add_argument("--mode", choices=MODES, default=ONE_STEP)
    return p


def main(argv=None) -> int:
    level = os.environ.get("DFS_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = config_mod.load(args.config) if args.config else RunConfig()
        if args.out is not None:
            cfg = cfg.with_out_dir(args.out)
        cfg.validate()
        out = Path(cfg.out_dir)
        if args.command == "generate":
            print(cmd_generate(cfg, out))
        elif args.command == "train":
            _, report = cmd_train(cfg, out, args.data)
            print(report.to_text(), end="")
        elif args.command == "forecast":
            for name, s in cmd_forecast(cfg, out, args.mode, args.model, args.data):
                print(f"{name}: {s}")
        else:
            for name, s in cmd_eval(cfg, out):
                print(f"{name}: {s}")
    except (ContractViolation, DeadRuleError, CoverageHoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (NumericalFailure, TrustRegionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
