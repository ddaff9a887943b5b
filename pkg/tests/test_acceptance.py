"""End-to-end acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL verdict (printed in the terminal summary)
before asserting, so a failing criterion still reports its measurement.
"""
import csv
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import qmc

from dfsforecast import cli
from dfsforecast import mackey_glass as mg
from dfsforecast.config import RunConfig
from dfsforecast.dfsla import DelayEmbeddedDataset, dfsla_train
from dfsforecast.disturbed import dfs_eval, dfs_taylor_coefficients, taylor_coefficients
from dfsforecast.fuzzy import (
    FuzzyPartition,
    enumerate_rules,
    firing_matrix,
    fs_eval,
    select_top_fired,
    zero_order_rules,
)
from dfsforecast.metrics import compare
from dfsforecast.numerics import finite_diff_derivative
from dfsforecast.taylor import convergence_order_probe

from _helpers import random_inputs, random_model, random_partition
from conftest import record

ORACLE = Path(__file__).parent / "data" / "oracle_one_step.csv"
FD_STEP = 1e-2


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    t0 = time.perf_counter()
    summaries = dict(cli.cmd_eval(RunConfig().with_out_dir(out), out))
    return out, summaries, time.perf_counter() - t0


def test_c01_derivative_fidelity(pipeline):
    _, summaries, elapsed = pipeline
    mses = [summaries[name].mse for name in ("x1", "x2", "x3")]
    ok = all(m <= 1e-4 for m in mses) and elapsed < 120.0
    detail = "MSE x'={:.3e} x''={:.3e} x'''={:.3e} (<= 1e-4), runtime {:.1f}s (< 120s)".format(*mses, elapsed)
    record(1, "derivative-series fidelity", ok, detail)
    assert ok, detail


def test_c02_one_step_rmse(pipeline):
    out, summaries, _ = pipeline
    oracle = read_rows(ORACLE)[1:]
    frozen = compare([float(r[2]) for r in oracle], [float(r[1]) for r in oracle]).rmse
    rmse = summaries["one-step"].rmse
    threshold = 2.0 * frozen
    ok = rmse <= 0.01 and rmse <= threshold
    detail = f"RMSE {rmse:.6e} (<= 0.01 and <= 2 x frozen {frozen:.6e} = {threshold:.6e})"
    record(2, "one-step forecast quality", ok, detail)
    assert ok, detail


def test_c03_recurrence_matches_finite_differences():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        model = random_model(rng, r=3, s=3)
        assert model.partition.n <= 3 and len(model.rules) <= 27
        for x in random_inputs(rng, model.partition, 10):
            values = dfs_taylor_coefficients(model, x)
            for i in range(4):
                est = finite_diff_derivative(lambda h: dfs_eval(model, x, h), 0.0, i, FD_STEP) / math.factorial(i)
                worst = max(worst, abs(est - values[i]) / abs(values[i]))
    ok = worst <= 1e-6
    detail = f"worst relative gap {worst:.3e} over 100 models x 10 points x orders 0-3 (<= 1e-6)"
    record(3, "recurrence/oracle equivalence", ok, detail)
    assert ok, detail


def test_c04_small_h_limit():
    rng = np.random.default_rng(4)
    worst, draws = 0.0, 0
    for _ in range(1000):
        model = random_model(rng)
        for x in random_inputs(rng, model.partition, 10):
            worst = max(worst, abs(dfs_eval(model, x, 1e-7) - dfs_eval(model, x, 0.0)))
            draws += 1
    ok = worst <= 1e-6 and draws == 10_000
    detail = f"max |g(x,1e-7) - g(x,0)| = {worst:.3e} over {draws} draws (<= 1e-6)"
    record(4, "limit consistency", ok, detail)
    assert ok, detail


def test_c05_partition_of_unity():
    rng = np.random.default_rng(5)
    parts = [FuzzyPartition.uniform([(0.40, 1.32)] * 4, [3] * 4)]
    parts += [random_partition(rng, n, count) for n, count in ((1, 2), (2, 5), (3, 4))]
    worst = 0.0
    for part in parts:
        lo = np.array([d[0] for d in part.domains])
        hi = np.array([d[1] for d in part.domains])
        X = lo + (hi - lo) * qmc.Sobol(d=part.n, seed=0).random(2**14)[:10_000]
        F = firing_matrix(part, enumerate_rules(part), X)
        worst = max(worst, float(np.max(np.abs(F.sum(axis=1) - 1.0))))
    ok = worst <= 1e-12
    detail = f"max |sum A_j - 1| = {worst:.3e} on 10^4 points x {len(parts)} partitions (<= 1e-12)"
    record(5, "partition of unity", ok, detail)
    assert ok, detail


def test_c06_center_exactness():
    rng = np.random.default_rng(6)
    worst_b, worst_e0 = 0.0, 0.0
    for n in (1, 2, 3):
        part = random_partition(rng, n)
        rules = enumerate_rules(part)
        centers = np.array([part.rule_center(j) for j in rules])
        X = np.vstack([random_inputs(rng, part, 200), centers])
        raw = np.column_stack([np.sin(X.sum(axis=1)), np.cos(X[:, 0]), X[:, -1] ** 2, np.exp(-X[:, 0])])
        data = DelayEmbeddedDataset(X, raw, np.arange(len(X), dtype=float))
        model, _ = dfsla_train(part, rules, data, 3, 3)
        values, _ = taylor_coefficients(model, centers)
        worst_b = max(worst_b, float(np.max(np.abs(values - model.b))))
        # with only the centers as data the zero-order residual vanishes too
        only = DelayEmbeddedDataset(centers, raw[-len(rules):], np.arange(len(rules), dtype=float))
        _, report = dfsla_train(part, rules, only, 3, 3)
        worst_e0 = max(worst_e0, report.residual_norms[0])
    ok = worst_b <= 1e-12 and worst_e0 <= 1e-12
    detail = f"max |values - b| at centers {worst_b:.3e}, ||E_0|| on center data {worst_e0:.3e} (<= 1e-12)"
    record(6, "center exactness", ok, detail)
    assert ok, detail


def test_c07_taylor_order():
    def coeffs(x):
        return [(-1.0) ** (i + 1) * x / math.factorial(i) for i in range(4)]

    slopes = {nu: convergence_order_probe(coeffs, lambda x0, h: x0 * math.exp(-h), nu) for nu in (1, 2, 3)}
    ok = all(abs(s - (nu + 1)) <= 0.2 for nu, s in slopes.items())
    detail = ", ".join(f"nu={nu}: {s:.3f}" for nu, s in slopes.items()) + " (nu+1 +/- 0.2)"
    record(7, "Taylor-method order", ok, detail)
    assert ok, detail


def test_c08_generator():
    decay = mg.integrate(mg.MgParams(a=0.0, t_end=10.0))
    decay_err = abs(decay.x[-1] - 1.2 * math.exp(-1.0))
    x = mg.generate(mg.MgParams(), 1.0, order=1).x[:1000]
    lo, hi = float(x.min()), float(x.max())
    within = 0.2 <= lo and hi <= 1.4
    contains = lo <= 0.40 and hi >= 1.32
    ok = decay_err <= 1e-9 and within and contains
    detail = (
        f"decay error {decay_err:.2e} (<= 1e-9); range of 1000 unit samples [{lo:.4f}, {hi:.4f}] "
        f"within [0.2, 1.4]: {within}; contains [0.40, 1.32]: {contains}"
    )
    record(8, "MG generator", ok, detail)
    assert ok, detail


def test_c09_zero_order_degeneration():
    series = mg.generate(mg.MgParams(), 1.0, order=1)
    train, test = mg.build_embedding(series)
    part = FuzzyPartition.uniform([(0.40, 1.32)] * 4, [3] * 4)
    rules = select_top_fired(part, enumerate_rules(part), train.inputs, 61)
    model, _ = dfsla_train(part, rules, train, 0, 0)
    fs = zero_order_rules(part, [(r.index, r.b[0]) for r in model.rules])
    rng = np.random.default_rng(9)
    pool = np.vstack([train.inputs, test.inputs])
    X = pool[rng.integers(0, len(pool), 10_000)] + rng.normal(scale=0.01, size=(10_000, 4))
    worst = max(abs(dfs_eval(model, x, 0.0) - fs_eval(fs, part, x)) for x in X)
    ok = worst <= 1e-14
    detail = f"max |dfs_eval(x,0) - fs_eval(x)| = {worst:.3e} on 10^4 points (<= 1e-14)"
    record(9, "zero-order degeneration", ok, detail)
    assert ok, detail


def test_c10_determinism(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert cli.main(["eval", "--out", str(out)]) == 0
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    same = [n for n in names if (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()]
    model_same = (outs[0] / "model.txt").read_bytes() == (outs[1] / "model.txt").read_bytes()
    ok = len(names) >= 8 and same == names and model_same
    detail = f"{len(same)}/{len(names)} CSVs byte-identical, model file identical: {model_same}"
    record(10, "full-pipeline determinism", ok, detail)
    assert ok, detail
