"""Mackey-Glass benchmark series and its analytic time derivatives.

    x'(t) = a x(t - tau) / (1 + x(t - tau)^c) - b x(t),   x(t) = 0 for t < 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dfsla import DelayEmbeddedDataset
from .errors import ContractViolation, NumericalFailure

CSV_HEADER = ("t", "x", "x1", "x2", "x3")


@dataclass(frozen=True)
class MgParams:
    a: float = 0.2
    b: float = 0.1
    c: float = 10.0
    tau: float = 17.0
    dt: float = 0.1
    x0: float = 1.2
    t_end: float = 1117.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractViolation(f"dt must be positive, got {self.dt}")
        if self.tau < 0:
            raise ContractViolation(f"tau must be nonnegative, got {self.tau}")
        self.delay_steps(self.dt)
        if self.t_end < 0:
            raise ContractViolation(f"t_end must be nonnegative, got {self.t_end}")

    def delay_steps(self, spacing: float) -> int:
        """``tau / spacing`` as an integer; raises if the delay is off-grid."""
        d = round(self.tau / spacing)
        if not math.isclose(d * spacing, self.tau, rel_tol=0.0, abs_tol=1e-9 * max(1.0, self.tau)):
            raise ContractViolation(f"tau={self.tau} is not an integer multiple of {spacing}")
        return int(d)


@dataclass(frozen=True)
class MgSeries:
    times: np.ndarray
    x: np.ndarray
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None
    x3: np.ndarray | None = None
    x4: np.ndarray | None = None

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def derivatives(self) -> list[np.ndarray]:
        out = []
        for col in (self.x1, self.x2, self.x3, self.x4):
            if col is None:
                break
            out.append(col)
        return out

    def index_of(self, t: float) -> int:
        k = round(t / self.spacing)
        if not 0 <= k < len(self.times) or not math.isclose(self.times[k], t, abs_tol=1e-9 * max(1.0, abs(t))):
            raise ContractViolation(f"time {t} is not on the series grid")
        return int(k)


def mg_rhs(x_now, x_delayed, params: MgParams):
    den = 1.0 + np.power(x_delayed, params.c)
    if np.any(~np.isfinite(den)) or np.any(np.abs(den) < 1e-12):
        raise NumericalFailure(f"Mackey-Glass denominator vanishes at x(t-tau)={x_delayed}")
    return params.a * x_delayed / den - params.b * x_now


def integrate(params: MgParams) -> MgSeries:
    """Classic RK4 on the ``dt`` grid.

    Delayed values at half steps come from cubic Hermite interpolation
    between the two neighbouring grid points, using the slopes already
    computed there; linear interpolation would cap the scheme at second
    order. Delayed arguments before ``t = 0`` are exactly zero, including
    at the end of the step that reaches ``t = tau``. With ``tau = 0`` the delayed argument is the stage state itself.
    """
    dt = params.dt
    n = int(round(params.t_end / dt))
    d = params.delay_steps(dt)
    x = [0.0] * (n + 1)
    slope = [0.0] * (n + 1)  # x'(t_k), filled as each step's first stage
    x[0] = float(params.x0)
    a, b, c = params.a, params.b, params.c

    def rhs(xn, xd):
        den = 1.0 + xd**c
        if abs(den) < 1e-12:
            raise NumericalFailure(f"Mackey-Glass denominator vanishes at x(t-tau)={xd}")
        return a * xd / den - b * xn

    def hist(k):
        return x[k] if k >= 0 else 0.0

    for k in range(n):
        xk = x[k]
        if d == 0:
            k1 = rhs(xk, xk)
            s2 = xk + 0.5 * dt * k1
            k2 = rhs(s2, s2)
            s3 = xk + 0.5 * dt * k2
            k3 = rhs(s3, s3)
            s4 = xk + dt * k3
            k4 = rhs(s4, s4)
        else:
            j = k - d
            lo = hist(j)
            k1 = rhs(xk, lo)
            slope[k] = k1
            if j < 0:
                # the delayed argument stays in the zero history up to t_{k+1}
                mid = hi = 0.0
            else:
                hi = x[j + 1]
                # x' jumps at t = tau, so the interval ending there needs the left slope
                right = rhs(hi, 0.0) if j + 1 == d else slope[j + 1]
                mid = 0.5 * (lo + hi) + dt / 8.0 * (slope[j] - right)
            k2 = rhs(xk + 0.5 * dt * k1, mid)
            k3 = rhs(xk + 0.5 * dt * k2, mid)
            k4 = rhs(xk + dt * k3, hi)
        nxt = xk + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(nxt):
            raise NumericalFailure(f"non-finite state at t={(k + 1) * dt}", step=k + 1, time=(k + 1) * dt)
        x[k + 1] = nxt
    times = dt * np.arange(n + 1)
    return MgSeries(times=times, x=np.array(x))


def _pow(coef: float, u: np.ndarray, p: float) -> np.ndarray:
    if coef == 0.0:
        return np.zeros_like(u)
    return coef * np.power(u, p)


def delayed_partials(u, params: MgParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First three derivatives of ``phi(u) = a u / (1 + u^c)``."""
    u = np.asarray(u, dtype=float)
    a, c = params.a, params.c
    w = np.power(u, c)
    den = 1.0 + w
    d1 = a * (1.0 + (1.0 - c) * w) / den**2
    d2 = -a * c * (_pow(1.0 + c, u, c - 1.0) + _pow(1.0 - c, u, 2.0 * c - 1.0)) / den**3
    d3 = (
        -a
        * c
        * (_pow(c * c - 1.0, u, c - 2.0) - _pow(4.0 * c * c + 2.0, u, 2.0 * c - 2.0) + _pow(c * c - 1.0, u, 3.0 * c - 2.0))
        / den**4
    )
    return d1, d2, d3


def _delay(col: np.ndarray, d: int) -> np.ndarray:
    if d == 0:
        return col.copy()
    out = np.zeros_like(col)
    out[d:] = col[:-d]
    return out


def fourth_derivative(x, x1, x2, x3, params: MgParams, spacing: float) -> np.ndarray:
    d = params.delay_steps(spacing)
    if d == 0:
        raise ContractViolation("delay recursions need tau > 0")
    xd = _delay(np.asarray(x, dtype=float), d)
    x1d, x2d, x3d = (_delay(np.asarray(v, dtype=float), d) for v in (x1, x2, x3))
    f1, f2, f3 = delayed_partials(xd, params)
    return -params.b * np.asarray(x3) + f3 * x1d**3 + 3.0 * f2 * x1d * x2d + f1 * x3d


def derivative_series(x, params: MgParams, spacing: float, order: int = 3) -> list[np.ndarray]:
    """Analytic derivatives ``x', ..., x^(order)`` on a grid starting at ``t = 0``.

    Uses the chain rule through the delayed argument, e.g.

        x'' = -b x' + phi'(x(t-tau)) x'(t-tau)

    so the series must be sampled at a spacing that divides ``tau``.
    """
    if not 1 <= order <= 4:
        raise ContractViolation(f"order must be in 1..4, got {order}")
    x = np.asarray(x, dtype=float)
    d = params.delay_steps(spacing)
    if d == 0:
        raise ContractViolation("delay recursions need tau > 0")
    b = params.b
    xd = _delay(x, d)
    f1, f2, _ = delayed_partials(xd, params)
    x1 = mg_rhs(x, xd, params)
    out = [x1]
    if order >= 2:
        x1d = _delay(x1, d)
        x2 = -b * x1 + f1 * x1d
        out.append(x2)
    if order >= 3:
        x2d = _delay(x2, d)
        x3 = -b * x2 + f2 * x1d**2 + f1 * x2d
        out.append(x3)
    if order >= 4:
        out.append(fourth_derivative(x, x1, x2, x3, params, spacing))
    return out


def sample(series: MgSeries, spacing: float) -> MgSeries:
    """Subsample an integrated series (x only) at a coarser grid spacing."""
    stride = round(spacing / series.spacing)
    if stride < 1 or not math.isclose(stride * series.spacing, spacing, abs_tol=1e-9 * spacing):
        raise ContractViolation(f"spacing {spacing} is not a multiple of {series.spacing}")
    idx = np.arange(0, len(series.times), stride)
    return MgSeries(times=spacing * np.arange(len(idx)), x=series.x[idx])


def generate(params: MgParams, spacing: float = 1.0, order: int = 4) -> MgSeries:
    """Integrate, sample at ``spacing`` and attach derivative columns."""
    coarse = sample(integrate(params), spacing)
    ders = derivative_series(coarse.x, params, spacing, order)
    cols = dict(zip(("x1", "x2", "x3", "x4"), ders))
    return MgSeries(times=coarse.times, x=coarse.x, **cols)


def build_embedding(
    series: MgSeries,
    lags: Sequence[float] = (18.0, 12.0, 6.0, 0.0),
    *,
    start: float = 118.0,
    n_train: int = 500,
    n_test: int = 500,
    spacing: float = 1.0,
    horizon: float = 1.0,
) -> tuple[DelayEmbeddedDataset, DelayEmbeddedDataset]:
    """Lag-vector rows at base times ``start, start + spacing, ...``.

    Row inputs are ``(x(t - lag) for lag in lags)``; targets are the
    available derivative columns ``(x'(t), x''(t), ...)``. The first
    ``n_train`` rows form the training set and the next ``n_test`` the test
    set, in temporal order.
    """
    ders = series.derivatives
    if not ders:
        raise ContractViolation("series has no derivative columns")
    if any(lag < 0 for lag in lags):
        raise ContractViolation("lags must be nonnegative")
    n_rows = n_train + n_test
    if n_rows < 1:
        raise ContractViolation("need at least one row")
    if start - max(lags) < series.times[0] - 1e-9:
        raise ContractViolation(f"start={start} leaves no room for lag {max(lags)}")
    last = start + (n_rows - 1) * spacing
    if last > series.times[-1] + 1e-9:
        raise ContractViolation(
            f"series ends at t={series.times[-1]:g}; {n_rows} rows from t={start:g} need t_end >= {last:g}"
        )
    base = np.array([series.index_of(start + k * spacing) for k in range(n_rows)])
    lag_steps = [round(lag / series.spacing) for lag in lags]
    X = np.stack([series.x[base - s] for s in lag_steps], axis=1)
    T = np.stack([col[base] for col in ders], axis=1)
    t = series.times[base]
    lags = tuple(float(v) for v in lags)

    def part(sl):
        return DelayEmbeddedDataset(X[sl], T[sl], t[sl], lags, horizon)

    return part(slice(0, n_train)), part(slice(n_train, n_rows))


def write_csv(series: MgSeries, path) -> None:
    cols = [series.times, series.x, series.x1, series.x2, series.x3]
    if any(c is None for c in cols):
        raise ContractViolation("series needs x1, x2, x3 for CSV output")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])


def read_csv(path) -> MgSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ContractViolation(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    if data.shape[0] < 2:
        raise ContractViolation(f"{path}: need at least two rows")
    return MgSeries(times=data[:, 0], x=data[:, 1], x1=data[:, 2], x2=data[:, 3], x3=data[:, 4])


def with_fourth_derivative(series: MgSeries, params: MgParams) -> MgSeries:
    x4 = fourth_derivative(series.x, series.x1, series.x2, series.x3, params, series.spacing)
    return MgSeries(series.times, series.x, series.x1, series.x2, series.x3, x4)
