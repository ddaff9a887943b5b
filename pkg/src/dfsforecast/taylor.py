"""Taylor-series stepping driven by a disturbed fuzzy model of the vector field.

The model approximates the time derivative ``x'`` as a function of the lag
vector, and its normalized Taylor coefficients in the disturbance ``h``
play the role of ``x^(i+1) / i!``. One step therefore advances by the
integral of the truncated derivative polynomial over ``[0, h]``:

    x_{k+1} = x_k + sum_{i<nu} values_i * h^(i+1) / (i+1)
            = x_k + sum_{i<nu} x^(i+1) * h^(i+1) / (i+1)!
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .disturbed import DfsModel, taylor_coefficients
from .errors import ContractViolation, NumericalFailure

log = logging.getLogger(__name__)

ONE_STEP = "one-step"
FREE_RUN = "free-run"


@dataclass(frozen=True)
class TaylorStepConfig:
    nu: int
    h: float

    def __post_init__(self):
        if self.nu < 1:
            raise ContractViolation(f"nu must be >= 1, got {self.nu}")
        if not self.h > 0:
            raise ContractViolation(f"h must be positive, got {self.h}")

    def check_model(self, model: DfsModel) -> None:
        if self.nu > model.order_r + 1:
            raise ContractViolation(f"nu={self.nu} exceeds model order r+1={model.order_r + 1}")


def taylor_step(coeffs: Sequence[float], x_k: float, cfg: TaylorStepConfig) -> float:
    if len(coeffs) < cfg.nu:
        raise ContractViolation(f"need {cfg.nu} coefficients, got {len(coeffs)}")
    h = cfg.h
    incr = 0.0
    for i in reversed(range(cfg.nu)):
        incr = incr * h + float(coeffs[i]) / (i + 1)
    return x_k + h * incr


@dataclass
class ForecastResult:
    times: np.ndarray
    predicted: np.ndarray
    mode: str
    truth: np.ndarray | None = None
    fallback_steps: list[int] = field(default_factory=list)

    @property
    def residual(self) -> np.ndarray:
        if self.truth is None:
            raise ContractViolation("no truth attached to this forecast")
        return self.truth - self.predicted


def lag_offsets(lags: Sequence[float], h: float) -> list[int]:
    """Lags expressed as whole numbers of steps ``h``."""
    out = []
    for lag in lags:
        k = round(lag / h)
        if k < 0 or not math.isclose(k * h, lag, rel_tol=0.0, abs_tol=1e-9 * max(1.0, abs(lag))):
            raise ContractViolation(f"lag {lag} is not a nonnegative multiple of h={h}")
        out.append(k)
    return out


def forecast(
    model: DfsModel,
    history: Sequence[float],
    cfg: TaylorStepConfig,
    lags: Sequence[float],
    steps: int,
    *,
    mode: str = FREE_RUN,
    truth: Sequence[float] | None = None,
    t0: float = 0.0,
) -> ForecastResult:
    """Iterate Taylor steps from the end of ``history``.

    ``history`` holds the series on the ``h``-grid, ending at time ``t0``.
    ``truth[k]`` is the true value at ``t0 + (k + 1) h``. In free-run mode
    predictions are fed back into the lag buffer; in one-step mode the
    buffer is rebuilt from ``truth`` before every step.
    """
    cfg.check_model(model)
    if mode not in (ONE_STEP, FREE_RUN):
        raise ContractViolation(f"unknown forecast mode {mode!r}")
    offsets = lag_offsets(lags, cfg.h)
    if len(offsets) != model.partition.n:
        raise ContractViolation(f"{len(offsets)} lags for a {model.partition.n}-input model")
    history = [float(v) for v in history]
    if len(history) < max(offsets) + 1:
        raise ContractViolation(f"history needs at least {max(offsets) + 1} points, got {len(history)}")
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        if truth.shape[0] < steps:
            raise ContractViolation(f"truth has {truth.shape[0]} points, {steps} steps requested")
    if mode == ONE_STEP and truth is None:
        raise ContractViolation("one-step mode needs the true series")

    buffer = list(history)
    predicted = np.empty(steps)
    fallbacks = []
    for k in range(steps):
        x_in = np.array([buffer[-1 - off] for off in offsets])
        coeffs, holes = taylor_coefficients(model, x_in[None, :], fallback=True)
        if holes[0]:
            fallbacks.append(k)
            log.info("coverage hole at step %d, x=%s; using nearest rule", k, x_in)
        x_next = taylor_step(coeffs[0], buffer[-1], cfg)
        if not math.isfinite(x_next):
            raise NumericalFailure(f"non-finite forecast state at step {k}", step=k, time=t0 + (k + 1) * cfg.h)
        predicted[k] = x_next
        buffer.append(truth[k] if mode == ONE_STEP else x_next)
    times = t0 + cfg.h * np.arange(1, steps + 1)
    return ForecastResult(
        times=times,
        predicted=predicted,
        mode=mode,
        truth=None if truth is None else truth[:steps].copy(),
        fallback_steps=fallbacks,
    )


PROBE_STEPS = (0.1, 0.05, 0.025, 0.0125)


def convergence_order_probe(
    coeff_source: Callable[[float], Sequence[float]],
    exact_solution: Callable[[float, float], float],
    nu: int,
    x0: float = 1.0,
    hs: Sequence[float] = PROBE_STEPS,
) -> float | None:
    """Fitted slope of log(one-step error) against log(h).

    ``coeff_source(x)`` returns normalized coefficients ``x^(i+1)/i!`` of
    the probe ODE at state ``x``; ``exact_solution(x0, h)`` is the true
    state after time ``h``. Returns ``None`` when every error is zero
    (e.g. a constant solution), where no slope is defined.
    """
    errors = []
    for h in hs:
        step = taylor_step(coeff_source(x0), x0, TaylorStepConfig(nu=nu, h=h))
        errors.append(abs(step - exact_solution(x0, h)))
    errors = np.array(errors)
    if np.all(errors == 0.0):
        return None
    if np.any(errors == 0.0):
        raise NumericalFailure("one-step error vanished for some but not all step sizes")
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)
