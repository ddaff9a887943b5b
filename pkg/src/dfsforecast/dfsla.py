"""Least-squares identification of a disturbed fuzzy system from derivative data.

Training runs in two stages. First the consequent coefficients ``b_i`` of
every order are fitted so that ``sum_j p_j(x) b_i^j`` matches the
normalized target ``f^(i)(x) / i!``. Then, for ``i = 1..min(r, s)`` in
turn, the denominator coefficients ``a_i`` are chosen by linear least
squares to minimize the order-``i`` residual of the Taylor recurrence.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .disturbed import DfsModel, DisturbedRule, taylor_coefficients
from .errors import ContractViolation, CoverageHoleError, DeadRuleError
from .fuzzy import FuzzyPartition, RuleIndex, firing_matrix, normalize_rows
from .numerics import solve_least_squares

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DelayEmbeddedDataset:
    """Lag-vector inputs with raw derivative targets.

    ``targets[k, i]`` is the i-th derivative of the modelled function at
    ``inputs[k]`` (not divided by ``i!``).
    """

    inputs: np.ndarray
    targets: np.ndarray
    times: np.ndarray
    lags: tuple[float, ...] = ()
    horizon: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        T = np.asarray(self.targets, dtype=float)
        if T.ndim == 1:
            T = T[:, None]
        t = np.asarray(self.times, dtype=float)
        if X.shape[0] == 0:
            raise ContractViolation("dataset has no rows")
        if T.shape[0] != X.shape[0] or t.shape != (X.shape[0],):
            raise ContractViolation("inputs, targets and times must have the same number of rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(T))):
            raise ContractViolation("dataset must be finite")
        if self.lags and len(self.lags) != X.shape[1]:
            raise ContractViolation("one lag per input column expected")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", T)
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def normalized_targets(self, order_r: int) -> np.ndarray:
        if self.targets.shape[1] < order_r + 1:
            raise ContractViolation(
                f"order r={order_r} needs {order_r + 1} target columns, dataset has {self.targets.shape[1]}"
            )
        scale = np.array([math.factorial(i) for i in range(order_r + 1)], dtype=float)
        return self.targets[:, : order_r + 1] / scale


@dataclass
class OrderFit:
    order: int
    residual_before: float
    residual_after: float
    rank: int
    unknowns: int


@dataclass
class TrainingReport:
    residual_norms: list[float]
    rule_count: int
    b_ranks: list[int]
    order_fits: list[OrderFit] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"rules={self.rule_count}"]
        for i, norm in enumerate(self.residual_norms):
            lines.append(f"residual_norm.{i}={norm:.17g}")
        for i, rank in enumerate(self.b_ranks):
            lines.append(f"b_rank.{i}={rank}")
        for fit in self.order_fits:
            lines.append(
                f"a_fit.{fit.order}=before:{fit.residual_before:.17g} after:{fit.residual_after:.17g} "
                f"rank:{fit.rank}/{fit.unknowns}"
            )
        lines += [f"warning={w}" for w in self.warnings]
        return "\n".join(lines) + "\n"


def _normalized_firing(partition: FuzzyPartition, rules: Sequence[RuleIndex], X) -> np.ndarray:
    F = firing_matrix(partition, rules, X)
    P, holes = normalize_rows(F)
    if holes.any():
        raise CoverageHoleError(np.asarray(X)[np.argmax(holes)])
    dead = [rules[k] for k in np.flatnonzero(F.max(axis=0) <= 0.0)]
    if dead:
        raise DeadRuleError(dead)
    return P


def assign_b_coefficients(
    partition: FuzzyPartition,
    rules: Sequence[RuleIndex],
    data: DelayEmbeddedDataset,
    order_r: int,
    *,
    order_s: int | None = None,
    ridge: float = 0.0,
) -> tuple[list[DisturbedRule], list[int]]:
    """Fit ``b_0..b_r`` for all rules; ``a`` is set to ``(1, 0, ..., 0)``.

    Returns the rules and the rank of the firing design matrix per order.
    """
    rules = [tuple(j) for j in rules]
    order_s = order_r if order_s is None else order_s
    P = _normalized_firing(partition, rules, data.inputs)
    T = data.normalized_targets(order_r)
    B = np.zeros((len(rules), order_r + 1))
    ranks = []
    for i in range(order_r + 1):
        sol = solve_least_squares(P, T[:, i], ridge=ridge)
        B[:, i] = sol.coefficients
        ranks.append(sol.rank)
    a0 = (1.0,) + (0.0,) * order_s
    out = [DisturbedRule(j, tuple(partition.rule_center(j)), a0, tuple(B[k])) for k, j in enumerate(rules)]
    return out, ranks


def residual_e(model: DfsModel, data: DelayEmbeddedDataset, order: int) -> np.ndarray:
    """Order-``order`` residual of the normalized Taylor coefficients, per row.

    ``E_i = sum_j p_j (b_i^j - T_i) + sum_{m=1..i} sum_j p_j a_m^j (b_{i-m}^j - values_{i-m})``
    with ``T_i = f^(i) / i!``; this is exactly ``values_i - T_i``.
    """
    if not 0 <= order <= model.order_r:
        raise ContractViolation(f"order {order} outside 0..{model.order_r}")
    values, _ = taylor_coefficients(model, data.inputs)
    return values[:, order] - data.normalized_targets(model.order_r)[:, order]


def _with_a_column(model: DfsModel, order: int, column) -> DfsModel:
    a = model.a.copy()
    a[:, order] = column
    return DfsModel.from_arrays(model.partition, model.indices, a, model.b)


def solve_a_order(
    model: DfsModel, data: DelayEmbeddedDataset, order: int, *, ridge: float = 0.0
) -> tuple[DfsModel, OrderFit]:
    """Least-squares update of ``a_order`` for every rule; lower orders stay fixed.

    The order-i residual is affine in ``a_i`` with design matrix
    ``D[k, j] = p_j(x_k) (b_0^j - values_0(x_k))``. Every row of ``D``
    sums to zero, so the all-ones direction is always in its null space and
    the minimum-norm solution is returned.
    """
    if not 1 <= order <= model.order_s:
        raise ContractViolation(f"a-order {order} outside 1..{model.order_s}")
    before = float(np.linalg.norm(residual_e(model, data, order)))
    base = _with_a_column(model, order, 0.0)
    excluded = residual_e(base, data, order)
    P, _ = normalize_rows(base.firing(data.inputs))
    values0 = P @ base.b[:, 0]
    D = P * (base.b[None, :, 0] - values0[:, None])
    sol = solve_least_squares(D, -excluded, ridge=ridge)
    updated = _with_a_column(base, order, sol.coefficients)
    after = float(np.linalg.norm(residual_e(updated, data, order)))
    return updated, OrderFit(order, before, after, sol.rank, D.shape[1])


def dfsla_train(
    partition: FuzzyPartition,
    rules: Sequence[RuleIndex],
    data: DelayEmbeddedDataset,
    r: int,
    s: int,
    *,
    ridge: float = 0.0,
) -> tuple[DfsModel, TrainingReport]:
    if r < 0 or s < 0 or s > r:
        raise ContractViolation(f"need 0 <= s <= r, got r={r}, s={s}")
    fitted, ranks = assign_b_coefficients(partition, rules, data, r, order_s=s, ridge=ridge)
    model = DfsModel(partition, tuple(fitted), r, s)
    report = TrainingReport(residual_norms=[], rule_count=len(fitted), b_ranks=ranks)
    for rank_i, rank in enumerate(ranks):
        if rank < len(fitted):
            report.warnings.append(f"b-order {rank_i} design matrix rank {rank} < {len(fitted)} rules")
    for i in range(1, min(r, s) + 1):
        model, fit = solve_a_order(model, data, i, ridge=ridge)
        report.order_fits.append(fit)
        if fit.rank < fit.unknowns - 1:
            report.warnings.append(f"a-order {i} design matrix rank {fit.rank} < {fit.unknowns - 1}")
        log.debug("a-order %d: residual %.3e -> %.3e", i, fit.residual_before, fit.residual_after)
    assert np.all(model.a[:, 0] == 1.0)
    report.residual_norms = [float(np.linalg.norm(residual_e(model, data, i))) for i in range(r + 1)]
    for w in report.warnings:
        log.warning(w)
    return model, report
