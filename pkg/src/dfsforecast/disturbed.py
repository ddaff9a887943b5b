"""Disturbed fuzzy system: a rule base whose output is a rational function of h.

Each rule carries a denominator-weight polynomial ``Q_j(h) = sum a_d h^d``
with ``a_0 = 1`` and a consequent polynomial ``P_j(h) = sum b_d h^d`` with
``b_0 = theta_j``. The system output is

    g(x, h) = sum_j A_j(x) Q_j(h) P_j(h) / sum_j A_j(x) Q_j(h).

Derivatives in ``h`` at ``h = 0`` are exposed as *normalized* Taylor
coefficients ``g^(i)(x) / i!``; at a rule center they equal ``b^j_i``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ContractViolation, CoverageHoleError, TrustRegionError
from .fuzzy import FuzzyPartition, RuleIndex, firing_matrix, normalize_rows

TRUST_RTOL = 1e-9


@dataclass(frozen=True)
class DisturbedRule:
    index: RuleIndex
    center: tuple[float, ...]
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        if not self.a or self.a[0] != 1.0:
            raise ContractViolation(f"rule {self.index}: a[0] must be exactly 1")
        if not self.b:
            raise ContractViolation(f"rule {self.index}: b must be nonempty")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise ContractViolation(f"rule {self.index}: coefficients must be finite")

    @property
    def theta(self) -> float:
        return self.b[0]


@dataclass(frozen=True)
class DfsModel:
    partition: FuzzyPartition
    rules: tuple[DisturbedRule, ...]
    order_r: int
    order_s: int
    _a: np.ndarray = field(init=False, repr=False, compare=False)
    _b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise ContractViolation("a model needs at least one rule")
        for rule in self.rules:
            if len(rule.a) != self.order_s + 1 or len(rule.b) != self.order_r + 1:
                raise ContractViolation(
                    f"rule {rule.index}: expected {self.order_s + 1} a-coefficients and "
                    f"{self.order_r + 1} b-coefficients"
                )
            if len(rule.index) != self.partition.n:
                raise ContractViolation(f"rule {rule.index} does not match a {self.partition.n}-D partition")
        A = np.array([r.a for r in self.rules], dtype=float)
        B = np.array([r.b for r in self.rules], dtype=float)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "_a", A)
        object.__setattr__(self, "_b", B)

    @classmethod
    def from_arrays(cls, partition, indices, a, b) -> "DfsModel":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        rules = [
            DisturbedRule(tuple(j), tuple(partition.rule_center(j)), tuple(a[k]), tuple(b[k]))
            for k, j in enumerate(indices)
        ]
        return cls(partition, tuple(rules), b.shape[1] - 1, a.shape[1] - 1)

    @property
    def indices(self) -> list[RuleIndex]:
        return [r.index for r in self.rules]

    @property
    def a(self) -> np.ndarray:
        return self._a

    @property
    def b(self) -> np.ndarray:
        return self._b

    @property
    def centers(self) -> np.ndarray:
        return np.array([r.center for r in self.rules])

    @property
    def nu(self) -> int:
        return self.order_r

    def firing(self, X) -> np.ndarray:
        return firing_matrix(self.partition, self.indices, X)


def poly_eval(coeffs: Sequence[float], h: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * h + c
    return acc


def dfs_eval(model: DfsModel, x, h: float) -> float:
    x = np.asarray(x, dtype=float)
    F = model.firing(x[None, :])[0]
    total = F.sum()
    if total <= 0.0:
        raise CoverageHoleError(x)
    Q = np.array([poly_eval(r.a, h) for r in model.rules])
    P = np.array([poly_eval(r.b, h) for r in model.rules])
    den = F @ Q
    if abs(den) < TRUST_RTOL * total:
        raise TrustRegionError(x, h)
    return float((F * Q) @ P / den)


def taylor_recurrence(P: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalized Taylor coefficients for normalized firing rows ``P``.

    Matching powers of h in ``numerator = g * denominator`` gives

        values_i = P @ c_i - sum_{k<i} (P @ a_{i-k}) values_k,
        c_i = sum_{k<=i} a_{i-k} b_k,

    evaluated here in the regrouped form

        values_i = P @ b_i + sum_{m=1..i} (P * (b_{i-m} - values_{i-m})) @ a_m

    which is algebraically identical and returns ``b^j`` exactly at a rule
    center. ``a_m`` is zero beyond the model's s.
    """
    r = b.shape[1] - 1
    s = a.shape[1] - 1
    values = np.zeros((P.shape[0], r + 1))
    for i in range(r + 1):
        acc = P @ b[:, i]
        for m in range(1, min(i, s) + 1):
            acc = acc + (P * (b[None, :, i - m] - values[:, i - m, None])) @ a[:, m]
        values[:, i] = acc
    return values


def taylor_coefficients(model: DfsModel, X, *, fallback: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Batch normalized Taylor coefficients, shape (rows, r+1), plus a hole mask.

    Rows where no rule fires raise :class:`CoverageHoleError` unless
    ``fallback`` is set; then they take the consequent polynomial of the
    rule whose center is nearest (Euclidean).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P, holes = normalize_rows(model.firing(X))
    if holes.any() and not fallback:
        raise CoverageHoleError(X[np.argmax(holes)])
    values = taylor_recurrence(P, model.a, model.b)
    if holes.any():
        d = np.linalg.norm(X[holes][:, None, :] - model.centers[None, :, :], axis=2)
        values[holes] = model.b[np.argmin(d, axis=1)]
    return values, holes


def dfs_taylor_coefficients(model: DfsModel, x, *, fallback: bool = False) -> np.ndarray:
    values, _ = taylor_coefficients(model, np.asarray(x, dtype=float)[None, :], fallback=fallback)
    return values[0]


# -- text serialization ------------------------------------------------------
#
# Header:  DFS <n> <r> <s> <N> | <centers of dim 0> | ... | <centers of dim n-1>
# Rules:   <j_1 ... j_n> | <a_0 ... a_s> | <b_0 ... b_r>
# Floats are written with 17 significant digits; indices are 0-based.

def _fmt(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in values)


def dumps_model(model: DfsModel) -> str:
    out = io.StringIO()
    n = model.partition.n
    head = [f"DFS {n} {model.order_r} {model.order_s} {len(model.rules)}"]
    head += [_fmt(c) for c in model.partition.centers]
    out.write(" | ".join(head) + "\n")
    for rule in model.rules:
        idx = " ".join(str(j) for j in rule.index)
        out.write(f"{idx} | {_fmt(rule.a)} | {_fmt(rule.b)}\n")
    return out.getvalue()


def loads_model(text: str) -> DfsModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ContractViolation("empty model file")
    head = [part.split() for part in lines[0].split("|")]
    if not head[0] or head[0][0] != "DFS" or len(head[0]) != 5:
        raise ContractViolation("model header must start with 'DFS n r s N'")
    n, r, s, N = (int(v) for v in head[0][1:])
    if len(head) != n + 1:
        raise ContractViolation(f"header declares {n} dimensions but lists {len(head) - 1} center sets")
    partition = FuzzyPartition.from_centers([[float(v) for v in c] for c in head[1:]])
    body = lines[1:]
    if len(body) != N:
        raise ContractViolation(f"header declares {N} rules, file has {len(body)}")
    indices, a, b = [], [], []
    for line in body:
        fields = [part.split() for part in line.split("|")]
        if len(fields) != 3:
            raise ContractViolation(f"malformed rule line: {line!r}")
        indices.append(tuple(int(v) for v in fields[0]))
        a.append([float(v) for v in fields[1]])
        b.append([float(v) for v in fields[2]])
    model = DfsModel.from_arrays(partition, indices, np.array(a).reshape(N, s + 1), np.array(b).reshape(N, r + 1))
    return model


def save_model(model: DfsModel, path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path) -> DfsModel:
    return loads_model(Path(path).read_text())
