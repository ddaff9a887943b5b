"""Triangular fuzzy partitions, rule firing and the zero-order fuzzy system.

Rule indices are tuples of 0-based membership positions, one per input
dimension. The T-norm is the arithmetic product and the fuzzifier is a
singleton.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation, CoverageHoleError

RuleIndex = tuple[int, ...]


@dataclass(frozen=True)
class TriangularMembership:
    """Hat function with peak 1 at ``center`` and zeros at ``left``/``right``.

    A shoulder holds the value at 1 on that side of the center instead of
    decaying, which is how boundary sets of a partition behave outside the
    domain.
    """

    left: float
    center: float
    right: float
    left_shoulder: bool = False
    right_shoulder: bool = False

    def __post_init__(self):
        if not (self.left <= self.center <= self.right):
            raise ContractViolation(f"need left <= center <= right, got {self.left}, {self.center}, {self.right}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        below = x < self.center
        above = x > self.center
        out[x == self.center] = 1.0
        if self.left_shoulder:
            out[below] = 1.0
        elif self.center > self.left:
            out[below] = np.maximum((x[below] - self.left) / (self.center - self.left), 0.0)
        if self.right_shoulder:
            out[above] = 1.0
        elif self.right > self.center:
            out[above] = np.maximum((self.right - x[above]) / (self.right - self.center), 0.0)
        return out

    def slope_bound(self) -> float:
        """Lipschitz constant of the membership function."""
        slopes = [0.0]
        if not self.left_shoulder and self.center > self.left:
            slopes.append(1.0 / (self.center - self.left))
        if not self.right_shoulder and self.right > self.center:
            slopes.append(1.0 / (self.right - self.center))
        return max(slopes)


def membership_eval(mf: TriangularMembership, x: float) -> float:
    return float(mf(np.array([x]))[0])


def _sets_from_centers(centers: Sequence[float]) -> tuple[TriangularMembership, ...]:
    c = [float(v) for v in centers]
    if len(c) < 2:
        raise ContractViolation(f"a partition dimension needs at least 2 sets, got {len(c)}")
    if any(b <= a for a, b in zip(c, c[1:])):
        raise ContractViolation(f"centers must be strictly increasing, got {c}")
    sets = []
    for k, ck in enumerate(c):
        first, last = k == 0, k == len(c) - 1
        left = ck if first else c[k - 1]
        right = ck if last else c[k + 1]
        sets.append(TriangularMembership(left, ck, right, left_shoulder=first, right_shoulder=last))
    return tuple(sets)


def build_uniform_partition(interval: tuple[float, float], count: int) -> tuple[TriangularMembership, ...]:
    """``count`` equally spaced triangles covering ``interval`` with 50% overlap."""
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ContractViolation(f"need lo < hi, got [{lo}, {hi}]")
    if count < 2:
        raise ContractViolation(f"need at least 2 memberships, got {count}")
    step = (hi - lo) / (count - 1)
    centers = [lo + k * step for k in range(count - 1)] + [hi]
    return _sets_from_centers(centers)


@dataclass(frozen=True)
class FuzzyPartition:
    """Per-dimension ordered triangular sets over a box domain."""

    sets: tuple[tuple[TriangularMembership, ...], ...]

    def __post_init__(self):
        if not self.sets:
            raise ContractViolation("partition needs at least one dimension")
        for dim, mfs in enumerate(self.sets):
            centers = [m.center for m in mfs]
            if len(mfs) < 2 or any(b <= a for a, b in zip(centers, centers[1:])):
                raise ContractViolation(f"dimension {dim}: centers must be strictly increasing")
            # consistency: each set vanishes at its neighbours' centers
            for k, m in enumerate(mfs):
                if k > 0 and not (m.left_shoulder or m.left >= centers[k - 1]):
                    raise ContractViolation(f"dimension {dim}: set {k} overlaps past center {k - 1}")
                if k < len(mfs) - 1 and not (m.right_shoulder or m.right <= centers[k + 1]):
                    raise ContractViolation(f"dimension {dim}: set {k} overlaps past center {k + 1}")

    @classmethod
    def from_centers(cls, centers: Sequence[Sequence[float]]) -> "FuzzyPartition":
        return cls(tuple(_sets_from_centers(c) for c in centers))

    @classmethod
    def uniform(cls, intervals: Sequence[tuple[float, float]], counts: Sequence[int]) -> "FuzzyPartition":
        if len(intervals) != len(counts):
            raise ContractViolation("intervals and counts must have the same length")
        return cls(tuple(build_uniform_partition(iv, n) for iv, n in zip(intervals, counts)))

    @property
    def n(self) -> int:
        return len(self.sets)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.sets)

    @property
    def centers(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(m.center for m in s) for s in self.sets)

    @property
    def domains(self) -> tuple[tuple[float, float], ...]:
        return tuple((s[0].center, s[-1].center) for s in self.sets)

    def rule_center(self, j: RuleIndex) -> np.ndarray:
        if len(j) != self.n or any(not 0 <= ji < cnt for ji, cnt in zip(j, self.counts)):
            raise ContractViolation(f"rule index {tuple(j)} does not fit partition counts {self.counts}")
        return np.array([self.sets[i][ji].center for i, ji in enumerate(j)])

    def memberships(self, X) -> list[np.ndarray]:
        """Per-dimension membership matrices, each of shape (rows, N_i)."""
        X = self._as_rows(X)
        return [np.stack([m(X[:, i]) for m in mfs], axis=1) for i, mfs in enumerate(self.sets)]

    def _as_rows(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ContractViolation(f"inputs have {X.shape[1]} columns, partition has {self.n} dimensions")
        return X


def firing_level(partition: FuzzyPartition, j: RuleIndex, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (partition.n,):
        raise ContractViolation(f"x must have length {partition.n}")
    level = 1.0
    for i, ji in enumerate(j):
        level *= membership_eval(partition.sets[i][ji], x[i])
    return level


def firing_matrix(partition: FuzzyPartition, rules: Sequence[RuleIndex], X) -> np.ndarray:
    """Firing levels for every (row, rule) pair, shape (rows, len(rules))."""
    mem = partition.memberships(X)
    idx = np.asarray(rules, dtype=int).reshape(len(rules), partition.n)
    out = np.ones((mem[0].shape[0], len(rules)))
    for i, M in enumerate(mem):
        out *= M[:, idx[:, i]]
    return out


def normalize_rows(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalize a firing matrix. Returns (P, hole_mask); hole rows are zero."""
    total = F.sum(axis=1)
    holes = total <= 0.0
    P = np.zeros_like(F)
    ok = ~holes
    P[ok] = F[ok] / total[ok, None]
    return P, holes


def normalized_firing(partition: FuzzyPartition, rules: Sequence[RuleIndex], x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    P, holes = normalize_rows(firing_matrix(partition, rules, x[None, :]))
    if holes[0]:
        raise CoverageHoleError(x)
    return P[0]


@dataclass(frozen=True)
class ZeroOrderRule:
    index: RuleIndex
    center: tuple[float, ...]
    theta: float


def zero_order_rules(partition: FuzzyPartition, thetas: dict[RuleIndex, float] | Sequence[tuple[RuleIndex, float]]):
    items = thetas.items() if isinstance(thetas, dict) else thetas
    return [ZeroOrderRule(tuple(j), tuple(partition.rule_center(j)), float(t)) for j, t in items]


def fs_eval(rules: Sequence[ZeroOrderRule], partition: FuzzyPartition, x) -> float:
    """Center-average defuzzified output of the classical fuzzy system."""
    p = normalized_firing(partition, [r.index for r in rules], x)
    return float(p @ np.array([r.theta for r in rules]))


def enumerate_rules(partition: FuzzyPartition) -> list[RuleIndex]:
    return list(itertools.product(*(range(n) for n in partition.counts)))


def cumulative_firing(partition: FuzzyPartition, rules: Sequence[RuleIndex], data) -> np.ndarray:
    return firing_matrix(partition, rules, data).sum(axis=0)


def select_top_fired(partition: FuzzyPartition, candidates: Sequence[RuleIndex], data, K: int) -> list[RuleIndex]:
    """The ``K`` candidates with the largest summed firing over ``data``.

    Ties go to the lexicographically smaller index; the result is sorted.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size == 0 or data.shape[0] == 0:
        raise ContractViolation("rule selection needs at least one data row")
    if not 0 <= K <= len(candidates):
        raise ContractViolation(f"K={K} outside 0..{len(candidates)}")
    cands = sorted(set(tuple(c) for c in candidates))
    score = cumulative_firing(partition, cands, data)
    ranked = sorted(range(len(cands)), key=lambda k: (-score[k], cands[k]))
    return sorted(cands[k] for k in ranked[:K])
