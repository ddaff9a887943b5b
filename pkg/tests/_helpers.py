"""Shared builders for the test suite."""
import numpy as np

from dfsforecast.disturbed import DfsModel
from dfsforecast.fuzzy import FuzzyPartition, enumerate_rules


def random_partition(rng, n, count=3):
    intervals = []
    for _ in range(n):
        lo = rng.uniform(-1.0, 1.0)
        intervals.append((lo, lo + rng.uniform(0.5, 2.0)))
    return FuzzyPartition.uniform(intervals, [count] * n)


def random_model(rng, n=None, r=3, s=3, count=3, a_scale=0.3, rules=None):
    n = int(rng.integers(1, 4)) if n is None else n
    part = random_partition(rng, n, count)
    idx = enumerate_rules(part) if rules is None else rules
    N = len(idx)
    a = np.zeros((N, s + 1))
    a[:, 0] = 1.0
    a[:, 1:] = rng.uniform(-a_scale, a_scale, size=(N, s))
    b = rng.uniform(-1.0, 1.0, size=(N, r + 1))
    return DfsModel.from_arrays(part, idx, a, b)


def random_inputs(rng, partition, count):
    lo = np.array([d[0] for d in partition.domains])
    hi = np.array([d[1] for d in partition.domains])
    return lo + (hi - lo) * rng.random((count, partition.n))
