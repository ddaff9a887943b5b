"""Forecast error summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

SUMMARY_HEADER = ("name", "n", "mse", "rmse", "max_abs")


@dataclass(frozen=True)
class ErrorSummary:
    rmse: float
    mse: float
    max_abs: float
    n: int

    def csv_row(self, name: str) -> list[str]:
        return [name, str(self.n), f"{self.mse:.17g}", f"{self.rmse:.17g}", f"{self.max_abs:.17g}"]

    def __str__(self) -> str:
        return f"n={self.n} mse={self.mse:.6e} rmse={self.rmse:.6e} max_abs={self.max_abs:.6e}"


def compare(predicted, truth) -> ErrorSummary:
    p = np.asarray(predicted, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if p.shape != t.shape or p.size == 0:
        raise ContractViolation(f"need equal nonzero lengths, got {p.size} and {t.size}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise ContractViolation("predictions and truth must be finite")
    resid = p - t
    # np.sum on a contiguous 1-D array uses pairwise summation
    mse = float(np.sum(resid * resid) / resid.size)
    return ErrorSummary(rmse=math.sqrt(mse), mse=mse, max_abs=float(np.max(np.abs(resid))), n=int(resid.size))
