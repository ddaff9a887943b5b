"""Flat ``section.key=value`` run configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractViolation
from .mackey_glass import MgParams

MAX_ORDER_R = 3  # the generator supplies derivatives up to x''''


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    mg: MgParams = field(default_factory=MgParams)
    spacing: float = 1.0
    lags: tuple[float, ...] = (18.0, 12.0, 6.0, 0.0)
    start: float = 118.0
    n_train: int = 500
    n_test: int = 500
    lo: tuple[float, ...] = (0.40,)
    hi: tuple[float, ...] = (1.32,)
    count: tuple[int, ...] = (3,)
    k: int = 61
    r: int = 3
    s: int = 3
    ridge: float = 0.0
    nu: int = 4
    h: float = 1.0
    out_dir: str = "out"

    def per_dim(self, values: tuple) -> tuple:
        n = len(self.lags)
        if len(values) == 1:
            return values * n
        if len(values) != n:
            raise ContractViolation(f"expected 1 or {n} partition values, got {len(values)}")
        return values

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.per_dim(self.lo), self.per_dim(self.hi)))

    @property
    def counts(self) -> tuple[int, ...]:
        return self.per_dim(self.count)

    @property
    def stride(self) -> int:
        return round(self.h / self.spacing)

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ContractViolation(msg)

        need(len(self.lags) >= 1 and all(lag >= 0 for lag in self.lags), "data.lags must be nonnegative")
        need(self.spacing > 0, "data.spacing must be positive")
        self.mg.delay_steps(self.spacing)
        need(self.mg.tau > 0, "mg.tau must be positive for the derivative recursions")
        stride = self.h / self.spacing
        need(self.h > 0 and math.isclose(stride, round(stride)) and round(stride) >= 1,
             "taylor.h must be a positive multiple of data.spacing")
        for lag in self.lags:
            q = lag / self.h
            need(math.isclose(q, round(q), abs_tol=1e-9), f"lag {lag} is not a multiple of taylor.h={self.h}")
        need(self.n_train >= 1 and self.n_test >= 1, "data.n_train and data.n_test must be positive")
        need(self.start - max(self.lags) >= 0, "data.start must be at least the largest lag")
        last = self.start + (self.n_train + self.n_test - 1) * self.spacing
        need(self.mg.t_end >= last - 1e-9,
             f"mg.t_end={self.mg.t_end:g} is too small: {self.n_train + self.n_test} rows from "
             f"t={self.start:g} need mg.t_end >= {last:g}")
        for lo, hi in self.intervals:
            need(lo < hi, f"fuzzy interval [{lo}, {hi}] is empty")
        need(all(c >= 2 for c in self.counts), "fuzzy.count must be >= 2")
        total = math.prod(self.counts)
        need(1 <= self.k <= total, f"dfs.k={self.k} outside 1..{total}")
        need(0 <= self.s <= self.r <= MAX_ORDER_R, f"need 0 <= dfs.s <= dfs.r <= {MAX_ORDER_R}")
        need(self.ridge >= 0, "dfs.ridge must be nonnegative")
        need(1 <= self.nu <= self.r + 1, f"taylor.nu must be in 1..dfs.r+1={self.r + 1}")
        return self

    # -- text form ------------------------------------------------------------

    def items(self) -> list[tuple[str, str]]:
        out = [(f"mg.{f.name}", _fmt(getattr(self.mg, f.name))) for f in dataclasses.fields(MgParams)]
        for key, attr in _KEYS.items():
            if not key.startswith("mg."):
                out.append((key, _fmt(getattr(self, attr))))
        return out

    def dumps(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.items())

    def with_out_dir(self, out_dir) -> "RunConfig":
        return dataclasses.replace(self, out_dir=str(out_dir))


_KEYS = {
    "data.spacing": "spacing",
    "data.lags": "lags",
    "data.start": "start",
    "data.n_train": "n_train",
    "data.n_test": "n_test",
    "fuzzy.lo": "lo",
    "fuzzy.hi": "hi",
    "fuzzy.count": "count",
    "dfs.k": "k",
    "dfs.r": "r",
    "dfs.s": "s",
    "dfs.ridge": "ridge",
    "taylor.nu": "nu",
    "taylor.h": "h",
    "output.dir": "out_dir",
}
_PARSERS = {
    "spacing": float, "lags": _floats, "start": float, "n_train": int, "n_test": int,
    "lo": _floats, "hi": _floats, "count": _ints, "k": int, "r": int, "s": int,
    "ridge": float, "nu": int, "h": float, "out_dir": str,
}


def loads(text: str) -> RunConfig:
    top, mg = {}, {}
    mg_fields = {f.name for f in dataclasses.fields(MgParams)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractViolation(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key.startswith("mg.") and key[3:] in mg_fields:
                mg[key[3:]] = float(value)
            elif key in _KEYS:
                attr = _KEYS[key]
                top[attr] = _PARSERS[attr](value)
            else:
                raise ContractViolation(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ContractViolation):
                raise
            raise ContractViolation(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return RunConfig(mg=MgParams(**mg), **top)


def load(path) -> RunConfig:
    return loads(Path(path).read_text())
