"""Seeded Monte-Carlo plumbing shared by every experiment.

Each replication draws from its own Philox stream keyed by ``(seed, index)``,
so results do not depend on the order in which replications are evaluated.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters for one experiment run.

    Only ``seed`` and ``reps`` are shared by all experiments; the remaining
    fields carry the defaults of the reproduction they belong to.
    """

    seed: int = 20240601
    reps: int = 10_000
    theta: float = 0.3
    alpha: float = 0.05
    n_list: tuple[int, ...] = (5, 10, 25, 50, 100)
    clamp_eps: float = 1e-3
    horizon: int = 200
    looks: tuple[int, ...] = (10, 20, 50, 100, 200)
    monitor_looks_only: bool = False
    scenario: str = "A"
    n_cal: int = 500
    n_test: int = 2000

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ExperimentConfig":
        """Build a config from string values, e.g. a parsed key-value file."""
        kwargs: dict[str, Any] = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            if key not in types:
                raise KeyError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(types[key], raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        """Read ``key = value`` lines; ``#`` starts a comment."""
        values: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = raw
        return cls.from_mapping(values)


def _coerce(type_name: Any, raw: str) -> Any:
    type_name = str(type_name)
    if type_name.startswith("tuple"):
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if type_name == "bool":
        if raw.lower() in {"1", "true", "yes"}:
            return True
        if raw.lower() in {"0", "false", "no"}:
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if type_name == "int":
        return int(raw)
    if type_name == "float":
        return float(raw)
    return raw


def derive_substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication ``index`` under ``seed``.

    The Philox key is derived by ``SeedSequence`` hashing of ``(seed, index)``;
    no jumping or sequential spawning is involved, so any subset of
    replications can be regenerated in any order.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SummaryStat:
    mean: float
    mc_standard_error: float
    count: int
    count_infinite: int = 0

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def stable_sum(values: Iterable[float]) -> float:
    # exactly rounded, hence independent of summation order
    return math.fsum(values)


def summarize(values: Sequence[float]) -> SummaryStat:
    """Mean and Monte-Carlo standard error over the finite entries.

    Infinite entries are counted, never averaged in.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty sample")
    if np.isnan(arr).any():
        raise ValueError("NaN is not a risk value")
    finite = arr[np.isfinite(arr)]
    n_inf = int(arr.size - finite.size)
    if finite.size == 0:
        return SummaryStat(math.inf, math.nan, 0, n_inf)
    mean = stable_sum(finite.tolist()) / finite.size
    if finite.size > 1:
        var = stable_sum(((finite - mean) ** 2).tolist()) / (finite.size - 1)
        se = math.sqrt(var / finite.size)
    else:
        se = 0.0
    return SummaryStat(mean, se, int(finite.size), n_inf)


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


# --- serialization -----------------------------------------------------------

def format_value(v: Any) -> str:
    """Lossless text for CSV cells; infinities become ``inf``."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (tuple, list)):
        return " ".join(format_value(x) for x in v)
    return str(v)


def jsonable(obj: Any) -> Any:
    """Recursively replace infinities with the string ``"inf"``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(dataclasses.asdict(obj))
    return obj


def parse_value(text: str) -> float:
    """Inverse of :func:`format_value` for numeric cells."""
    return float(text)


@dataclass
class Table:
    """A rectangular report with provenance metadata."""

    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}={format_value(self.meta[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "meta": jsonable(self.meta),
            "columns": self.columns,
            "rows": [dict(zip(self.columns, jsonable(row))) for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        """Aligned columns for terminals; metadata as leading comment lines."""
        cells = [list(self.columns)] + [[format_value(v) for v in row] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = [f"# {key}={format_value(self.meta[key])}" for key in sorted(self.meta)]
        lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown format {fmt!r}")
