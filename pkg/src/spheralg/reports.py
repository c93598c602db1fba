"""Run configuration and machine-readable reports."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from .opalg import OperatorExpr, to_text
from .params import GaussQ, ParamPoly

SCHEMA_VERSION = "spheralg-report/1"
FORMATS = ("text", "json", "csv")


class ConfigError(ValueError):
    """Invalid command-line configuration (exit code 2)."""


def parse_range(text: str) -> tuple[Fraction, Fraction, Fraction]:
    """``start:stop:step`` with exact decimal or p/q endpoints, stop inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must be start:stop:step")
    try:
        start, stop, step = (Fraction(p.strip()) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad range {text!r}: {exc}") from None
    if step <= 0:
        raise ConfigError(f"range {text!r} needs a positive step")
    if stop < start:
        raise ConfigError(f"range {text!r} is empty")
    return start, stop, step


def range_values(r: tuple[Fraction, Fraction, Fraction]) -> list[Fraction]:
    start, stop, step = r
    n = int((stop - start) / step)
    return [start + k * step for k in range(n + 1)]


def parse_params(text: str | None) -> dict[str, GaussQ]:
    """``a=1,b=1/2,c=-1`` to a mapping of exact values."""
    out: dict[str, GaussQ] = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"bad parameter assignment {item!r}")
        try:
            out[name.strip()] = GaussQ.coerce(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"bad parameter value {value!r}") from None
    return out


@dataclass
class RunConfig:
    command: str
    lmax: int = 16
    tol: float = 1e-10
    casimir_floor: float = 1e-6
    params: dict = field(default_factory=dict)
    a: Fraction | None = None
    b: Fraction | None = None
    a_range: tuple | None = None
    b_range: tuple | None = None
    format: str = "text"
    seed: int = 0
    jobs: int = 1
    reproducible: bool = False
    output: str | None = None
    expr: str | None = None
    script: str | None = None
    interior: bool = False

    # matrix dumps and normal forms have no interior-depth requirement
    SMALL_LMAX_COMMANDS = ("repr", "eval")

    def validate(self) -> "RunConfig":
        floor = 0 if self.command in self.SMALL_LMAX_COMMANDS else 2
        if self.lmax < floor:
            raise ConfigError(f"lmax must be at least {floor}")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if not self.casimir_floor > 0:
            raise ConfigError("casimir floor must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    def echo(self) -> dict:
        return jsonable(dataclasses.asdict(self))


@dataclass
class CheckRecord:
    id: str
    status: str
    residual: float
    tolerance: float
    lmax: int | None = None
    parameters: dict = field(default_factory=dict)
    expect: str = "le"
    note: str = ""

    @classmethod
    def measure(cls, id: str, residual: float, tolerance: float, expect: str = "le", **kw) -> "CheckRecord":
        ok = residual <= tolerance if expect == "le" else residual > tolerance
        return cls(id, "pass" if ok else "fail", float(residual), float(tolerance), expect=expect, **kw)


@dataclass
class VerificationReport:
    suite: str
    checks: list[CheckRecord]
    config: dict
    tool_version: str = __version__
    schema: str = SCHEMA_VERSION
    timestamp: str | None = None

    @property
    def status(self) -> str:
        return "pass" if all(c.status == "pass" for c in self.checks) else "fail"

    def to_dict(self) -> dict:
        out = {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "suite": self.suite,
            "status": self.status,
            "config": self.config,
            "checks": [dataclasses.asdict(c) for c in self.checks],
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return jsonable(out)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        return cls(
            suite=data["suite"],
            checks=[CheckRecord(**c) for c in data["checks"]],
            config=data["config"],
            tool_version=data["tool_version"],
            schema=data["schema"],
            timestamp=data.get("timestamp"),
        )

    def to_text(self) -> str:
        lines = [f"{self.suite}: {self.status.upper()}  (tool {self.tool_version})"]
        width = max((len(c.id) for c in self.checks), default=10)
        for c in self.checks:
            op = "<=" if c.expect == "le" else ">"
            lmax = f" lmax={c.lmax}" if c.lmax is not None else ""
            note = f"  [{c.note}]" if c.note else ""
            lines.append(f"  {c.status.upper():4}  {c.id:<{width}}  {c.residual:.3e} {op} {c.tolerance:.1e}{lmax}{note}")
        return "\n".join(lines) + "\n"


def timestamp(reproducible: bool) -> str | None:
    return None if reproducible else time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def jsonable(x: Any) -> Any:
    """Convert report values (Fractions, polynomials, numpy scalars) to JSON types."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (Fraction, GaussQ, ParamPoly)):
        return str(x)
    if isinstance(x, OperatorExpr):
        return to_text(x)
    if isinstance(x, np.generic):
        return x.item()
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return jsonable(dataclasses.asdict(x))
    return x


def envelope(kind: str, payload: Any, config: RunConfig) -> dict:
    out = {
        "schema": SCHEMA_VERSION,
        "tool_version": __version__,
        "kind": kind,
        "config": config.echo(),
        "result": jsonable(payload),
    }
    ts = timestamp(config.reproducible)
    if ts is not None:
        out["timestamp"] = ts
    return out


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


SCAN_COLUMNS = ("a", "b", "c", "d", "closure_ac", "closure_b", "residual", "closed", "labelled_case", "solver_case")


def fmt_float(x: float) -> str:
    return f"{x:.17g}"


def scan_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in rows:
        w.writerow([
            str(r["a"]), str(r["b"]), str(r["c"]), str(r["d"]),
            str(r["closure_ac"]), str(r["closure_b"]),
            fmt_float(r["residual"]), "1" if r["closed"] else "0",
            r["labelled_case"] or "", r["solver_case"] or "",
        ])
    return buf.getvalue()
