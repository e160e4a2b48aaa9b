"""Run configuration, phase-token parsing and the CSV/JSON file formats."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__
from .core import RegisterShape, optimal_phase
from .montecarlo import AcceptanceCriteria

OUTDIR_ENV = "MPGROVER_OUTDIR"

_PHASE_RE = re.compile(r"^([+-])?((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?$")


def parse_phase(token: str) -> float:
    """Parse ``pi``, ``2pi``, ``0.5pi``, ``-pi`` or a plain decimal."""
    tok = str(token).strip().lower().replace("π", "pi")
    m = _PHASE_RE.match(tok)
    if not tok or m is None or (m.group(2) is None and m.group(3) is None):
        raise ValueError(f"cannot parse phase {token!r}")
    coef = float(m.group(2)) if m.group(2) is not None else 1.0
    if m.group(1) == "-":
        coef = -coef
    return coef * math.pi if m.group(3) else coef


def parse_phase_list(text: str) -> list[float]:
    return [parse_phase(t) for t in text.split(",") if t.strip()]


@dataclass
class RunConfig:
    n: int = 200
    m: int = 2
    omega: str | float = "auto"
    phases: list[float] = field(default_factory=list)
    seed: int = 1
    p_threshold: float = 0.92
    extra_iterations: int = 1
    scan_horizon_factor: int = 4
    samples: int = 200_000
    iters: int | None = None
    z_grid_size: int = 629
    fit_window_factor: int = 3
    p_phi: float | None = None
    out_dir: str | None = None

    @property
    def shape(self) -> RegisterShape:
        return RegisterShape(self.n, self.m)

    @property
    def criteria(self) -> AcceptanceCriteria:
        return AcceptanceCriteria(self.p_threshold, self.extra_iterations, self.scan_horizon_factor)

    def resolved_omega(self) -> float:
        if isinstance(self.omega, str):
            if self.omega.strip().lower() == "auto":
                return optimal_phase(self.shape)
            return parse_phase(self.omega)
        return float(self.omega)

    def resolve(self) -> "RunConfig":
        """Copy with ``omega='auto'`` replaced by the optimal phase and default
        oracle phases filled in."""
        out = RunConfig(**asdict(self))
        out.omega = self.resolved_omega()
        if not out.phases:
            out.phases = [out.omega] * self.m
        return out

    def output_dir(self) -> Path:
        return Path(self.out_dir or os.environ.get(OUTDIR_ENV) or ".")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "phases" in data and isinstance(data["phases"], str):
            data["phases"] = parse_phase_list(data["phases"])
        elif "phases" in data:
            data["phases"] = [parse_phase(p) if isinstance(p, str) else float(p) for p in data["phases"]]
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


def fmt(x) -> str:
    """Shortest round-tripping text for a number."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def write_csv(path: Path | None, header: Sequence[str], rows: Iterable[Sequence[Any]], meta: dict[str, Any]) -> str:
    """CSV with a ``#``-commented metadata block; written to ``path`` (when
    given) and returned as text."""
    buf = io.StringIO()
    buf.write(f"# tool: multiphase_grover {__version__}\n")
    for key, value in meta.items():
        buf.write(f"# {key}: {value if isinstance(value, str) else json.dumps(value, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path: Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Inverse of :func:`write_csv`: metadata block and rows."""
    meta: dict[str, str] = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
            else:
                body.append(line)
    return meta, list(csv.DictReader(body))


def write_json(path: Path | None, payload: dict[str, Any]) -> str:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
