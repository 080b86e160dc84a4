"""Per-run reports: eigenvalue records plus aggregate statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dense import EigenResult
from .status import Kind

SCHEMA = 1
RECORD_FIELDS = (
    "kind", "re", "im", "berr", "berr_left", "cond", "cond_reliable", "status", "iterations",
)


@dataclass(frozen=True)
class Record:
    kind: str
    re: float | None
    im: float | None
    berr: float
    berr_left: float
    cond: float
    cond_reliable: bool
    status: str
    iterations: int


@dataclass(frozen=True)
class RunReport:
    records: list
    n: int
    d: int
    structure: str
    name: str | None
    seed: int
    wall_seconds: float

    @property
    def max_berr(self) -> float:
        return max((r.berr for r in self.records), default=0.0)

    @property
    def mean_berr(self) -> float:
        return float(np.mean([r.berr for r in self.records])) if self.records else 0.0

    def summary(self) -> dict:
        counts = {}
        for r in self.records:
            counts[r.status] = counts.get(r.status, 0) + 1
        return {
            "count": len(self.records),
            "max_berr": self.max_berr,
            "mean_berr": self.mean_berr,
            "wall_seconds": self.wall_seconds,
            "seed": self.seed,
            "status_counts": counts,
        }


def make_record(r: EigenResult) -> Record:
    if r.kind is Kind.INFINITE:
        re_, im = None, None
    else:
        z = r.eigenvalue
        re_, im = float(z.real), float(z.imag)
    return Record(
        r.kind.value, re_, im, float(r.berr), float(r.berr_left), float(r.cond),
        bool(r.cond_reliable), r.status.label, int(r.iterations),
    )


def make_report(P, results, seed: int, wall_seconds: float) -> RunReport:
    return RunReport(
        [make_record(r) for r in results], P.n, P.d, P.structure.value, P.name, seed, wall_seconds
    )


def _finite_or_none(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def to_json(rep: RunReport, timings: bool = True) -> str:
    summary = rep.summary()
    if not timings:
        summary.pop("wall_seconds")
    doc = {
        "schema": SCHEMA,
        "problem": {"n": rep.n, "d": rep.d, "structure": rep.structure, "name": rep.name},
        "summary": {k: _finite_or_none(v) for k, v in summary.items()},
        "eigenvalues": [{k: _finite_or_none(v) for k, v in asdict(r).items()} for r in rep.records],
    }
    return json.dumps(doc, indent=2, allow_nan=False)


def to_csv(rep: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in rep.records:
        row = asdict(r)
        w.writerow(["" if row[f] is None else (repr(row[f]) if isinstance(row[f], float) else row[f]) for f in RECORD_FIELDS])
    return buf.getvalue()


def to_text(rep: RunReport) -> str:
    lines = [
        f"problem: n={rep.n} d={rep.d} structure={rep.structure}" + (f" name={rep.name}" if rep.name else ""),
        f"{'kind':<9}{'eigenvalue':>44}  {'berr':>9}  {'cond':>9}  {'status':<11}{'iters':>5}",
    ]
    for r in rep.records:
        if r.kind == "infinite":
            lam = "inf"
        else:
            lam = f"{r.re:+.16e} {r.im:+.16e}i"
        cond = f"{r.cond:9.2e}" + ("" if r.cond_reliable else "?")
        lines.append(f"{r.kind:<9}{lam:>44}  {r.berr:9.2e}  {cond:>9}  {r.status:<11}{r.iterations:>5}")
    s = rep.summary()
    lines.append(
        f"count={s['count']} max_berr={s['max_berr']:.2e} mean_berr={s['mean_berr']:.2e} "
        f"seed={rep.seed} time={rep.wall_seconds:.3f}s"
    )
    return "\n".join(lines) + "\n"
