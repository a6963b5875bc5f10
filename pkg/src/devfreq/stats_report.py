"""Confidence intervals, bound-compliance verdicts and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

from scipy.special import ndtri

from .analytic_bounds import BoundSpec
from .borel_cantelli import OverlapTail
from .errors import DomainError

SCHEMA = "devfreq-report/1"
ROW_FIELDS = ("k", "empirical", "successes", "ci_lo", "ci_hi", "upper_one_sided", "bound", "verdict")
VERDICTS = ("pass", "vacuous-pass", "fail", "shape-only", "skipped")


def _check_counts(successes: int, trials: int, confidence: float) -> None:
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    if not 0 < confidence < 1:
        raise DomainError("confidence must lie in (0, 1)")


def _wilson(successes: int, trials: int, z: float) -> tuple:
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    """Two-sided Wilson score interval ``(lo, hi)``.

    Args:
        successes: Number of successes.
        trials: Number of trials, at least 1.
        confidence: Coverage level in ``(0, 1)``.
    """
    _check_counts(successes, trials, confidence)
    return _wilson(successes, trials, float(ndtri(0.5 + confidence / 2)))


def wilson_upper(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Wilson upper confidence bound."""
    _check_counts(successes, trials, confidence)
    return _wilson(successes, trials, float(ndtri(confidence)))[1]


def wilson_lower(successes: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Wilson lower confidence bound."""
    _check_counts(successes, trials, confidence)
    return _wilson(successes, trials, float(ndtri(confidence)))[0]


@dataclass
class ComplianceRow:
    k: int
    empirical: float
    successes: int
    ci_lo: float
    ci_hi: float
    upper_one_sided: float
    bound: Optional[float]
    verdict: str

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in ROW_FIELDS}


@dataclass
class ComplianceReport:
    """Per-k comparison of an empirical tail with an analytic bound.

    A row fails iff its lower confidence limit exceeds the bound; bounds of at
    least 1 pass vacuously; bounds with a user-supplied constant are only
    reported (``shape-only``).
    """

    experiment: str
    bound_name: str
    samples: int
    confidence: float
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    bound_params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.verdict != "fail" for r in self.rows)

    def verdict_counts(self) -> dict:
        return {v: sum(r.verdict == v for r in self.rows) for v in VERDICTS}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "bound": self.bound_name,
            "bound_params": self.bound_params,
            "samples": self.samples,
            "confidence": self.confidence,
            "passed": self.passed,
            "rows": [r.to_dict() for r in self.rows],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplianceReport":
        if data.get("schema") != SCHEMA:
            raise DomainError(f"unsupported schema {data.get('schema')!r}")
        rows = [ComplianceRow(**{name: r[name] for name in ROW_FIELDS}) for r in data["rows"]]
        return cls(data["experiment"], data["bound"], data["samples"], data["confidence"], rows,
                   list(data["notes"]), dict(data["bound_params"]))


def compare(empirical: OverlapTail, bound: BoundSpec, confidence: float = 0.99,
            k_range: Optional[tuple] = None) -> ComplianceReport:
    """Judge an empirical tail against a bound, one row per ``k``.

    The fail test uses the one-sided lower Wilson limit, so a row fails only
    when the data show the bound is exceeded at the given confidence.  Rows
    with ``k`` outside the bound's validity range are marked ``skipped``.

    Raises:
        DomainError: no overlap between the empirical and valid ``k`` ranges.
    """
    if empirical.source != "empirical":
        raise DomainError("compare needs an empirical tail")
    lo_k, hi_k = k_range if k_range is not None else (0, empirical.k_max)
    hi_k = min(hi_k, empirical.k_max)
    ks = range(lo_k, hi_k + 1)
    if not any(bound.valid(k) for k in ks):
        raise DomainError(f"bound {bound.name} has no valid k in {lo_k}..{hi_k}")
    n = empirical.samples
    rows = []
    for k in ks:
        s = int(empirical.exceed[k])
        ci_lo, ci_hi = wilson_interval(s, n, confidence)
        upper = wilson_upper(s, n, confidence)
        if not bound.valid(k):
            rows.append(ComplianceRow(k, s / n, s, ci_lo, ci_hi, upper, None, "skipped"))
            continue
        b = float(bound(k))
        if bound.shape_only:
            verdict = "shape-only"
        elif b >= 1.0:
            verdict = "vacuous-pass"
        elif wilson_lower(s, n, confidence) > b:
            verdict = "fail"
        else:
            verdict = "pass"
        rows.append(ComplianceRow(k, s / n, s, ci_lo, ci_hi, upper, b, verdict))
    params = bound.to_dict(0)["params"]
    return ComplianceReport(empirical.name, bound.name, n, confidence, rows, list(empirical.notes), params)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(report: ComplianceReport, fmt: str = "json") -> str:
    """Serialize a report as ``json``, ``csv`` or ``text``."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for r in report.rows:
            writer.writerow([_fmt(getattr(r, name)) for name in ROW_FIELDS])
        return buf.getvalue()
    if fmt in ("text", "text-table"):
        head = f"{report.experiment} vs {report.bound_name}  (n={report.samples}, conf={report.confidence})"
        lines = [head, f"{'k':>4} {'empirical':>11} {'upper':>11} {'bound':>11}  verdict"]
        for r in report.rows:
            b = "-" if r.bound is None else f"{r.bound:11.4g}"
            lines.append(f"{r.k:>4} {r.empirical:11.4g} {r.upper_one_sided:11.4g} {b:>11}  {r.verdict}")
        lines.append("PASS" if report.passed else "FAIL")
        return "\n".join(lines) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def parse(text: str) -> ComplianceReport:
    """Inverse of ``emit(report, "json")``."""
    return ComplianceReport.from_dict(json.loads(text))


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
