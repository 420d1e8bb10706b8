"""Result records, verdict rules, and report writers.

Verdicts are derived deterministically:

* two-sided agreement checks: ``consistent`` iff |z| <= 4, else
  ``bound_violated`` (a z that large at these sample sizes means a formula or
  transcription error, not noise);
* one-sided upper bounds on probabilities: ``bound_holds`` iff the point
  estimate is below the bound, ``bound_violated`` iff even the lower
  confidence limit exceeds it, ``inconclusive`` in between;
* fits and data-only rows: ``inconclusive`` when there is nothing to compare.

Report files contain repr() of each float, so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

VERDICT_CONSISTENT = "consistent"
VERDICT_BOUND_HOLDS = "bound_holds"
VERDICT_BOUND_VIOLATED = "bound_violated"
VERDICT_INCONCLUSIVE = "inconclusive"

Z_AGREEMENT_THRESHOLD = 4.0

REPORT_COLUMNS = ("quantity", "analytic", "estimate", "se", "ci_low",
                  "ci_high", "z", "verdict")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its confidence interval.

    kind is "mean_of_real" (normal interval) or "probability" (Wilson score
    interval); level is the two-sided confidence level.
    """

    mean: float
    std_error: float
    n_samples: int
    ci_low: float
    ci_high: float
    kind: str
    level: float


@dataclass(frozen=True)
class BoundReport:
    """Analytic value paired with its Monte Carlo estimate and a verdict."""

    quantity: str
    analytic: float | None
    estimate: McEstimate | None
    z: float | None
    verdict: str


def agreement_verdict(z: float) -> str:
    return VERDICT_CONSISTENT if abs(z) <= Z_AGREEMENT_THRESHOLD \
        else VERDICT_BOUND_VIOLATED


def upper_bound_verdict(estimate: McEstimate, bound: float) -> str:
    if estimate.mean <= bound:
        return VERDICT_BOUND_HOLDS
    if estimate.ci_low > bound:
        return VERDICT_BOUND_VIOLATED
    return VERDICT_INCONCLUSIVE


def z_score(mean: float, analytic: float, std_error: float) -> float:
    """(mean - analytic) / se, with exact agreement mapping to exactly 0."""
    if mean == analytic:
        return 0.0
    if std_error == 0.0:
        return float("inf") if mean > analytic else float("-inf")
    return (mean - analytic) / std_error


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def report_rows(reports) -> list[dict]:
    rows = []
    for r in reports:
        est = r.estimate
        rows.append({
            "quantity": r.quantity,
            "analytic": r.analytic,
            "estimate": est.mean if est else None,
            "se": est.std_error if est else None,
            "ci_low": est.ci_low if est else None,
            "ci_high": est.ci_high if est else None,
            "z": r.z,
            "verdict": r.verdict,
        })
    return rows


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for row in report_rows(reports):
            w.writerow([row["quantity"]] +
                       [_fmt(row[c]) for c in REPORT_COLUMNS[1:-1]] +
                       [row["verdict"]])


def write_report_json(reports, path) -> None:
    rows = []
    for row in report_rows(reports):
        # repr-formatted strings keep the file byte-stable and lossless
        rows.append({c: (row[c] if c in ("quantity", "verdict")
                         else (_fmt(row[c]) or None)) for c in REPORT_COLUMNS})
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def any_violated(reports) -> bool:
    return any(r.verdict == VERDICT_BOUND_VIOLATED for r in reports)
