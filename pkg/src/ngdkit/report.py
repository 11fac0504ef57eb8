"""Plain-text tables and JSON documents for command output.

Table mode rounds distances to two decimals; structured mode keeps full
precision.
"""
from __future__ import annotations

import json
from typing import Any, Optional, Sequence

from ngdkit.metric import DistanceValue
from ngdkit.providers.snapshot import StabilityReport
from ngdkit.stats import ConsistencyReport, ScanResult, SetStatistics


def distance_json(d: DistanceValue) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": d.kind.value}
    if d.is_finite:
        out["value"] = d.value
    if d.reason is not None:
        out["reason"] = d.reason
    if d.anomaly is not None:
        out["anomaly"] = d.anomaly.value
    return out


def dumps(document: Any) -> str:
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def short(d: DistanceValue, digits: int = 2) -> str:
    if d.is_finite:
        return f"{d.value:.{digits}f}"
    return str(d)


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = []
    for row in [header, None, *rows]:
        if row is None:
            lines.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
            continue
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def pair_table(rows: Sequence[tuple[str, str, DistanceValue]]) -> str:
    return _table(["Word Pair", "NGD"], [(f"{x}, {y}", short(d)) for x, y, d in rows])


def pair_json(rows: Sequence[tuple[str, str, DistanceValue]], calibrated=None) -> str:
    out = []
    for i, (x, y, d) in enumerate(rows):
        entry = {"x": x, "y": y, "ngd": distance_json(d)}
        if calibrated is not None:
            entry["calibrated"] = distance_json(calibrated[i])
        out.append(entry)
    return dumps({"pairs": out})


def scan_table(result: ScanResult) -> str:
    rows = [
        (
            ", ".join(v.triple),
            v.mediator,
            f"{v.d_xy:.2f}",
            f"{v.d_yz:.2f}",
            f"{v.d_xz:.2f}",
            f"{v.td:.2f}",
        )
        for v in result.violations
    ]
    text = _table(["Triple", "Mediator", "d(x,y)", "d(y,z)", "d(x,z)", "TD"], rows)
    return text + (
        f"violations: {len(result.violations)} "
        f"(checked {result.triples_checked}, skipped {result.triples_skipped})\n"
    )


def scan_json(result: ScanResult) -> str:
    return dumps(
        {
            "violations": [
                {
                    "triple": list(v.triple),
                    "mediator": v.mediator,
                    "x": v.x,
                    "z": v.z,
                    "d_xy": v.d_xy,
                    "d_yz": v.d_yz,
                    "d_xz": v.d_xz,
                    "td": v.td,
                }
                for v in result.violations
            ],
            "triples_checked": result.triples_checked,
            "triples_skipped": result.triples_skipped,
        }
    )


def _percent(change: Optional[float]) -> str:
    return "n/a" if change is None else f"{100 * change:.1f}%"


def stability_table(report: StabilityReport) -> str:
    rows = [
        (f"{r.x}, {r.y}", short(r.ngd_a), short(r.ngd_b), _percent(r.relative_change))
        for r in report.rows
    ]
    text = _table(["Word Pair", "NGD (A)", "NGD (B)", "Change"], rows)
    if report.max_pair is None:
        return text + "max relative change: n/a\n"
    return text + (
        f"max relative change: {_percent(report.max_change)} ({', '.join(report.max_pair)})\n"
    )


def stability_json(report: StabilityReport) -> str:
    return dumps(
        {
            "pairs": [
                {
                    "x": r.x,
                    "y": r.y,
                    "ngd_a": distance_json(r.ngd_a),
                    "ngd_b": distance_json(r.ngd_b),
                    "relative_change": r.relative_change,
                }
                for r in report.rows
            ],
            "max_relative_change": report.max_change,
            "max_pair": list(report.max_pair) if report.max_pair else None,
        }
    )


def _fmt(v: Optional[float], digits: int = 2) -> str:
    return "n/a" if v is None else f"{v:.{digits}f}"


def stats_table(
    sets: Sequence[SetStatistics], consistency: Optional[ConsistencyReport], constant: float
) -> str:
    rows = [
        (s.label, str(s.n_words), str(s.pair_count), _fmt(s.mean_ngd), _fmt(s.std_ngd), _fmt(s.mean_td))
        for s in sets
    ]
    lines = [_table(["Set", "Words", "Pairs", "E[NGD]", "SD", "E[TD]"], rows)]
    for s in sets:
        for a, b, reason in s.excluded_pairs:
            lines.append(f"excluded from {s.label}: {a}, {b} ({reason})\n")
    lines.append(f"weighted E[NGD]: {constant:.4f}\n")
    if consistency is not None:
        verdict = "agree" if consistency.agrees else "disagree"
        lines.append(f"weighted E[TD]: {consistency.expected_td:.4f}\n")
        lines.append(
            f"|E[TD] - E[NGD]|: {consistency.difference:.4f} "
            f"(tolerance {consistency.tolerance:g}: {verdict})\n"
        )
    lines.append(f"calibration constant: {constant:.4f}\n")
    return "".join(lines)


def stats_json(
    sets: Sequence[SetStatistics], consistency: Optional[ConsistencyReport], constant: float
) -> str:
    doc: dict[str, Any] = {
        "sets": [
            {
                "label": s.label,
                "n_words": s.n_words,
                "pair_count": s.pair_count,
                "mean_ngd": s.mean_ngd,
                "std_ngd": s.std_ngd,
                "mean_td": s.mean_td,
                "excluded_pairs": [list(e) for e in s.excluded_pairs],
            }
            for s in sets
        ],
        "calibration_constant": constant,
    }
    if consistency is not None:
        doc["consistency"] = {
            "expected_ngd": consistency.expected_ngd,
            "expected_td": consistency.expected_td,
            "difference": consistency.difference,
            "tolerance": consistency.tolerance,
            "agrees": consistency.agrees,
        }
    return dumps(doc)
