"""CSV report emission.

One file per analysis artifact, plain CSV with documented headers, written
canonically (sorted rows, fixed float repr) so identical inputs give
byte-identical reports.  Plotting is left to the consumer.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

from .dataio import atomic_write_text
from .indicators import (
    AgpStats,
    IndicatorMatrix,
    MavenActivityBreakdown,
    RevocationComparison,
    ServedAfterDeathReport,
    ServedAfterReregReport,
)
from .stats import CohortCurves, Ecdf, GapReport, KmCurve, TimeSeries


def _write_csv(path: str | Path, header: list[str], rows: Iterable[list]) -> int:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow(row)
        count += 1
    atomic_write_text(path, buffer.getvalue())
    return count


def _num(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_series_csv(path: str | Path, series: TimeSeries) -> int:
    return _write_csv(
        path,
        ["date", "active", "zombie", "fraction"],
        (
            [row.day.isoformat(), row.active, row.zombie, _num(row.fraction)]
            for row in series.rows
        ),
    )


def _km_rows(label: str, curve: KmCurve):
    for point in curve.points:
        yield [
            label,
            _num(point.time),
            _num(point.survival),
            _num(1.0 - point.survival),
            point.at_risk,
            point.events,
            point.censored,
        ]


def write_lifespans_csv(path: str | Path, curves: CohortCurves) -> int:
    rows = []
    for label, curve in curves.cohorts.items():
        rows.extend(_km_rows(label, curve))
    rows.extend(_km_rows("overall", curves.overall))
    return _write_csv(
        path,
        ["cohort", "lifespan_days", "survival", "cdf", "at_risk", "events", "censored"],
        rows,
    )


def write_km_csv(path: str | Path, curve: KmCurve) -> int:
    return _write_csv(
        path,
        ["time", "survival", "cdf", "at_risk", "events", "censored"],
        (
            [_num(p.time), _num(p.survival), _num(1.0 - p.survival), p.at_risk, p.events, p.censored]
            for p in curve.points
        ),
    )


def _ecdf_rows(label: str, ecdf: Ecdf):
    seen = set()
    for value in ecdf.values:
        if value in seen:
            continue
        seen.add(value)
        yield [label, _num(value), _num(ecdf.fraction_at(value))]


def write_durations_csv(path: str | Path, report) -> int:
    rows = []
    rows.extend(_ecdf_rows("remaining_validity", report.remaining_validity))
    rows.extend(_ecdf_rows("observed_duration", report.observed_duration))
    rows.extend(_ecdf_rows("revoked_duration", report.revoked_duration))
    return _write_csv(path, ["distribution", "days", "cumulative_fraction"], rows)


def write_durations_summary_csv(path: str | Path, report) -> int:
    rows = [
        ["total", _num(report.total)],
        ["revoked_count", _num(report.revoked_count)],
        ["revoked_fraction", _num(report.revoked_fraction)],
        ["median_observed_days", _num(report.observed_duration.median())],
        ["median_remaining_days", _num(report.remaining_validity.median())],
        ["median_reduction_days", _num(report.median_reduction_days)],
        ["median_reduction_fraction", _num(report.median_reduction_fraction)],
    ]
    return _write_csv(path, ["metric", "value"], rows)


def write_served_csv(path: str | Path, report: ServedAfterDeathReport) -> int:
    rows = list(_ecdf_rows("days_served", report.days_served))
    rows.append(["total", _num(report.total), ""])
    rows.append(["never_served", _num(report.never_served), _num(report.never_fraction)])
    return _write_csv(path, ["metric", "value", "cumulative_fraction"], rows)


def write_rereg_csv(path: str | Path, report: ServedAfterReregReport) -> int:
    rows = list(_ecdf_rows("days_served_past_rereg", report.days_served_past))
    rows.append(["zombie_total", _num(report.zombie_total), ""])
    rows.append(["overlap_count", _num(report.overlap_count), _num(report.overlap_fraction)])
    rows.append(
        ["served_past_count", _num(report.served_past_count), _num(report.served_past_fraction)]
    )
    rows.append(["median_days_served_past", _num(report.median_days_served_past), ""])
    return _write_csv(path, ["metric", "value", "fraction"], rows)


def write_revocation_csv(path: str | Path, cmp: RevocationComparison) -> int:
    rows = [
        ["reregistered_total", _num(cmp.reregistered_total)],
        ["reregistered_revoked", _num(cmp.reregistered_revoked)],
        ["rate_reregistered", _num(cmp.rate_reregistered)],
        ["not_reregistered_total", _num(cmp.not_reregistered_total)],
        ["not_reregistered_revoked", _num(cmp.not_reregistered_revoked)],
        ["rate_not_reregistered", _num(cmp.rate_not_reregistered)],
        ["ratio", _num(cmp.ratio)],
    ]
    return _write_csv(path, ["metric", "value"], rows)


def write_agp_csv(path: str | Path, stats_by_ecosystem: dict[str, AgpStats]) -> int:
    rows = []
    for ecosystem, stats in sorted(stats_by_ecosystem.items()):
        rows.append([ecosystem, "zombies_with_known_epoch", _num(stats.total)])
        rows.append([ecosystem, "within_agp", _num(stats.within_agp)])
        rows.append([ecosystem, "agp_days", _num(stats.agp_days)])
        rows.append([ecosystem, "fraction", _num(stats.fraction)])
    return _write_csv(path, ["ecosystem", "metric", "value"], rows)


def write_breakdown_csv(path: str | Path, breakdown: MavenActivityBreakdown) -> int:
    rows = [
        ["namespaces", breakdown.total],
        ["live", breakdown.live],
        ["zombie_unknown_start", breakdown.zombie_unknown_start],
        ["zombie_known_start", breakdown.zombie_known_start],
        ["no_changes_while_zombie", breakdown.no_changes_while_zombie],
        ["new_versions_while_zombie", breakdown.new_versions_while_zombie],
        ["dns_name_not_reregistered", breakdown.not_reregistered],
        ["dns_name_reregistered", breakdown.reregistered],
        ["no_changes_after_rereg", breakdown.no_changes_after_rereg],
        ["new_versions_after_rereg", breakdown.new_versions_after_rereg],
    ]
    return _write_csv(path, ["category", "count"], rows)


def write_matrix_csv(path: str | Path, matrix: IndicatorMatrix) -> int:
    rows = [
        [attack, ecosystem, cell.status, _num(cell.supporting_count)]
        for (attack, ecosystem), cell in sorted(matrix.cells.items())
    ]
    return _write_csv(path, ["attack", "ecosystem", "status", "supporting_count"], rows)


def write_gaps_csv(path: str | Path, report: GapReport) -> int:
    rows = [["zombie", _num(gap)] for gap in sorted(report.zombie_gaps)]
    rows += [["non_zombie", _num(gap)] for gap in sorted(report.nonzombie_gaps)]
    return _write_csv(path, ["population", "gap_days"], rows)


def write_gaps_summary_csv(path: str | Path, report: GapReport) -> int:
    rows = [
        ["median_zombie_days", _num(report.median_zombie)],
        ["median_non_zombie_days", _num(report.median_nonzombie)],
        ["n_zombie", _num(len(report.zombie_gaps))],
        ["n_non_zombie", _num(len(report.nonzombie_gaps))],
    ]
    if report.mwu is not None:
        rows += [
            ["u_zombie", _num(report.mwu.u_a)],
            ["u_non_zombie", _num(report.mwu.u_b)],
            ["z", _num(report.mwu.z)],
            ["p_two_sided", _num(report.mwu.p_two_sided)],
            ["method", report.mwu.method],
        ]
    return _write_csv(path, ["metric", "value"], rows)


def write_mwu_csv(path: str | Path, result) -> int:
    rows = [
        ["u_a", _num(result.u_a)],
        ["u_b", _num(result.u_b)],
        ["n_a", _num(result.n_a)],
        ["n_b", _num(result.n_b)],
        ["z", _num(result.z)],
        ["p_two_sided", _num(result.p_two_sided)],
        ["tie_correction_applied", str(result.tie_correction_applied).lower()],
        ["method", result.method],
    ]
    return _write_csv(path, ["metric", "value"], rows)


def write_summary_csv(path: str | Path, summary: dict) -> int:
    rows = []
    for ecosystem, bucket in sorted(summary.items()):
        rows.append([ecosystem, "total", bucket.total])
        rows.append([ecosystem, "active", bucket.active])
        rows.append([ecosystem, "zombie", bucket.zombie])
        rows.append([ecosystem, "exempt", bucket.exempt])
        rows.append([ecosystem, "indeterminate", bucket.indeterminate])
        rows.append([ecosystem, "fraction", _num(bucket.fraction)])
    return _write_csv(path, ["ecosystem", "metric", "value"], rows)
