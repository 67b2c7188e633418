"""File formats: observation CSVs, JSON-lines record files, epoch and verdict
persistence, and the dataset manifest.

Flat daily observations travel as CSV; nested records as JSON lines.  Both
stream row by row, so multi-million-row inputs never need to fit in memory.
All dates serialize as ISO-8601 calendar days.  Writers emit canonical,
sorted output so identical datasets produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator

from .classify import ReRegistrationInfo, ZombieVerdict
from .days import parse_day
from .epochs import EpochInferenceParams, EpochTimeline, OwnershipInterval, RdapRecord
from .errors import DataFormatError
from .indicators import ServingObservation
from .linkages import (
    ENS_GASLESS,
    ENS_ONCHAIN,
    MAVEN,
    WEBPKI,
    CertificateRecord,
    EnsClaimEvent,
    GaslessTxtRecord,
    Linkage,
    MavenVersionRecord,
)

log = logging.getLogger(__name__)

OBSERVATION_SOURCES = ("zone", "scan")


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _json_line(payload: dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _iter_json_lines(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", str(path), lineno)
            if not isinstance(payload, dict):
                raise DataFormatError("expected a JSON object", str(path), lineno)
            yield lineno, payload


def _field(payload: dict, key: str, path: str, lineno: int) -> Any:
    if key not in payload:
        raise DataFormatError(f"missing field {key!r}", path, lineno)
    return payload[key]


def _day_field(payload: dict, key: str, path: str, lineno: int) -> date:
    value = _field(payload, key, path, lineno)
    try:
        return parse_day(value)
    except DataFormatError as exc:
        raise DataFormatError(f"field {key!r}: {exc}", path, lineno)


def _optional_day(payload: dict, key: str, path: str, lineno: int) -> date | None:
    value = payload.get(key)
    if value is None:
        return None
    try:
        return parse_day(value)
    except DataFormatError as exc:
        raise DataFormatError(f"field {key!r}: {exc}", path, lineno)


# -- daily observations --------------------------------------------------------


def iter_observation_rows(path: str | Path) -> Iterator[tuple[str, date, str]]:
    """Stream validated (domain, day, source) rows from an observation CSV."""
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["domain", "date", "source"]:
            raise DataFormatError("expected header 'domain,date,source'", str(path), 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"expected 3 columns, got {len(row)}", str(path), lineno)
            domain, day_text, source = row
            if source not in OBSERVATION_SOURCES:
                raise DataFormatError(f"unknown source {source!r}", str(path), lineno)
            try:
                day = parse_day(day_text)
            except DataFormatError as exc:
                raise DataFormatError(str(exc), str(path), lineno)
            yield domain, day, source


def iter_observation_groups(path: str | Path) -> Iterator[tuple[str, set[date], set[date]]]:
    """Stream per-domain (zone_days, scan_days) groups from a CSV whose rows
    are grouped by domain (the emitter's layout).  Constant memory in the
    file size; raises if a domain's rows are split across the file.
    """
    current: str | None = None
    zone: set[date] = set()
    scan: set[date] = set()
    finished: set[str] = set()
    for domain, day, source in iter_observation_rows(path):
        if domain != current:
            if current is not None:
                finished.add(current)
                yield current, zone, scan
            if domain in finished:
                raise DataFormatError(
                    f"rows for {domain!r} are not grouped; sort the file by domain first",
                    str(path),
                )
            current, zone, scan = domain, set(), set()
        (zone if source == "zone" else scan).add(day)
    if current is not None:
        yield current, zone, scan


def load_observations(path: str | Path) -> dict[str, tuple[set[date], set[date]]]:
    """Load a whole observation file into per-domain (zone, scan) day sets.

    Accepts rows in any order and deduplicates; use the grouped iterator for
    files too large to hold.
    """
    out: dict[str, tuple[set[date], set[date]]] = {}
    for domain, day, source in iter_observation_rows(path):
        zone, scan = out.setdefault(domain, (set(), set()))
        (zone if source == "zone" else scan).add(day)
    return out


def save_observations(
    path: str | Path, groups: Iterable[tuple[str, Iterable[date], Iterable[date]]]
) -> int:
    """Write per-domain observation groups; rows sorted within each group."""
    rows = 0
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["domain", "date", "source"])
            for domain, zone, scan in groups:
                labelled = [(day, "zone") for day in zone] + [(day, "scan") for day in scan]
                for day, source in sorted(labelled):
                    writer.writerow([domain, day.isoformat(), source])
                    rows += 1
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return rows


# -- RDAP records ----------------------------------------------------------------


def load_rdap(path: str | Path) -> list[RdapRecord]:
    """Load RDAP JSON-lines records.

    Positive records without a registration date are kept (flagged by their
    None date) with a warning; some registries omit the field.
    """
    records: list[RdapRecord] = []
    flagged = 0
    for lineno, payload in _iter_json_lines(path):
        status = _field(payload, "status", str(path), lineno)
        if status not in ("positive", "negative"):
            raise DataFormatError(f"unknown status {status!r}", str(path), lineno)
        try:
            record = RdapRecord(
                domain=_field(payload, "domain", str(path), lineno),
                query_time=_day_field(payload, "query_time", str(path), lineno),
                polarity=status,
                registration_date=_optional_day(payload, "registration_date", str(path), lineno),
            )
        except DataFormatError as exc:
            if exc.line is not None:
                raise
            raise DataFormatError(str(exc), str(path), lineno)
        if record.polarity == "positive" and record.registration_date is None:
            flagged += 1
        records.append(record)
    if flagged:
        log.warning(
            "%d positive RDAP record(s) omit registration dates and cannot refine intervals",
            flagged,
        )
    return records


def save_rdap(path: str | Path, records: Iterable[RdapRecord]) -> int:
    lines = []
    for record in records:
        payload: dict[str, Any] = {
            "domain": record.domain,
            "query_time": record.query_time.isoformat(),
            "status": record.polarity,
        }
        if record.registration_date is not None:
            payload["registration_date"] = record.registration_date.isoformat()
        lines.append(_json_line(payload))
    atomic_write_text(path, "".join(lines))
    return len(lines)


# -- ecosystem linkage records ------------------------------------------------------


def _load_certificates(path: str | Path) -> list[CertificateRecord]:
    out = []
    for lineno, payload in _iter_json_lines(path):
        out.append(
            CertificateRecord(
                fqdn=_field(payload, "fqdn", str(path), lineno),
                not_before=_day_field(payload, "not_before", str(path), lineno),
                not_after=_day_field(payload, "not_after", str(path), lineno),
                fingerprint=_field(payload, "fingerprint", str(path), lineno),
                revocation_time=_optional_day(payload, "revocation_time", str(path), lineno),
            )
        )
    return out


def _load_ens_claims(path: str | Path) -> list[EnsClaimEvent]:
    out = []
    for lineno, payload in _iter_json_lines(path):
        out.append(
            EnsClaimEvent(
                dns_name=_field(payload, "dns_name", str(path), lineno),
                block_time=_day_field(payload, "block_time", str(path), lineno),
                wallet=_field(payload, "wallet", str(path), lineno),
                txn=_field(payload, "txn", str(path), lineno),
            )
        )
    return out


def _load_maven_versions(path: str | Path) -> list[MavenVersionRecord]:
    out = []
    for lineno, payload in _iter_json_lines(path):
        out.append(
            MavenVersionRecord(
                namespace=_field(payload, "namespace", str(path), lineno),
                artifact_id=_field(payload, "artifact_id", str(path), lineno),
                version=_field(payload, "version", str(path), lineno),
                publish_time=_day_field(payload, "publish_time", str(path), lineno),
            )
        )
    return out


def _load_gasless(path: str | Path) -> list[GaslessTxtRecord]:
    out = []
    for lineno, payload in _iter_json_lines(path):
        out.append(
            GaslessTxtRecord(
                dns_name=_field(payload, "dns_name", str(path), lineno),
                txt_value=_field(payload, "txt_value", str(path), lineno),
                observed=_day_field(payload, "observed", str(path), lineno),
            )
        )
    return out


_LOADERS: dict[str, Callable[[str | Path], list]] = {
    WEBPKI: _load_certificates,
    ENS_ONCHAIN: _load_ens_claims,
    MAVEN: _load_maven_versions,
    ENS_GASLESS: _load_gasless,
}


def load_linkage_records(path: str | Path, ecosystem: str) -> list:
    """Load the raw adapter inputs for one ecosystem's schema."""
    loader = _LOADERS.get(ecosystem)
    if loader is None:
        raise DataFormatError(f"unknown ecosystem {ecosystem!r}")
    return loader(path)


def save_certificates(path: str | Path, certs: Iterable[CertificateRecord]) -> int:
    lines = []
    for cert in certs:
        payload: dict[str, Any] = {
            "fqdn": cert.fqdn,
            "not_before": cert.not_before.isoformat(),
            "not_after": cert.not_after.isoformat(),
            "fingerprint": cert.fingerprint,
        }
        if cert.revocation_time is not None:
            payload["revocation_time"] = cert.revocation_time.isoformat()
        lines.append(_json_line(payload))
    atomic_write_text(path, "".join(lines))
    return len(lines)


def save_ens_claims(path: str | Path, events: Iterable[EnsClaimEvent]) -> int:
    lines = [
        _json_line(
            {
                "dns_name": event.dns_name,
                "block_time": event.block_time.isoformat(),
                "wallet": event.wallet,
                "txn": event.txn,
            }
        )
        for event in events
    ]
    atomic_write_text(path, "".join(lines))
    return len(lines)


def save_maven_versions(path: str | Path, versions: Iterable[MavenVersionRecord]) -> int:
    lines = [
        _json_line(
            {
                "namespace": record.namespace,
                "artifact_id": record.artifact_id,
                "version": record.version,
                "publish_time": record.publish_time.isoformat(),
            }
        )
        for record in versions
    ]
    atomic_write_text(path, "".join(lines))
    return len(lines)


def save_gasless(path: str | Path, records: Iterable[GaslessTxtRecord]) -> int:
    lines = [
        _json_line(
            {
                "dns_name": record.dns_name,
                "txt_value": record.txt_value,
                "observed": record.observed.isoformat(),
            }
        )
        for record in records
    ]
    atomic_write_text(path, "".join(lines))
    return len(lines)


# -- serving observations -------------------------------------------------------------


def load_serving(path: str | Path) -> list[ServingObservation]:
    out: list[ServingObservation] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["fingerprint", "date", "served"]:
            raise DataFormatError("expected header 'fingerprint,date,served'", str(path), 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataFormatError(f"expected 3 columns, got {len(row)}", str(path), lineno)
            fingerprint, day_text, served_text = row
            if served_text not in ("true", "false"):
                raise DataFormatError(f"served must be true/false, got {served_text!r}", str(path), lineno)
            try:
                day = parse_day(day_text)
            except DataFormatError as exc:
                raise DataFormatError(str(exc), str(path), lineno)
            out.append(ServingObservation(fingerprint, day, served_text == "true"))
    return out


def save_serving(path: str | Path, observations: Iterable[ServingObservation]) -> int:
    path = Path(path)
    rows = 0
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["fingerprint", "date", "served"])
            for obs in observations:
                writer.writerow([obs.fingerprint, obs.day.isoformat(), "true" if obs.served else "false"])
                rows += 1
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return rows


# -- epoch timelines ---------------------------------------------------------------------


def _interval_payload(interval: OwnershipInterval) -> dict[str, Any]:
    return {
        "start": interval.start.isoformat(),
        "end": interval.end.isoformat(),
        "start_closed": interval.start_closed,
        "right_censored": interval.right_censored,
    }


def timeline_line(timeline: EpochTimeline) -> str:
    return _json_line(
        {
            "domain": timeline.domain,
            "intervals": [_interval_payload(i) for i in timeline.intervals],
            "params": {
                "gap_threshold_days": timeline.params.gap_threshold_days,
                "grace_window_days": timeline.params.grace_window_days,
            },
            "window": [timeline.window[0].isoformat(), timeline.window[1].isoformat()],
        }
    )


def save_epochs(timelines: Iterable[EpochTimeline], path: str | Path) -> int:
    """Persist timelines as JSON lines, streaming; returns the line count."""
    path = Path(path)
    count = 0
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            for timeline in timelines:
                handle.write(timeline_line(timeline))
                count += 1
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return count


def _interval_from_payload(payload: dict, path: str, lineno: int) -> OwnershipInterval:
    return OwnershipInterval(
        start=_day_field(payload, "start", path, lineno),
        end=_day_field(payload, "end", path, lineno),
        start_closed=bool(_field(payload, "start_closed", path, lineno)),
        right_censored=bool(_field(payload, "right_censored", path, lineno)),
    )


def load_epochs(path: str | Path) -> dict[str, EpochTimeline]:
    timelines: dict[str, EpochTimeline] = {}
    for lineno, payload in _iter_json_lines(path):
        params_payload = _field(payload, "params", str(path), lineno)
        params = EpochInferenceParams(
            gap_threshold_days=params_payload["gap_threshold_days"],
            grace_window_days=params_payload["grace_window_days"],
        )
        window_payload = _field(payload, "window", str(path), lineno)
        timeline = EpochTimeline(
            domain=_field(payload, "domain", str(path), lineno),
            intervals=[
                _interval_from_payload(entry, str(path), lineno)
                for entry in _field(payload, "intervals", str(path), lineno)
            ],
            params=params,
            window=(parse_day(window_payload[0]), parse_day(window_payload[1])),
        )
        timeline.validate()
        timelines[timeline.domain] = timeline
    return timelines


# -- verdicts ---------------------------------------------------------------------------


def verdict_line(verdict: ZombieVerdict) -> str:
    linkage = verdict.linkage
    payload: dict[str, Any] = {
        "ecosystem": linkage.ecosystem,
        "dns_name": linkage.dns_name,
        "linked_name": linkage.linked_name,
        "fqdn": linkage.fqdn,
        "birth": linkage.birth.isoformat(),
        "death": linkage.death.isoformat() if linkage.death else None,
        "death_cause": linkage.death_cause,
        "metadata": linkage.metadata,
        "status": verdict.status,
        "epoch": _interval_payload(verdict.birth_epoch) if verdict.birth_epoch else None,
        "epoch_confirmed_ended": verdict.epoch_confirmed_ended,
        "zombie_birth": verdict.zombie_birth.isoformat() if verdict.zombie_birth else None,
        "zombie_death": verdict.zombie_death.isoformat() if verdict.zombie_death else None,
        "rereg": (
            {
                "next_epoch_start": verdict.rereg.next_epoch_start.isoformat(),
                "overlaps_linkage_validity": verdict.rereg.overlaps_linkage_validity,
            }
            if verdict.rereg
            else None
        ),
    }
    return _json_line(payload)


def save_verdicts(verdicts: Iterable[ZombieVerdict], path: str | Path) -> int:
    lines = [verdict_line(v) for v in verdicts]
    atomic_write_text(path, "".join(lines))
    return len(lines)


def load_verdicts(path: str | Path) -> list[ZombieVerdict]:
    out: list[ZombieVerdict] = []
    for lineno, payload in _iter_json_lines(path):
        linkage = Linkage(
            ecosystem=_field(payload, "ecosystem", str(path), lineno),
            dns_name=_field(payload, "dns_name", str(path), lineno),
            linked_name=_field(payload, "linked_name", str(path), lineno),
            birth=_day_field(payload, "birth", str(path), lineno),
            death=_optional_day(payload, "death", str(path), lineno),
            death_cause=payload.get("death_cause"),
            fqdn=payload.get("fqdn"),
            metadata=payload.get("metadata") or {},
        )
        epoch_payload = payload.get("epoch")
        rereg_payload = payload.get("rereg")
        out.append(
            ZombieVerdict(
                linkage=linkage,
                status=_field(payload, "status", str(path), lineno),
                birth_epoch=(
                    _interval_from_payload(epoch_payload, str(path), lineno)
                    if epoch_payload
                    else None
                ),
                zombie_birth=_optional_day(payload, "zombie_birth", str(path), lineno),
                zombie_death=_optional_day(payload, "zombie_death", str(path), lineno),
                rereg=(
                    ReRegistrationInfo(
                        next_epoch_start=parse_day(rereg_payload["next_epoch_start"]),
                        overlaps_linkage_validity=bool(rereg_payload["overlaps_linkage_validity"]),
                    )
                    if rereg_payload
                    else None
                ),
                epoch_confirmed_ended=bool(payload.get("epoch_confirmed_ended", False)),
            )
        )
    return out


# -- dataset manifest ---------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestFile:
    path: str
    sha256: str
    records: int


@dataclass
class DatasetManifest:
    """Input/output inventory: digests, record counts, window, and the
    effective configuration, for byte-reproducible re-runs."""

    files: dict[str, ManifestFile]
    config: dict[str, Any]
    window: tuple[date, date] | None = None

    def to_json(self) -> str:
        payload: dict[str, Any] = {
            "files": {
                name: {"path": entry.path, "sha256": entry.sha256, "records": entry.records}
                for name, entry in sorted(self.files.items())
            },
            "config": self.config,
            "window": (
                [self.window[0].isoformat(), self.window[1].isoformat()] if self.window else None
            ),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        atomic_write_text(path, self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> DatasetManifest:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        window = payload.get("window")
        return cls(
            files={
                name: ManifestFile(entry["path"], entry["sha256"], entry["records"])
                for name, entry in payload["files"].items()
            },
            config=payload.get("config", {}),
            window=(parse_day(window[0]), parse_day(window[1])) if window else None,
        )

    def verify_digests(self, base_dir: str | Path = ".") -> None:
        for name, entry in self.files.items():
            path = Path(base_dir) / entry.path
            actual = sha256_file(path)
            if actual != entry.sha256:
                raise DataFormatError(
                    f"digest mismatch for {name} ({entry.path}): "
                    f"expected {entry.sha256}, got {actual}"
                )


def manifest_entry(name: str, path: str | Path, records: int, base_dir: str | Path | None = None) -> tuple[str, ManifestFile]:
    rel = os.path.relpath(path, base_dir) if base_dir is not None else str(path)
    return name, ManifestFile(rel, sha256_file(path), records)
