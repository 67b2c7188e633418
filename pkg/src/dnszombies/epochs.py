"""Registration-epoch inference from delegation, scan, and RDAP observations.

A domain's presence is observed one calendar day at a time (zone delegation
and active scans).  Runs of observed days form candidate registration
intervals; RDAP records refine interval starts and prevent or force merges;
a final pass merges intervals separated by gaps shorter than the configured
threshold.  The phases are pure functions over per-domain inputs, so domains
can be processed independently and in parallel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import Iterable, Sequence

from .days import bounding_span
from .errors import DataFormatError, EmptyObservationsError

log = logging.getLogger(__name__)

ONE_DAY = timedelta(days=1)

ORIGIN_OBSERVED = "observed"
ORIGIN_RDAP = "rdap_synthesized"

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class EpochInferenceParams:
    """Tunable sensitivity of the inference.

    ``gap_threshold_days`` is the shortest absence treated as evidence of
    deletion; shorter gaps are assumed to be transient lapses and merged.
    ``grace_window_days`` tolerates small misalignment between RDAP-reported
    registration dates and observation-derived interval starts.
    """

    gap_threshold_days: int = 80
    grace_window_days: int = 2

    def __post_init__(self) -> None:
        if self.gap_threshold_days < 1:
            raise ValueError("gap_threshold_days must be >= 1")
        if self.grace_window_days < 0:
            raise ValueError("grace_window_days must be >= 0")


@dataclass(frozen=True)
class RdapRecord:
    """One registration-data lookup result for a domain.

    A positive record carries the start date of the registration that was
    current at query time; registries that omit the date produce positives
    with ``registration_date=None``, which are kept but unusable for interval
    refinement.  A negative record asserts no registration was active.
    """

    domain: str
    query_time: date
    polarity: str
    registration_date: date | None = None

    def __post_init__(self) -> None:
        if self.polarity not in (POSITIVE, NEGATIVE):
            raise DataFormatError(f"unknown RDAP polarity {self.polarity!r}")
        if self.polarity == NEGATIVE and self.registration_date is not None:
            raise DataFormatError("negative RDAP record cannot carry a registration date")
        if self.registration_date is not None and self.registration_date > self.query_time:
            raise DataFormatError("registration_date must not be after query_time")


@dataclass(frozen=True)
class ObservationBitset:
    """Per-domain daily presence bits with per-source provenance.

    ``bits`` is an integer bitmask; bit ``i`` is set when the domain was
    observed on ``first_day + i`` days.  Bit 0 and the highest bit are always
    set (the mask spans exactly the observed extent), and every set
    provenance bit implies the corresponding presence bit.
    """

    domain: str
    first_day: date
    bits: int
    zone_bits: int = 0
    scan_bits: int = 0

    def __post_init__(self) -> None:
        if self.bits <= 0:
            raise EmptyObservationsError(f"no observations for {self.domain}")
        if not self.bits & 1:
            raise ValueError("first_day must be an observed day")
        if self.bits != self.zone_bits | self.scan_bits:
            raise ValueError("presence bits must equal the union of source bits")

    @property
    def day_count(self) -> int:
        return self.bits.bit_length()

    @property
    def last_day(self) -> date:
        return self.first_day + timedelta(days=self.day_count - 1)

    def observed(self, day: date) -> bool:
        offset = (day - self.first_day).days
        if offset < 0:
            return False
        return bool(self.bits >> offset & 1)

    def sources_for(self, day: date) -> set[str]:
        offset = (day - self.first_day).days
        if offset < 0:
            return set()
        out = set()
        if self.zone_bits >> offset & 1:
            out.add("zone")
        if self.scan_bits >> offset & 1:
            out.add("scan")
        return out

    def days(self) -> list[date]:
        base = self.first_day.toordinal()
        return [date.fromordinal(base + i) for i in range(self.day_count) if self.bits >> i & 1]

    @classmethod
    def from_days(
        cls, domain: str, zone_obs: Iterable[date], scan_obs: Iterable[date]
    ) -> ObservationBitset:
        return build_observation_bitset(domain, zone_obs, scan_obs)

    @classmethod
    def from_ranges(
        cls,
        domain: str,
        zone_ranges: Iterable[tuple[date, date]],
        scan_ranges: Iterable[tuple[date, date]] = (),
    ) -> ObservationBitset:
        """Build from inclusive (first, last) day ranges per source.

        Ranges are the compact path for large synthetic inputs; a range of n
        days costs O(1) bitmask operations instead of n per-day inserts.
        """
        zone = [(a.toordinal(), b.toordinal()) for a, b in zone_ranges]
        scan = [(a.toordinal(), b.toordinal()) for a, b in scan_ranges]
        spans = zone + scan
        if not spans:
            raise EmptyObservationsError(f"no observations for {domain}")
        base = min(a for a, _ in spans)
        zone_bits = _mask_from_ordinal_ranges(zone, base)
        scan_bits = _mask_from_ordinal_ranges(scan, base)
        return cls(
            domain=domain,
            first_day=date.fromordinal(base),
            bits=zone_bits | scan_bits,
            zone_bits=zone_bits,
            scan_bits=scan_bits,
        )


@dataclass
class OwnershipInterval:
    """One inferred registration interval, inclusive on both ends.

    ``start_closed`` marks a start confirmed by RDAP (it may not be merged
    into an earlier interval).  ``merge_next`` is a Phase 3 hint consumed by
    Phase 4.  ``right_censored`` marks an interval that reaches the end of
    the observation window and is therefore treated as ongoing.
    """

    start: date
    end: date
    start_closed: bool = False
    right_censored: bool = False
    merge_next: bool = False
    origin: str = ORIGIN_OBSERVED

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} after end {self.end}")

    @property
    def length_days(self) -> int:
        return (self.end - self.start).days + 1

    def covers(self, day: date) -> bool:
        return self.start <= day <= self.end


@dataclass
class EpochTimeline:
    """Ordered, non-overlapping registration intervals for one domain."""

    domain: str
    intervals: list[OwnershipInterval]
    params: EpochInferenceParams
    window: tuple[date, date]

    def interval_containing(self, day: date) -> OwnershipInterval | None:
        for interval in self.intervals:
            if interval.start > day:
                return None
            if interval.end >= day:
                return interval
        return None

    def interval_after(self, day: date) -> OwnershipInterval | None:
        """First interval starting strictly after ``day``."""
        for interval in self.intervals:
            if interval.start > day:
                return interval
        return None

    def validate(self) -> None:
        prev_end: date | None = None
        for interval in self.intervals:
            if prev_end is not None and interval.start <= prev_end:
                raise ValueError(f"{self.domain}: intervals overlap or are unsorted")
            prev_end = interval.end


def _mask_from_ordinal_ranges(ranges: Sequence[tuple[int, int]], base: int) -> int:
    mask = 0
    for first, last in ranges:
        if last < first:
            raise ValueError("range end before start")
        mask |= ((1 << (last - first + 1)) - 1) << (first - base)
    return mask


def build_observation_bitset(
    domain: str, zone_obs: Iterable[date], scan_obs: Iterable[date]
) -> ObservationBitset:
    """Phase 1: union zone and scan observation days into one bitset."""
    zone_days = set(zone_obs)
    scan_days = set(scan_obs)
    span = bounding_span(zone_days | scan_days)
    if span is None:
        raise EmptyObservationsError(f"no observations for {domain}")
    base = span[0].toordinal()
    zone_bits = 0
    for day in zone_days:
        zone_bits |= 1 << (day.toordinal() - base)
    scan_bits = 0
    for day in scan_days:
        scan_bits |= 1 << (day.toordinal() - base)
    return ObservationBitset(
        domain=domain,
        first_day=span[0],
        bits=zone_bits | scan_bits,
        zone_bits=zone_bits,
        scan_bits=scan_bits,
    )


def _iter_runs(bits: int) -> Iterable[tuple[int, int]]:
    """Yield (offset, length) for each maximal run of set bits."""
    x = bits
    while x:
        low = x & -x
        offset = low.bit_length() - 1
        shifted = x >> offset
        length = (shifted ^ (shifted + 1)).bit_length() - 1
        yield offset, length
        # Adding the low bit carries through the run and clears it.
        x &= x + low


def extract_runs(bitset: ObservationBitset, window_end: date | None = None) -> list[OwnershipInterval]:
    """Phase 2: one open interval per maximal run of observed days.

    The last interval is right-censored when it touches ``window_end`` (the
    final day of the observation window; defaults to the last observed day).
    """
    if window_end is None:
        window_end = bitset.last_day
    base = bitset.first_day.toordinal()
    intervals = [
        OwnershipInterval(
            start=date.fromordinal(base + offset),
            end=date.fromordinal(base + offset + length - 1),
        )
        for offset, length in _iter_runs(bitset.bits)
    ]
    if intervals and intervals[-1].end == window_end:
        intervals[-1].right_censored = True
    return intervals


def _dedup_positives(positives: Iterable[RdapRecord]) -> list[RdapRecord]:
    # Keep the record with the latest query time per registration date, then
    # process in ascending registration-date order.
    latest: dict[date, RdapRecord] = {}
    for record in positives:
        if record.registration_date is None:
            raise DataFormatError(f"positive RDAP record for {record.domain} has no registration date")
        kept = latest.get(record.registration_date)
        if kept is None or record.query_time > kept.query_time:
            latest[record.registration_date] = record
    return [latest[reg] for reg in sorted(latest)]


def _locate_or_synthesize(intervals: list[OwnershipInterval], day: date) -> int:
    """Index of the interval covering ``day``, synthesizing a one-day interval if none."""
    for i, interval in enumerate(intervals):
        if interval.covers(day):
            return i
        if interval.start > day:
            intervals.insert(i, OwnershipInterval(start=day, end=day, origin=ORIGIN_RDAP))
            return i
    intervals.append(OwnershipInterval(start=day, end=day, origin=ORIGIN_RDAP))
    return len(intervals) - 1


def apply_rdap_positives(
    intervals: Sequence[OwnershipInterval],
    positives: Iterable[RdapRecord],
    grace_window_days: int,
) -> list[OwnershipInterval]:
    """Phase 3a: close or split interval starts at authoritative registration dates.

    For each deduplicated positive record, the interval containing the
    registration date gains a closed start (splitting when the date falls
    more than the grace window past the interval start), and every interval
    from there up to the one containing the query time is marked mergeable:
    the domain was continuously registered between the two dates, so any
    observation gaps in between are known to be transient.
    """
    result = [replace(interval) for interval in intervals]
    for record in _dedup_positives(positives):
        reg = record.registration_date
        assert reg is not None
        reg_idx = _locate_or_synthesize(result, reg)
        obs_idx = _locate_or_synthesize(result, record.query_time)
        target = result[reg_idx]
        if (reg - target.start).days <= grace_window_days:
            target.start_closed = True
        else:
            left = replace(target, end=reg - ONE_DAY, right_censored=False, merge_next=False)
            right = replace(target, start=reg, start_closed=True)
            result[reg_idx : reg_idx + 1] = [left, right]
            reg_idx += 1
            obs_idx += 1
        for interval in result[reg_idx:obs_idx]:
            interval.merge_next = True
    return result


def _day_distance(interval: OwnershipInterval, day: date) -> int:
    """Distance in days from ``day`` to the nearest covered day (0 when inside)."""
    if day < interval.start:
        return (interval.start - day).days
    if day > interval.end:
        return (day - interval.end).days
    return 0


def apply_rdap_negatives(
    intervals: Sequence[OwnershipInterval],
    negatives: Iterable[RdapRecord],
    grace_window_days: int,
) -> list[OwnershipInterval]:
    """Phase 3b: a confirmed non-registration pins the next interval's start.

    A negative response further than the grace window from every interval
    proves the following interval (if any) began with a fresh registration,
    so Phase 4 may not merge across it.
    """
    result = [replace(interval) for interval in intervals]
    for record in sorted(negatives, key=lambda r: r.query_time):
        if record.polarity != NEGATIVE:
            raise DataFormatError(f"expected negative RDAP record for {record.domain}")
        distances = [_day_distance(interval, record.query_time) for interval in result]
        if any(d == 0 for d in distances):
            log.warning(
                "negative RDAP response for %s on %s conflicts with same-day "
                "presence evidence; preferring delegation",
                record.domain,
                record.query_time,
            )
            continue
        if distances and min(distances) <= grace_window_days:
            continue
        for interval in result:
            if interval.start > record.query_time:
                interval.start_closed = True
                break
    return result


def merge_adjacent(
    intervals: Sequence[OwnershipInterval], params: EpochInferenceParams
) -> list[OwnershipInterval]:
    """Phase 4: merge adjacent intervals separated by sub-threshold gaps.

    A pair merges when the later start is not closed and either the gap
    (days strictly between the two intervals) is below the threshold or the
    earlier interval carries a merge hint.  The pass is idempotent.
    """
    merged: list[OwnershipInterval] = []
    for interval in (replace(i) for i in intervals):
        if merged:
            prev = merged[-1]
            gap = (interval.start - prev.end).days - 1
            if not interval.start_closed and (gap < params.gap_threshold_days or prev.merge_next):
                prev.end = interval.end
                prev.right_censored = interval.right_censored
                prev.merge_next = interval.merge_next
                if interval.origin == ORIGIN_OBSERVED:
                    prev.origin = ORIGIN_OBSERVED
                continue
        merged.append(interval)
    return merged


def infer_epochs(
    domain: str,
    zone_obs: Iterable[date],
    scan_obs: Iterable[date],
    rdap: Iterable[RdapRecord] = (),
    params: EpochInferenceParams | None = None,
    window: tuple[date, date] | None = None,
) -> EpochTimeline:
    """Run all four inference phases for one domain.

    ``window`` is the (first, last) observable day of the dataset; it
    defaults to the domain's own observed extent.  RDAP positives lacking a
    registration date are skipped with a warning.
    """
    bitset = build_observation_bitset(domain, zone_obs, scan_obs)
    return infer_epochs_from_bitset(bitset, rdap, params, window)


def infer_epochs_from_bitset(
    bitset: ObservationBitset,
    rdap: Iterable[RdapRecord] = (),
    params: EpochInferenceParams | None = None,
    window: tuple[date, date] | None = None,
) -> EpochTimeline:
    if params is None:
        params = EpochInferenceParams()
    if window is None:
        window = (bitset.first_day, bitset.last_day)
    elif not (window[0] <= bitset.first_day and bitset.last_day <= window[1]):
        raise ValueError(f"{bitset.domain}: observations fall outside the window {window}")

    intervals = extract_runs(bitset, window_end=window[1])

    positives = []
    negatives = []
    for record in rdap:
        if record.polarity == POSITIVE:
            if record.registration_date is None:
                log.warning(
                    "positive RDAP record for %s at %s omits the registration date; "
                    "unusable for refinement",
                    record.domain,
                    record.query_time,
                )
                continue
            positives.append(record)
        else:
            negatives.append(record)
    if positives:
        intervals = apply_rdap_positives(intervals, positives, params.grace_window_days)
    if negatives:
        intervals = apply_rdap_negatives(intervals, negatives, params.grace_window_days)

    intervals = merge_adjacent(intervals, params)

    timeline = EpochTimeline(bitset.domain, intervals, params, window)
    timeline.validate()
    return timeline
