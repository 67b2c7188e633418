"""Survival statistics: Kaplan-Meier curves, Mann-Whitney U tests,
zombie-fraction time series, lifespan cohorts, and duration distributions.

Day-granularity data is heavily tied, so the rank test uses midranks with
the tie-corrected variance, and the Kaplan-Meier estimator processes deaths
before censorings at equal times.  Survival products are computed in exact
rational arithmetic so that, with no censoring, the curve equals the
empirical survival function bit for bit.
"""

from __future__ import annotations

import itertools
import logging
import math
import statistics
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date, timedelta
from fractions import Fraction
from typing import Iterable, Sequence

from .classify import LIVE, ZOMBIE, ZombieVerdict
from .linkages import WEBPKI

log = logging.getLogger(__name__)

EXACT_ENUMERATION_LIMIT = 25_000  # max assignments enumerated by the exact test


# -- Kaplan-Meier -----------------------------------------------------------


@dataclass(frozen=True)
class KmPoint:
    time: float
    survival: float
    at_risk: int
    events: int
    censored: int


@dataclass(frozen=True)
class KmCurve:
    """Product-limit survival estimate with steps only at event times."""

    points: tuple[KmPoint, ...]
    n: int

    def survival_at(self, time: float) -> float:
        times = [p.time for p in self.points]
        idx = bisect_right(times, time)
        return self.points[idx - 1].survival if idx else 1.0


def kaplan_meier(durations: Sequence[tuple[float, bool]]) -> KmCurve:
    """Estimate survival from ``(time, observed)`` pairs.

    ``observed`` is True for an event (death) and False for a right-censored
    observation.  Deaths are processed before censorings at equal times.
    """
    if not durations:
        raise ValueError("kaplan_meier requires at least one observation")
    for time, _ in durations:
        if time < 0:
            raise ValueError("durations must be non-negative")
    deaths: dict[float, int] = {}
    censorings: dict[float, int] = {}
    for time, observed in durations:
        bucket = deaths if observed else censorings
        bucket[time] = bucket.get(time, 0) + 1
    at_risk = len(durations)
    survival = Fraction(1)
    points: list[KmPoint] = []
    for time in sorted(set(deaths) | set(censorings)):
        d = deaths.get(time, 0)
        c = censorings.get(time, 0)
        if d:
            survival *= Fraction(at_risk - d, at_risk)
            points.append(KmPoint(time, float(survival), at_risk, d, c))
        at_risk -= d + c
    return KmCurve(tuple(points), len(durations))


# -- Mann-Whitney U ----------------------------------------------------------


@dataclass(frozen=True)
class MwuResult:
    u_a: float
    u_b: float
    n_a: int
    n_b: int
    z: float
    p_two_sided: float
    tie_correction_applied: bool
    method: str


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks


def _normal_sf(x: float) -> float:
    return math.erfc(x / math.sqrt(2)) / 2


def _exact_two_sided_p(ranks: Sequence[float], n_a: int, u_obs: float) -> float:
    """P(|U - mean| >= |u_obs - mean|) over all group assignments."""
    n = len(ranks)
    mean = n_a * (n - n_a) / 2
    observed_distance = abs(u_obs - mean)
    base = n_a * (n_a + 1) / 2
    extreme = 0
    total = 0
    for combo in itertools.combinations(range(n), n_a):
        u = sum(ranks[i] for i in combo) - base
        total += 1
        if abs(u - mean) >= observed_distance - 1e-9:
            extreme += 1
    return extreme / total


def mann_whitney_u(
    group_a: Sequence[float],
    group_b: Sequence[float],
    method: str = "auto",
    continuity: bool = True,
) -> MwuResult:
    """Two-sided Mann-Whitney U test with midranks for ties.

    ``method`` is "normal" (tie-corrected variance, 0.5 continuity
    correction), "exact" (full permutation enumeration), or "auto", which
    enumerates exactly whenever that is tractable; the normal approximation
    is inaccurate for group sizes under about eight.
    """
    n_a, n_b = len(group_a), len(group_b)
    if n_a < 1 or n_b < 1:
        raise ValueError("both groups must be non-empty")
    if method not in ("auto", "normal", "exact"):
        raise ValueError(f"unknown method {method!r}")
    pooled = list(group_a) + list(group_b)
    ranks = _midranks(pooled)
    u_a = sum(ranks[:n_a]) - n_a * (n_a + 1) / 2
    u_b = n_a * n_b - u_a

    n = n_a + n_b
    tie_sizes = [len(list(g)) for _, g in itertools.groupby(sorted(pooled))]
    tie_term = sum(t**3 - t for t in tie_sizes)
    mean = n_a * n_b / 2
    variance = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        # All pooled values identical: no evidence either way.
        return MwuResult(u_a, u_b, n_a, n_b, 0.0, 1.0, True, "degenerate")

    distance = abs(u_a - mean)
    if continuity:
        distance = max(distance - 0.5, 0.0)
    z_mag = distance / math.sqrt(variance)
    z = math.copysign(z_mag, u_a - mean) if u_a != mean else 0.0

    if method == "exact" or (method == "auto" and math.comb(n, n_a) <= EXACT_ENUMERATION_LIMIT):
        p = _exact_two_sided_p(ranks, n_a, u_a)
        used = "exact"
    else:
        p = min(1.0, 2 * _normal_sf(z_mag))
        used = "normal"
    return MwuResult(u_a, u_b, n_a, n_b, z, p, tie_term > 0, used)


# -- zombie fraction time series ----------------------------------------------


@dataclass(frozen=True)
class SeriesRow:
    day: date
    active: int
    zombie: int

    @property
    def fraction(self) -> float:
        return self.zombie / self.active if self.active else 0.0


@dataclass(frozen=True)
class TimeSeries:
    rows: tuple[SeriesRow, ...]


def _zombie_from(verdict: ZombieVerdict) -> date | None:
    """First day the record proves the linkage was a zombie."""
    if verdict.status != ZOMBIE:
        return None
    if verdict.zombie_birth is not None:
        return verdict.zombie_birth
    if verdict.rereg is not None:
        # Unknown epoch end: provably a zombie by the authoritative
        # re-registration, possibly earlier.
        return verdict.rereg.next_epoch_start
    return None


def zombie_fraction_series(
    verdicts: Iterable[ZombieVerdict], start: date, end: date
) -> TimeSeries:
    """Daily active and zombie linkage counts over [start, end].

    A linkage is active from its birth (inclusive) to its death (exclusive);
    it counts as a zombie from the day its epoch provably ended while it
    remains active.
    """
    if end < start:
        raise ValueError("series end before start")
    n_days = (end - start).days + 1
    active_delta = [0] * (n_days + 1)
    zombie_delta = [0] * (n_days + 1)

    def mark(deltas: list[int], lo: date, hi_exclusive: date | None) -> None:
        lo_idx = max((lo - start).days, 0)
        hi_idx = n_days if hi_exclusive is None else min((hi_exclusive - start).days, n_days)
        if lo_idx >= hi_idx or lo_idx >= n_days:
            return
        deltas[lo_idx] += 1
        deltas[hi_idx] -= 1

    for verdict in verdicts:
        linkage = verdict.linkage
        mark(active_delta, linkage.birth, linkage.death)
        z_from = _zombie_from(verdict)
        if z_from is not None:
            mark(zombie_delta, max(z_from, linkage.birth), linkage.death)

    rows = []
    active = zombie = 0
    for i in range(n_days):
        active += active_delta[i]
        zombie += zombie_delta[i]
        if zombie > active:
            raise AssertionError("zombie count exceeded active count")
        rows.append(SeriesRow(start + timedelta(days=i), active, zombie))
    return TimeSeries(tuple(rows))


# -- lifespan cohorts ---------------------------------------------------------


@dataclass(frozen=True)
class CohortSpec:
    width_years: int = 2

    def __post_init__(self) -> None:
        if self.width_years < 1:
            raise ValueError("cohort width must be >= 1 year")


@dataclass(frozen=True)
class CohortCurves:
    cohorts: dict[str, KmCurve]
    overall: KmCurve


def _lifespan_observation(verdict: ZombieVerdict, as_of: date) -> tuple[int, bool] | None:
    epoch = verdict.birth_epoch
    if epoch is None:
        return None
    if verdict.epoch_confirmed_ended and epoch.end < as_of:
        return epoch.length_days, True
    observed_until = min(epoch.end, as_of)
    return (observed_until - epoch.start).days + 1, False


def cohort_lifespans(
    verdicts: Iterable[ZombieVerdict], cohort: CohortSpec, as_of: date
) -> CohortCurves:
    """Kaplan-Meier curves of DNS-name lifespans, grouped by linkage-creation
    period, plus the overall curve.  Ongoing epochs contribute censored
    observations, so the complementary CDFs need not reach 1.
    """
    samples: list[tuple[int, tuple[int, bool]]] = []
    for verdict in verdicts:
        observation = _lifespan_observation(verdict, as_of)
        if observation is not None:
            samples.append((verdict.linkage.birth.year, observation))
    if not samples:
        return CohortCurves({}, KmCurve((), 0))
    base_year = min(year for year, _ in samples)
    grouped: dict[str, list[tuple[int, bool]]] = {}
    for year, observation in samples:
        index = (year - base_year) // cohort.width_years
        lo = base_year + index * cohort.width_years
        hi = lo + cohort.width_years - 1
        label = f"{lo}-{hi}" if hi > lo else str(lo)
        grouped.setdefault(label, []).append(observation)
    curves = {label: kaplan_meier(obs) for label, obs in sorted(grouped.items())}
    overall = kaplan_meier([obs for _, obs in samples])
    return CohortCurves(curves, overall)


# -- duration distributions ----------------------------------------------------


@dataclass(frozen=True)
class Ecdf:
    values: tuple[float, ...]  # sorted

    @classmethod
    def from_values(cls, values: Iterable[float]) -> Ecdf:
        return cls(tuple(sorted(values)))

    @property
    def n(self) -> int:
        return len(self.values)

    def count_at_most(self, x: float) -> int:
        return bisect_right(self.values, x)

    def fraction_at(self, x: float) -> float:
        return bisect_right(self.values, x) / len(self.values) if self.values else 0.0

    def median(self) -> float | None:
        return statistics.median(self.values) if self.values else None


@dataclass(frozen=True)
class DurationReport:
    """Aligned duration distributions for completed Web PKI zombies."""

    remaining_validity: Ecdf
    observed_duration: Ecdf
    revoked_duration: Ecdf
    total: int
    revoked_count: int
    median_reduction_days: float | None
    median_reduction_fraction: float | None

    @property
    def revoked_fraction(self) -> float:
        return self.revoked_count / self.total if self.total else 0.0


def duration_distributions(verdicts: Iterable[ZombieVerdict], as_of: date) -> DurationReport:
    """Distributions over zombies whose linkage entry died by ``as_of``:
    remaining validity after DNS death (the no-revocation bound), observed
    zombie duration, and the revoked subset's observed duration.
    """
    remaining: list[float] = []
    observed: list[float] = []
    revoked: list[float] = []
    reductions: list[float] = []
    reduction_fractions: list[float] = []
    for verdict in verdicts:
        linkage = verdict.linkage
        if (
            verdict.status != ZOMBIE
            or linkage.ecosystem != WEBPKI
            or verdict.zombie_birth is None
            or linkage.death is None
            or linkage.death > as_of
        ):
            continue
        not_after_text = linkage.metadata.get("not_after")
        if not_after_text is None:
            if linkage.death_cause == "expired":
                not_after = linkage.death
            else:
                log.warning("revoked certificate %s lacks not_after metadata; skipped",
                            linkage.linked_name)
                continue
        else:
            not_after = date.fromisoformat(not_after_text)
        bound = (not_after - verdict.zombie_birth).days + 1
        actual = (linkage.death - verdict.zombie_birth).days + 1
        remaining.append(bound)
        observed.append(actual)
        if linkage.death_cause == "revoked":
            revoked.append(actual)
            reductions.append(bound - actual)
            if bound > 0:
                reduction_fractions.append((bound - actual) / bound)
    return DurationReport(
        remaining_validity=Ecdf.from_values(remaining),
        observed_duration=Ecdf.from_values(observed),
        revoked_duration=Ecdf.from_values(revoked),
        total=len(observed),
        revoked_count=len(revoked),
        median_reduction_days=statistics.median(reductions) if reductions else None,
        median_reduction_fraction=(
            statistics.median(reduction_fractions) if reduction_fractions else None
        ),
    )


# -- registration-to-linkage gaps ----------------------------------------------


@dataclass(frozen=True)
class GapReport:
    zombie_gaps: tuple[int, ...]
    nonzombie_gaps: tuple[int, ...]
    median_zombie: float | None
    median_nonzombie: float | None
    mwu: MwuResult | None


def registration_to_linkage_gaps(verdicts: Iterable[ZombieVerdict]) -> GapReport:
    """Days from epoch start to linkage creation, split zombie vs non-zombie.

    Only verdicts with an identified birth epoch contribute; when either
    population is empty the rank test is omitted with a warning.
    """
    zombie_gaps: list[int] = []
    nonzombie_gaps: list[int] = []
    for verdict in verdicts:
        if verdict.birth_epoch is None:
            continue
        gap = (verdict.linkage.birth - verdict.birth_epoch.start).days
        if verdict.status == ZOMBIE:
            zombie_gaps.append(gap)
        elif verdict.status == LIVE:
            nonzombie_gaps.append(gap)
    mwu = None
    if zombie_gaps and nonzombie_gaps:
        mwu = mann_whitney_u(zombie_gaps, nonzombie_gaps)
    else:
        log.warning("a gap population is empty; rank test omitted")
    return GapReport(
        zombie_gaps=tuple(zombie_gaps),
        nonzombie_gaps=tuple(nonzombie_gaps),
        median_zombie=statistics.median(zombie_gaps) if zombie_gaps else None,
        median_nonzombie=statistics.median(nonzombie_gaps) if nonzombie_gaps else None,
        mwu=mwu,
    )
