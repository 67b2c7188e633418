"""Attack-surface indicators computed from zombie verdicts.

Covers early-deletion (add-grace-period) statistics, how long zombie
certificates keep being served after DNS death and past re-registration,
revocation-rate comparison, the Maven publishing-activity breakdown, and the
per-attack/per-ecosystem indicator matrix.
"""

from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from datetime import date

from .classify import ZOMBIE, ZombieVerdict, is_active
from .errors import ConfigError
from .linkages import DEATH_OVERWRITTEN, DEATH_REVOKED, MAVEN, WEBPKI
from .stats import Ecdf

log = logging.getLogger(__name__)

DEFAULT_AGP_DAYS = 5

BULK_CREATION = "bulk_linked_name_creation"
NAME_SQUATTING = "linked_name_squatting"
RESOURCE_SQUATTING = "linked_resource_squatting"
NAME_TAKEOVER = "linked_name_takeover"
RESOURCE_TAKEOVER = "linked_resource_takeover"
ATTACKS = (BULK_CREATION, NAME_SQUATTING, RESOURCE_SQUATTING, NAME_TAKEOVER, RESOURCE_TAKEOVER)

PREVENTED = "prevented"
ESCALATES = "escalates"
INSUFFICIENT = "insufficient"
AVAILABLE = "available"
NO_EVIDENCE = "no_evidence"


@dataclass(frozen=True)
class ServingObservation:
    """Daily probe result: did the server still present this certificate?"""

    fingerprint: str
    day: date
    served: bool


class ServingIndex:
    """Served-day lookups per certificate, deduplicated per (cert, day)."""

    def __init__(self, observations: list[ServingObservation]):
        served: dict[str, set[date]] = {}
        seen: set[tuple[str, date]] = set()
        for obs in observations:
            key = (obs.fingerprint, obs.day)
            if key in seen:
                raise ValueError(f"duplicate serving observation for {key}")
            seen.add(key)
            if obs.served:
                served.setdefault(obs.fingerprint, set()).add(obs.day)
        self._served = {fp: sorted(days) for fp, days in served.items()}

    def days_served_in(self, fingerprint: str, first: date, last: date) -> int:
        days = self._served.get(fingerprint)
        if not days or last < first:
            return 0
        return bisect_right(days, last) - bisect_left(days, first)

    def bounds(self, fingerprint: str) -> tuple[date, date] | None:
        days = self._served.get(fingerprint)
        return (days[0], days[-1]) if days else None


# -- AGP / early-deletion statistics ------------------------------------------


@dataclass(frozen=True)
class AgpStats:
    total: int
    within_agp: int
    agp_days: int
    lifespan_histogram: tuple[tuple[int, int], ...]  # (lifespan days, count)

    @property
    def fraction(self) -> float:
        return self.within_agp / self.total if self.total else 0.0


def agp_death_stats(verdicts: list[ZombieVerdict], agp_days: int = DEFAULT_AGP_DAYS) -> AgpStats:
    """DNS lifespans of zombie-producing names and how many fall inside the
    add grace period (deletion that cheap suggests bulk name creation)."""
    histogram: Counter[int] = Counter()
    for verdict in verdicts:
        if verdict.status != ZOMBIE or verdict.birth_epoch is None:
            continue
        histogram[verdict.birth_epoch.length_days] += 1
    total = sum(histogram.values())
    within = sum(count for lifespan, count in histogram.items() if lifespan <= agp_days)
    return AgpStats(total, within, agp_days, tuple(sorted(histogram.items())))


# -- serving after DNS death ---------------------------------------------------


@dataclass(frozen=True)
class ServedAfterDeathReport:
    total: int
    never_served: int
    days_served: Ecdf

    @property
    def never_fraction(self) -> float:
        return self.never_served / self.total if self.total else 0.0

    def fraction_served_at_least(self, days: int) -> float:
        if not self.total:
            return 0.0
        return (self.total - self.days_served.count_at_most(days - 1)) / self.total


def served_after_death(
    serving: ServingIndex, verdicts: list[ZombieVerdict], as_of: date
) -> ServedAfterDeathReport:
    """Days each zombie certificate was actually served during its zombie
    window [zombie_birth, min(death, as_of)]."""
    counts: list[float] = []
    never = 0
    for verdict in verdicts:
        if verdict.status != ZOMBIE or verdict.linkage.ecosystem != WEBPKI:
            continue
        if verdict.zombie_birth is None:
            continue
        linkage = verdict.linkage
        window_end = as_of if linkage.death is None else min(linkage.death, as_of)
        bounds = serving.bounds(linkage.linked_name)
        if bounds is not None and linkage.death is not None:
            if bounds[0] < linkage.birth or bounds[1] > linkage.death:
                log.warning(
                    "serving observations for %s fall outside certificate validity; ignored",
                    linkage.linked_name,
                )
        days = serving.days_served_in(linkage.linked_name, verdict.zombie_birth, window_end)
        counts.append(days)
        if days == 0:
            never += 1
    return ServedAfterDeathReport(len(counts), never, Ecdf.from_values(counts))


# -- serving past re-registration -----------------------------------------------


@dataclass(frozen=True)
class ServedAfterReregReport:
    zombie_total: int
    overlap_count: int
    served_past_count: int
    days_served_past: Ecdf

    @property
    def overlap_fraction(self) -> float:
        return self.overlap_count / self.zombie_total if self.zombie_total else 0.0

    @property
    def served_past_fraction(self) -> float:
        return self.served_past_count / self.zombie_total if self.zombie_total else 0.0

    @property
    def median_days_served_past(self) -> float | None:
        return self.days_served_past.median()


def served_after_rereg(
    serving: ServingIndex, verdicts: list[ZombieVerdict], as_of: date
) -> ServedAfterReregReport:
    """Of zombie certificates whose validity overlaps a later registration,
    how many are still served on days past the re-registration, and for how
    long."""
    zombie_total = 0
    overlap = 0
    served_days: list[float] = []
    for verdict in verdicts:
        if verdict.status != ZOMBIE or verdict.linkage.ecosystem != WEBPKI:
            continue
        zombie_total += 1
        rereg = verdict.rereg
        if rereg is None or not rereg.overlaps_linkage_validity:
            continue
        overlap += 1
        linkage = verdict.linkage
        window_end = as_of if linkage.death is None else min(linkage.death, as_of)
        days = serving.days_served_in(linkage.linked_name, rereg.next_epoch_start, window_end)
        if days > 0:
            served_days.append(days)
    return ServedAfterReregReport(zombie_total, overlap, len(served_days), Ecdf.from_values(served_days))


# -- revocation comparison -------------------------------------------------------


@dataclass(frozen=True)
class RevocationComparison:
    reregistered_total: int
    reregistered_revoked: int
    not_reregistered_total: int
    not_reregistered_revoked: int

    @property
    def rate_reregistered(self) -> float:
        return self.reregistered_revoked / self.reregistered_total if self.reregistered_total else 0.0

    @property
    def rate_not_reregistered(self) -> float:
        return (
            self.not_reregistered_revoked / self.not_reregistered_total
            if self.not_reregistered_total
            else 0.0
        )

    @property
    def ratio(self) -> float | None:
        """Rate ratio; None (not applicable) when the baseline rate is zero."""
        if self.rate_not_reregistered == 0.0:
            return None
        return self.rate_reregistered / self.rate_not_reregistered


def revocation_comparison(verdicts: list[ZombieVerdict]) -> RevocationComparison:
    """Revocation rates for zombie certificates whose DNS names were
    re-registered versus those that were not."""
    rereg_total = rereg_revoked = plain_total = plain_revoked = 0
    for verdict in verdicts:
        if verdict.status != ZOMBIE or verdict.linkage.ecosystem != WEBPKI:
            continue
        revoked = verdict.linkage.death_cause == DEATH_REVOKED
        if verdict.rereg is not None:
            rereg_total += 1
            rereg_revoked += revoked
        else:
            plain_total += 1
            plain_revoked += revoked
    return RevocationComparison(rereg_total, rereg_revoked, plain_total, plain_revoked)


# -- Maven activity breakdown ------------------------------------------------------


@dataclass(frozen=True)
class MavenActivityBreakdown:
    """Counting hierarchy over namespaces; children sum to their parent.

    ``live`` counts every namespace not shown to be a zombie (including the
    indeterminate ones the conservative classifier refuses to call).
    """

    total: int
    live: int
    zombie_unknown_start: int
    zombie_known_start: int
    no_changes_while_zombie: int
    new_versions_while_zombie: int
    not_reregistered: int
    reregistered: int
    no_changes_after_rereg: int
    new_versions_after_rereg: int

    @property
    def zombie_total(self) -> int:
        return self.zombie_unknown_start + self.zombie_known_start

    def validate(self) -> None:
        checks = [
            self.total == self.live + self.zombie_unknown_start + self.zombie_known_start,
            self.zombie_known_start == self.no_changes_while_zombie + self.new_versions_while_zombie,
            self.new_versions_while_zombie == self.not_reregistered + self.reregistered,
            self.reregistered == self.no_changes_after_rereg + self.new_versions_after_rereg,
        ]
        if not all(checks):
            raise AssertionError("activity breakdown levels do not sum")


def maven_activity_breakdown(verdicts: list[ZombieVerdict], as_of: date) -> MavenActivityBreakdown:
    """Classify namespaces by zombie status and publishing activity.

    A namespace publishes "while zombie" when any version lands on or after
    its zombie birth, and "after re-registration" when any version lands on
    or after the next epoch's start.
    """
    total = live = unk = known = quiet = publishing = 0
    no_rereg = rereg = quiet_after = publishing_after = 0
    for verdict in verdicts:
        if verdict.linkage.ecosystem != MAVEN:
            continue
        total += 1
        if verdict.status != ZOMBIE:
            live += 1
            continue
        if verdict.zombie_birth is None:
            unk += 1
            continue
        known += 1
        publishes = [
            date.fromisoformat(text)
            for text in verdict.linkage.metadata.get("publish_times", [])
        ]
        while_zombie = [d for d in publishes if d >= verdict.zombie_birth and d <= as_of]
        if not while_zombie:
            quiet += 1
            continue
        publishing += 1
        if verdict.rereg is None:
            no_rereg += 1
            continue
        rereg += 1
        start = verdict.rereg.next_epoch_start
        if any(d >= start for d in while_zombie):
            publishing_after += 1
        else:
            quiet_after += 1
    breakdown = MavenActivityBreakdown(
        total=total,
        live=live,
        zombie_unknown_start=unk,
        zombie_known_start=known,
        no_changes_while_zombie=quiet,
        new_versions_while_zombie=publishing,
        not_reregistered=no_rereg,
        reregistered=rereg,
        no_changes_after_rereg=quiet_after,
        new_versions_after_rereg=publishing_after,
    )
    breakdown.validate()
    return breakdown


# -- indicator matrix ----------------------------------------------------------------


@dataclass(frozen=True)
class EcosystemDesign:
    """Declared design facts; these are configuration, not measurements."""

    resource_independent: bool
    validate_on_use: bool = False
    linkage_expires: bool = False


@dataclass
class EcosystemEvidence:
    """Computed attack-supporting counts for one ecosystem."""

    has_data: bool = False
    agp_zombies: int = 0
    active_zombies: int = 0
    resource_changes_while_zombie: int = 0
    zombies_overwritten: int = 0
    resource_changes_after_rereg: int = 0

    def count_for(self, attack: str) -> int:
        return {
            BULK_CREATION: self.agp_zombies,
            NAME_SQUATTING: self.active_zombies,
            RESOURCE_SQUATTING: self.resource_changes_while_zombie,
            NAME_TAKEOVER: self.zombies_overwritten,
            RESOURCE_TAKEOVER: self.resource_changes_after_rereg,
        }[attack]


def ecosystem_evidence(
    verdicts: list[ZombieVerdict],
    as_of: date,
    agp_days: int = DEFAULT_AGP_DAYS,
    breakdown: MavenActivityBreakdown | None = None,
) -> dict[str, EcosystemEvidence]:
    """Aggregate per-ecosystem supporting counts from verdicts."""
    evidence: dict[str, EcosystemEvidence] = {}
    for verdict in verdicts:
        eco = evidence.setdefault(verdict.linkage.ecosystem, EcosystemEvidence())
        eco.has_data = True
        if verdict.status != ZOMBIE:
            continue
        if verdict.birth_epoch is not None and verdict.birth_epoch.length_days <= agp_days:
            eco.agp_zombies += 1
        if is_active(verdict.linkage, as_of):
            eco.active_zombies += 1
        if verdict.linkage.death_cause == DEATH_OVERWRITTEN:
            eco.zombies_overwritten += 1
    if breakdown is not None and MAVEN in evidence:
        evidence[MAVEN].resource_changes_while_zombie = breakdown.new_versions_while_zombie
        evidence[MAVEN].resource_changes_after_rereg = breakdown.new_versions_after_rereg
    return evidence


@dataclass(frozen=True)
class IndicatorCell:
    status: str
    supporting_count: int | None = None


@dataclass(frozen=True)
class IndicatorMatrix:
    cells: dict[tuple[str, str], IndicatorCell] = field(default_factory=dict)

    def cell(self, attack: str, ecosystem: str) -> IndicatorCell:
        return self.cells[(attack, ecosystem)]


def indicator_matrix(
    evidence: dict[str, EcosystemEvidence],
    designs: dict[str, EcosystemDesign],
    overrides: dict[tuple[str, str], str] | None = None,
) -> IndicatorMatrix:
    """Resolve the per-attack, per-ecosystem indicator grid.

    Design facts decide prevented and escalates cells; everything else is a
    data finding: available when the supporting count is positive, no
    evidence when it is zero, insufficient when the ecosystem has no data.
    Explicit overrides (e.g. a dataset that cannot observe an attack) win.
    """
    overrides = overrides or {}
    cells: dict[tuple[str, str], IndicatorCell] = {}
    for ecosystem, eco_evidence in sorted(evidence.items()):
        design = designs.get(ecosystem)
        if design is None:
            raise ConfigError(f"design-config entry missing for ecosystem {ecosystem!r}")
        for attack in ATTACKS:
            key = (attack, ecosystem)
            if key in overrides:
                cells[key] = IndicatorCell(overrides[key])
                continue
            if design.validate_on_use:
                cells[key] = IndicatorCell(PREVENTED)
                continue
            if attack in (RESOURCE_SQUATTING, RESOURCE_TAKEOVER) and design.resource_independent:
                cells[key] = IndicatorCell(PREVENTED)
                continue
            if attack in (NAME_SQUATTING, NAME_TAKEOVER) and not design.resource_independent:
                cells[key] = IndicatorCell(ESCALATES)
                continue
            if not eco_evidence.has_data:
                cells[key] = IndicatorCell(INSUFFICIENT)
                continue
            count = eco_evidence.count_for(attack)
            cells[key] = IndicatorCell(AVAILABLE if count > 0 else NO_EVIDENCE, count)
    return IndicatorMatrix(cells)
