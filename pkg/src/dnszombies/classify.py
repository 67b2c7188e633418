"""Join linkages with epoch timelines to produce zombie verdicts.

A linkage is a zombie when the registration epoch that created it has
provably ended while the linkage entry remains valid.  Classification is
deliberately conservative: whenever the data cannot prove the epoch ended,
the linkage stays live or indeterminate, preferring under-counting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, timedelta

from .epochs import EpochTimeline, OwnershipInterval
from .errors import DomainMismatchError
from .linkages import ENS_GASLESS, Linkage

log = logging.getLogger(__name__)

LIVE = "live"
ZOMBIE = "zombie"
INDETERMINATE = "indeterminate"
EXEMPT = "exempt"

ONE_DAY = timedelta(days=1)


@dataclass(frozen=True)
class ReRegistrationInfo:
    """The first registration epoch following a zombie's birth epoch."""

    next_epoch_start: date
    overlaps_linkage_validity: bool


@dataclass
class ZombieVerdict:
    """Classification of one linkage against its domain's epoch timeline.

    ``zombie_birth`` is the first day after the creating epoch ended; it is
    absent for zombies whose creating epoch predates the observable record
    (the epoch end is then unknown).  ``zombie_death`` is the linkage death
    capped at the analysis date, absent for deathless entries.
    """

    linkage: Linkage
    status: str
    birth_epoch: OwnershipInterval | None = None
    zombie_birth: date | None = None
    zombie_death: date | None = None
    rereg: ReRegistrationInfo | None = None
    # Whether the record proves the birth epoch ended (independent of as_of);
    # lifespan statistics treat unconfirmed ends as censored observations.
    epoch_confirmed_ended: bool = False


def _epoch_confirmed_ended(timeline: EpochTimeline, epoch: OwnershipInterval) -> bool:
    """Whether the record proves ``epoch`` ended, beyond merely not seeing it.

    An interval that simply stops being observed less than the gap threshold
    before the window's end may still be ongoing (the absence is too short to
    count as a deletion); only a following interval, or an unobserved tail of
    at least the gap threshold, confirms the end.
    """
    if epoch.right_censored:
        return False
    if timeline.interval_after(epoch.end) is not None:
        return True
    window_end = timeline.window[1]
    return (window_end - epoch.end).days >= timeline.params.gap_threshold_days


def _rereg_info(
    linkage: Linkage, next_interval: OwnershipInterval | None, as_of: date
) -> ReRegistrationInfo | None:
    if next_interval is None or next_interval.start > as_of:
        return None
    valid_until = linkage.death if linkage.death is not None else as_of
    return ReRegistrationInfo(
        next_epoch_start=next_interval.start,
        overlaps_linkage_validity=valid_until >= next_interval.start,
    )


def classify_linkage(linkage: Linkage, timeline: EpochTimeline, as_of: date) -> ZombieVerdict:
    """Classify one linkage as of ``as_of``.

    Statuses:
      exempt         validated-on-use ecosystems cannot produce zombies
      live           the creating epoch is ongoing or its end is unconfirmed,
                     or the linkage died before the epoch did
      zombie         the creating epoch provably ended while the entry was
                     still valid; zombie_birth is the day after the epoch end
                     when the epoch is observable, otherwise unknown
      indeterminate  the creating epoch cannot be identified at all
    """
    if timeline.domain != linkage.dns_name:
        raise DomainMismatchError(
            f"timeline for {timeline.domain!r} does not match linkage {linkage.dns_name!r}"
        )
    if linkage.ecosystem == ENS_GASLESS:
        return ZombieVerdict(linkage, EXEMPT)

    epoch = timeline.interval_containing(linkage.birth)
    if epoch is not None:
        ended = _epoch_confirmed_ended(timeline, epoch)
        if not ended or epoch.end >= as_of:
            return ZombieVerdict(linkage, LIVE, birth_epoch=epoch, epoch_confirmed_ended=ended)
        zombie_birth = epoch.end + ONE_DAY
        if linkage.death is not None and linkage.death < zombie_birth:
            # The entry expired while the epoch still ran; it never outlived
            # its creating registration.
            return ZombieVerdict(linkage, LIVE, birth_epoch=epoch, epoch_confirmed_ended=True)
        return ZombieVerdict(
            linkage,
            ZOMBIE,
            birth_epoch=epoch,
            zombie_birth=zombie_birth,
            zombie_death=min(linkage.death, as_of) if linkage.death is not None else None,
            rereg=_rereg_info(linkage, timeline.interval_after(epoch.end), as_of),
            epoch_confirmed_ended=True,
        )

    # Birth is not covered by any interval.  An authoritative later start
    # proves a different epoch began after the linkage was created, so the
    # creating epoch ended at some unknown day.
    for interval in timeline.intervals:
        if interval.start > linkage.birth and interval.start_closed and interval.start <= as_of:
            if linkage.death is not None and linkage.death < interval.start:
                break  # entry may have predeceased the unknown epoch end
            return ZombieVerdict(
                linkage,
                ZOMBIE,
                zombie_death=min(linkage.death, as_of) if linkage.death is not None else None,
                rereg=_rereg_info(linkage, interval, as_of),
            )
    return ZombieVerdict(linkage, INDETERMINATE)


def zombie_duration(verdict: ZombieVerdict, as_of: date) -> tuple[int, bool] | None:
    """Days the linkage spent as a zombie, with a censoring flag.

    Returns ``(days, censored)``; censored means the zombie was still active
    at ``as_of`` (deathless entry or death past the analysis date).  Returns
    None for zombies whose birth is unknown.  Raises on non-zombie verdicts.
    """
    if verdict.status != ZOMBIE:
        raise ValueError(f"zombie_duration called on {verdict.status!r} verdict")
    if verdict.zombie_birth is None:
        return None
    if verdict.linkage.death is None or verdict.linkage.death > as_of:
        end, censored = as_of, True
    else:
        end, censored = verdict.linkage.death, False
    return (end - verdict.zombie_birth).days + 1, censored


@dataclass
class EcosystemSummary:
    total: int = 0
    active: int = 0
    zombie: int = 0
    exempt: int = 0
    indeterminate: int = 0

    @property
    def fraction(self) -> float:
        return self.zombie / self.active if self.active else 0.0


def is_active(linkage: Linkage, day: date) -> bool:
    """Whether the linkage entry is valid on ``day`` (birth inclusive, death exclusive)."""
    return linkage.birth <= day and (linkage.death is None or day < linkage.death)


def batch_classify(
    linkages: list[Linkage],
    timelines: dict[str, EpochTimeline],
    as_of: date,
) -> tuple[list[ZombieVerdict], dict[str, EcosystemSummary]]:
    """Classify every linkage; domains without timelines are indeterminate.

    The summary counts zombies among the linkages active at ``as_of`` (a
    dead entry is no longer an active zombie even if it was one).
    """
    verdicts: list[ZombieVerdict] = []
    summary: dict[str, EcosystemSummary] = {}
    missing: set[str] = set()
    for linkage in linkages:
        if linkage.ecosystem == ENS_GASLESS:
            verdict = ZombieVerdict(linkage, EXEMPT)
        else:
            timeline = timelines.get(linkage.dns_name)
            if timeline is None:
                missing.add(linkage.dns_name)
                verdict = ZombieVerdict(linkage, INDETERMINATE)
            else:
                verdict = classify_linkage(linkage, timeline, as_of)
        verdicts.append(verdict)
        bucket = summary.setdefault(linkage.ecosystem, EcosystemSummary())
        bucket.total += 1
        if is_active(linkage, as_of):
            bucket.active += 1
            if verdict.status == ZOMBIE:
                bucket.zombie += 1
        if verdict.status == EXEMPT:
            bucket.exempt += 1
        elif verdict.status == INDETERMINATE:
            bucket.indeterminate += 1
    if missing:
        log.warning("no epoch timeline for %d domain(s); marked indeterminate", len(missing))
    return verdicts, summary
