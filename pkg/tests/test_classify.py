"""Tests for zombie classification."""

from __future__ import annotations

import random
from datetime import date, timedelta

import pytest

from dnszombies.classify import (
    EXEMPT,
    INDETERMINATE,
    LIVE,
    ZOMBIE,
    batch_classify,
    classify_linkage,
    zombie_duration,
)
from dnszombies.epochs import EpochInferenceParams, EpochTimeline, OwnershipInterval
from dnszombies.errors import DomainMismatchError
from dnszombies.linkages import Linkage

D = date
PARAMS = EpochInferenceParams()
WINDOW = (D(2024, 1, 1), D(2026, 6, 1))


def timeline(*intervals: OwnershipInterval, domain="a.com", window=WINDOW) -> EpochTimeline:
    return EpochTimeline(domain, list(intervals), PARAMS, window)


def linkage(birth: date, death: date | None = None, ecosystem="ens_onchain", **kw) -> Linkage:
    cause = kw.pop("death_cause", "expired" if death else None)
    return Linkage(ecosystem, "a.com", "linked", birth, death=death, death_cause=cause, **kw)


def test_zombie_in_ended_epoch():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    verdict = classify_linkage(linkage(D(2025, 2, 1)), tl, as_of=D(2025, 9, 1))
    assert verdict.status == ZOMBIE
    assert verdict.zombie_birth == D(2025, 5, 2)
    assert verdict.zombie_death is None  # deathless entry
    assert verdict.rereg is None


def test_live_in_right_censored_epoch():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), WINDOW[1], right_censored=True))
    verdict = classify_linkage(linkage(D(2025, 2, 1)), tl, as_of=D(2026, 6, 1))
    assert verdict.status == LIVE


def test_live_when_epoch_extends_to_as_of():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    verdict = classify_linkage(linkage(D(2025, 2, 1)), tl, as_of=D(2025, 5, 1))
    assert verdict.status == LIVE


def test_live_when_epoch_end_unconfirmed():
    # The interval stops 10 days before the window ends with no later
    # interval: the absence is below the gap threshold, so the epoch may
    # still be ongoing and the linkage stays live.
    end = WINDOW[1] - timedelta(days=10)
    tl = timeline(OwnershipInterval(D(2025, 1, 1), end))
    verdict = classify_linkage(linkage(D(2025, 2, 1)), tl, as_of=WINDOW[1])
    assert verdict.status == LIVE
    # A later interval confirms the end regardless of the tail length.
    tl2 = timeline(
        OwnershipInterval(D(2025, 1, 1), end),
        OwnershipInterval(WINDOW[1] - timedelta(days=2), WINDOW[1], start_closed=True, right_censored=True),
    )
    verdict2 = classify_linkage(linkage(D(2025, 2, 1)), tl2, as_of=WINDOW[1])
    assert verdict2.status == ZOMBIE


def test_indeterminate_when_birth_uncovered():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    verdict = classify_linkage(linkage(D(2024, 6, 1)), tl, as_of=D(2025, 9, 1))
    assert verdict.status == INDETERMINATE


def test_zombie_with_unknown_start_via_closed_later_interval():
    # Birth predates the record, but an authoritative later start proves the
    # creating epoch ended.
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1), start_closed=True))
    verdict = classify_linkage(linkage(D(2024, 6, 1)), tl, as_of=D(2025, 9, 1))
    assert verdict.status == ZOMBIE
    assert verdict.birth_epoch is None
    assert verdict.zombie_birth is None
    assert verdict.rereg is not None
    assert verdict.rereg.next_epoch_start == D(2025, 1, 1)
    # An open later start is not authoritative: stays indeterminate.
    tl_open = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    assert classify_linkage(linkage(D(2024, 6, 1)), tl_open, as_of=D(2025, 9, 1)).status == INDETERMINATE


def test_gasless_is_exempt():
    verdict = classify_linkage(
        linkage(D(2025, 1, 1), ecosystem="ens_gasless"),
        timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1))),
        as_of=D(2025, 9, 1),
    )
    assert verdict.status == EXEMPT


def test_entry_that_predeceases_epoch_never_zombie():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    verdict = classify_linkage(
        linkage(D(2025, 1, 2), death=D(2025, 3, 1), ecosystem="webpki"),
        tl,
        as_of=D(2025, 9, 1),
    )
    assert verdict.status == LIVE


def test_domain_mismatch_raises():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)), domain="b.com")
    with pytest.raises(DomainMismatchError):
        classify_linkage(linkage(D(2025, 2, 1)), tl, as_of=D(2025, 9, 1))


def test_rereg_info_with_overlap():
    tl = timeline(
        OwnershipInterval(D(2025, 1, 1), D(2025, 2, 1)),
        OwnershipInterval(D(2025, 6, 1), D(2025, 8, 1), start_closed=True),
    )
    expires = D(2025, 7, 1)
    verdict = classify_linkage(
        linkage(D(2025, 1, 5), death=expires, ecosystem="webpki"), tl, as_of=D(2025, 9, 1)
    )
    assert verdict.status == ZOMBIE
    assert verdict.zombie_birth == D(2025, 2, 2)
    assert verdict.zombie_death == expires
    assert verdict.rereg.next_epoch_start == D(2025, 6, 1)
    assert verdict.rereg.overlaps_linkage_validity
    # Re-registration after expiry: no overlap.
    verdict2 = classify_linkage(
        linkage(D(2025, 1, 5), death=D(2025, 5, 1), ecosystem="webpki"), tl, as_of=D(2025, 9, 1)
    )
    assert not verdict2.rereg.overlaps_linkage_validity


def test_rereg_ignored_until_it_happens():
    tl = timeline(
        OwnershipInterval(D(2025, 1, 1), D(2025, 2, 1)),
        OwnershipInterval(D(2026, 5, 1), D(2026, 6, 1), start_closed=True, right_censored=True),
    )
    verdict = classify_linkage(linkage(D(2025, 1, 5)), tl, as_of=D(2025, 9, 1))
    assert verdict.status == ZOMBIE
    assert verdict.rereg is None


# -- durations ---------------------------------------------------------------


def test_zombie_duration_inclusive_counting():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    expiry = D(2025, 7, 30)
    verdict = classify_linkage(
        linkage(D(2025, 1, 2), death=expiry, ecosystem="webpki"), tl, as_of=D(2025, 9, 1)
    )
    assert verdict.zombie_birth == D(2025, 5, 2)
    days, censored = zombie_duration(verdict, as_of=D(2025, 9, 1))
    # Calendar oracle: May 2..31 is 30 days, June 30, July 30.
    assert days == 90
    assert not censored


def test_zombie_duration_censored_for_deathless():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    verdict = classify_linkage(linkage(D(2025, 1, 2), ecosystem="maven"), tl, as_of=D(2025, 9, 1))
    days, censored = zombie_duration(verdict, as_of=D(2025, 9, 1))
    assert censored
    assert days == (D(2025, 9, 1) - D(2025, 5, 2)).days + 1


def test_zombie_duration_rejects_non_zombie():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), WINDOW[1], right_censored=True))
    verdict = classify_linkage(linkage(D(2025, 1, 2)), tl, as_of=D(2025, 9, 1))
    with pytest.raises(ValueError):
        zombie_duration(verdict, as_of=D(2025, 9, 1))


# -- batch -------------------------------------------------------------------


def test_batch_counts_and_missing_timelines():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), D(2025, 5, 1)))
    links = [
        linkage(D(2025, 2, 1)),
        linkage(D(2025, 2, 1), ecosystem="ens_gasless"),
        Linkage("maven", "missing.com", "com.missing", D(2025, 2, 1)),
    ]
    verdicts, summary = batch_classify(links, {"a.com": tl}, as_of=D(2025, 9, 1))
    assert [v.status for v in verdicts] == [ZOMBIE, EXEMPT, INDETERMINATE]
    assert summary["ens_onchain"].zombie == 1
    assert summary["ens_onchain"].active == 1
    assert summary["ens_gasless"].exempt == 1
    assert summary["maven"].indeterminate == 1
    assert sum(s.total for s in summary.values()) == len(links)


def test_batch_all_live_world_has_zero_fraction():
    tl = timeline(OwnershipInterval(D(2025, 1, 1), WINDOW[1], right_censored=True))
    links = [linkage(D(2025, 1, 1) + timedelta(days=i)) for i in range(20)]
    _, summary = batch_classify(links, {"a.com": tl}, as_of=D(2026, 1, 1))
    assert summary["ens_onchain"].fraction == 0.0


def test_validate_once_monotonicity_small():
    # Advancing as_of never flips zombie back to live for validate-once
    # ecosystems (epoch timelines are fixed).
    rng = random.Random(23)
    order = {LIVE: 0, INDETERMINATE: 0, ZOMBIE: 1}
    for _ in range(50):
        end = D(2025, 1, 1) + timedelta(days=rng.randint(30, 200))
        intervals = [OwnershipInterval(D(2025, 1, 1), end)]
        if rng.random() < 0.5:
            start2 = end + timedelta(days=rng.randint(81, 200))
            intervals.append(OwnershipInterval(start2, start2 + timedelta(days=30), start_closed=rng.random() < 0.5))
        tl = timeline(*intervals)
        link = linkage(D(2025, 1, 1) + timedelta(days=rng.randint(0, 29)), ecosystem="maven")
        statuses = [
            classify_linkage(link, tl, as_of=WINDOW[0] + timedelta(days=offset)).status
            for offset in range(370, (WINDOW[1] - WINDOW[0]).days, 37)
        ]
        assert all(order[a] <= order[b] for a, b in zip(statuses, statuses[1:]))
