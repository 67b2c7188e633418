"""Tests for attack-surface indicators."""

from __future__ import annotations

from datetime import date, timedelta

import pytest

from dnszombies.classify import ReRegistrationInfo, ZombieVerdict
from dnszombies.epochs import OwnershipInterval
from dnszombies.errors import ConfigError
from dnszombies.indicators import (
    AVAILABLE,
    ESCALATES,
    INSUFFICIENT,
    NO_EVIDENCE,
    PREVENTED,
    BULK_CREATION,
    NAME_SQUATTING,
    NAME_TAKEOVER,
    RESOURCE_SQUATTING,
    RESOURCE_TAKEOVER,
    EcosystemDesign,
    EcosystemEvidence,
    ServingIndex,
    ServingObservation,
    agp_death_stats,
    ecosystem_evidence,
    indicator_matrix,
    maven_activity_breakdown,
    revocation_comparison,
    served_after_death,
    served_after_rereg,
)
from dnszombies.linkages import Linkage

D = date
AS_OF = D(2026, 4, 15)

DESIGNS = {
    "webpki": EcosystemDesign(resource_independent=True, linkage_expires=True),
    "ens_onchain": EcosystemDesign(resource_independent=True),
    "ens_gasless": EcosystemDesign(resource_independent=True, validate_on_use=True),
    "maven": EcosystemDesign(resource_independent=False),
}


def epoch(start: date, days: int) -> OwnershipInterval:
    return OwnershipInterval(start, start + timedelta(days=days - 1))


def verdict(
    ecosystem: str,
    birth: date,
    lifespan: int | None = 100,
    death: date | None = None,
    death_cause: str | None = None,
    rereg_start: date | None = None,
    overlaps: bool = True,
    fingerprint: str = "fp",
    publish_times: list[date] | None = None,
    status: str = "zombie",
) -> ZombieVerdict:
    metadata = {}
    if publish_times is not None:
        metadata["publish_times"] = [d.isoformat() for d in publish_times]
    if ecosystem == "webpki" and death is not None:
        metadata.setdefault("not_after", death.isoformat())
    linkage = Linkage(
        ecosystem, "a.com", fingerprint, birth, death=death, death_cause=death_cause,
        metadata=metadata,
    )
    birth_epoch = epoch(birth, lifespan) if lifespan is not None else None
    zombie_birth = None
    if status == "zombie" and birth_epoch is not None:
        zombie_birth = birth_epoch.end + timedelta(days=1)
    rereg = None
    if rereg_start is not None:
        rereg = ReRegistrationInfo(rereg_start, overlaps)
    return ZombieVerdict(
        linkage,
        status,
        birth_epoch=birth_epoch,
        zombie_birth=zombie_birth,
        rereg=rereg,
        epoch_confirmed_ended=status == "zombie",
    )


# -- AGP ----------------------------------------------------------------------


def test_agp_counts_short_lifespans():
    verdicts = [
        verdict("webpki", D(2025, 10, 1), lifespan=3, death=D(2026, 1, 1), death_cause="expired"),
        verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2026, 1, 1), death_cause="expired"),
        verdict("webpki", D(2025, 10, 1), lifespan=16, death=D(2026, 1, 1), death_cause="expired"),
        verdict("webpki", D(2025, 10, 1), lifespan=30, status="live"),
    ]
    stats = agp_death_stats(verdicts, agp_days=5)
    assert stats.total == 3
    assert stats.within_agp == 2
    assert stats.lifespan_histogram == ((3, 1), (5, 1), (16, 1))


def test_agp_unknown_start_zombies_excluded():
    stats = agp_death_stats([verdict("maven", D(2020, 1, 1), lifespan=None)])
    assert stats.total == 0


# -- serving ------------------------------------------------------------------


def serving_index(fingerprint: str, days: list[date]) -> ServingIndex:
    return ServingIndex([ServingObservation(fingerprint, d, True) for d in days])


def test_served_after_death_counts_window_days():
    v = verdict(
        "webpki", D(2025, 10, 1), lifespan=10,
        death=D(2026, 1, 7), death_cause="expired", fingerprint="c1",
    )
    zb = v.zombie_birth
    index = serving_index("c1", [zb + timedelta(days=i) for i in range(60)])
    report = served_after_death(index, [v], AS_OF)
    assert report.total == 1
    assert report.days_served.values == (60,)
    assert report.never_served == 0
    assert report.fraction_served_at_least(60) == 1.0


def test_served_after_death_never_served():
    v = verdict("webpki", D(2025, 10, 1), lifespan=10, death=D(2026, 1, 7), death_cause="expired")
    report = served_after_death(ServingIndex([]), [v], AS_OF)
    assert report.never_served == 1
    assert report.never_fraction == 1.0


def test_served_observations_outside_validity_warn(caplog):
    v = verdict(
        "webpki", D(2025, 10, 1), lifespan=10,
        death=D(2026, 1, 7), death_cause="expired", fingerprint="c1",
    )
    index = serving_index("c1", [D(2026, 3, 1)])  # after death
    with caplog.at_level("WARNING"):
        report = served_after_death(index, [v], AS_OF)
    assert "outside certificate validity" in caplog.text
    assert report.days_served.values == (0,)


def test_serving_index_rejects_duplicates():
    rows = [
        ServingObservation("c1", D(2026, 1, 1), True),
        ServingObservation("c1", D(2026, 1, 1), False),
    ]
    with pytest.raises(ValueError):
        ServingIndex(rows)


def test_served_after_rereg_overlap_and_median():
    certs = []
    index_rows = []
    for i, past_days in enumerate((10, 49, 300)):
        death = D(2026, 2, 1)
        v = verdict(
            "webpki", D(2025, 10, 1), lifespan=10, death=death, death_cause="expired",
            rereg_start=D(2025, 11, 1), fingerprint=f"c{i}",
        )
        certs.append(v)
        index_rows += [
            ServingObservation(f"c{i}", D(2025, 11, 1) + timedelta(days=k), True)
            for k in range(past_days)
        ]
    # one zombie re-registered after expiry: no overlap
    certs.append(
        verdict("webpki", D(2025, 10, 1), lifespan=10, death=D(2025, 12, 1),
                death_cause="expired", rereg_start=D(2026, 1, 1), overlaps=False,
                fingerprint="c9")
    )
    report = served_after_rereg(ServingIndex(index_rows), certs, AS_OF)
    assert report.zombie_total == 4
    assert report.overlap_count == 3
    assert report.served_past_count == 3
    assert report.median_days_served_past == 49


# -- revocation ------------------------------------------------------------------


def test_revocation_comparison_rates():
    verdicts = []
    for i in range(250):
        cause = "revoked" if i < 29 else "expired"
        verdicts.append(
            verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2025, 12, 1),
                    death_cause=cause, rereg_start=D(2025, 11, 1), fingerprint=f"r{i}")
        )
    for i in range(1000):
        cause = "revoked" if i < 39 else "expired"
        verdicts.append(
            verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2025, 12, 1),
                    death_cause=cause, fingerprint=f"n{i}")
        )
    cmp = revocation_comparison(verdicts)
    assert cmp.rate_reregistered == 0.116
    assert cmp.rate_not_reregistered == 0.039
    assert cmp.ratio == pytest.approx(0.116 / 0.039)


def test_revocation_comparison_degenerate_cases():
    none_revoked = [
        verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2025, 12, 1),
                death_cause="expired", fingerprint="x")
    ]
    cmp = revocation_comparison(none_revoked)
    assert cmp.rate_not_reregistered == 0.0
    assert cmp.ratio is None
    all_revoked = [
        verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2025, 11, 1),
                death_cause="revoked", rereg_start=D(2025, 10, 20), fingerprint="y"),
        verdict("webpki", D(2025, 10, 1), lifespan=5, death=D(2025, 11, 1),
                death_cause="revoked", fingerprint="z"),
    ]
    cmp = revocation_comparison(all_revoked)
    assert cmp.rate_reregistered == 1.0
    assert cmp.rate_not_reregistered == 1.0


# -- Maven breakdown ---------------------------------------------------------------


def test_maven_breakdown_buckets_and_sums():
    birth = D(2020, 1, 1)
    zb = birth + timedelta(days=100)
    rereg_start = zb + timedelta(days=50)
    verdicts = [
        verdict("maven", birth, lifespan=400, status="live", publish_times=[birth]),
        verdict("maven", birth, lifespan=None, publish_times=[birth]),  # unknown start
        verdict("maven", birth, lifespan=100, publish_times=[birth]),  # quiet zombie
        verdict("maven", birth, lifespan=100, publish_times=[birth, zb]),  # publish, no rereg
        verdict("maven", birth, lifespan=100, rereg_start=rereg_start,
                publish_times=[birth, zb]),  # publish while zombie, quiet after rereg
        verdict("maven", birth, lifespan=100, rereg_start=rereg_start,
                publish_times=[birth, rereg_start + timedelta(days=3)]),  # publish after rereg
    ]
    breakdown = maven_activity_breakdown(verdicts, AS_OF)
    assert breakdown.total == 6
    assert breakdown.live == 1
    assert breakdown.zombie_unknown_start == 1
    assert breakdown.zombie_known_start == 4
    assert breakdown.no_changes_while_zombie == 1
    assert breakdown.new_versions_while_zombie == 3
    assert breakdown.not_reregistered == 1
    assert breakdown.reregistered == 2
    assert breakdown.no_changes_after_rereg == 1
    assert breakdown.new_versions_after_rereg == 1
    breakdown.validate()


def test_maven_breakdown_zombie_with_no_later_versions():
    v = verdict("maven", D(2020, 1, 1), lifespan=50, publish_times=[D(2020, 1, 1)])
    breakdown = maven_activity_breakdown([v], AS_OF)
    assert breakdown.no_changes_while_zombie == 1


# -- matrix ------------------------------------------------------------------------


def full_evidence() -> dict[str, EcosystemEvidence]:
    return {
        "webpki": EcosystemEvidence(True, agp_zombies=100, active_zombies=580),
        "ens_onchain": EcosystemEvidence(True, agp_zombies=5, active_zombies=425,
                                         zombies_overwritten=0),
        "maven": EcosystemEvidence(True, agp_zombies=8, active_zombies=4842,
                                   resource_changes_while_zombie=547,
                                   resource_changes_after_rereg=214),
    }


OVERRIDES = {(NAME_TAKEOVER, "webpki"): INSUFFICIENT}


def test_matrix_design_and_data_cells():
    matrix = indicator_matrix(full_evidence(), DESIGNS, OVERRIDES)
    # resource attacks prevented where the resource needs its own key
    assert matrix.cell(RESOURCE_SQUATTING, "webpki").status == PREVENTED
    assert matrix.cell(RESOURCE_TAKEOVER, "ens_onchain").status == PREVENTED
    # name attacks escalate where the resource is not independent
    assert matrix.cell(NAME_SQUATTING, "maven").status == ESCALATES
    assert matrix.cell(NAME_TAKEOVER, "maven").status == ESCALATES
    # data findings
    assert matrix.cell(NAME_SQUATTING, "webpki").status == AVAILABLE
    assert matrix.cell(NAME_TAKEOVER, "ens_onchain").status == NO_EVIDENCE
    assert matrix.cell(RESOURCE_SQUATTING, "maven").status == AVAILABLE
    assert matrix.cell(RESOURCE_SQUATTING, "maven").supporting_count == 547
    assert matrix.cell(RESOURCE_TAKEOVER, "maven").supporting_count == 214
    # declared dataset limitation
    assert matrix.cell(NAME_TAKEOVER, "webpki").status == INSUFFICIENT


def test_matrix_empty_dataset_is_insufficient():
    evidence = {"webpki": EcosystemEvidence(has_data=False)}
    matrix = indicator_matrix(evidence, DESIGNS)
    assert matrix.cell(BULK_CREATION, "webpki").status == INSUFFICIENT
    assert matrix.cell(NAME_SQUATTING, "webpki").status == INSUFFICIENT
    # design cells stay declared even without data
    assert matrix.cell(RESOURCE_SQUATTING, "webpki").status == PREVENTED


def test_matrix_validate_on_use_prevents_everything():
    evidence = {"ens_gasless": EcosystemEvidence(has_data=True)}
    matrix = indicator_matrix(evidence, DESIGNS)
    assert all(
        matrix.cell(attack, "ens_gasless").status == PREVENTED
        for attack in (BULK_CREATION, NAME_SQUATTING, RESOURCE_SQUATTING,
                       NAME_TAKEOVER, RESOURCE_TAKEOVER)
    )


def test_matrix_missing_design_entry_errors():
    with pytest.raises(ConfigError):
        indicator_matrix({"webpki": EcosystemEvidence(True)}, {})


def test_evidence_aggregation():
    verdicts = [
        verdict("ens_onchain", D(2024, 1, 1), lifespan=4,
                death=D(2025, 1, 1), death_cause="overwritten"),
        verdict("ens_onchain", D(2024, 1, 1), lifespan=400),
    ]
    evidence = ecosystem_evidence(verdicts, AS_OF)
    eco = evidence["ens_onchain"]
    assert eco.agp_zombies == 1
    assert eco.zombies_overwritten == 1
    assert eco.active_zombies == 1  # the overwritten one is dead by as_of
