"""Seeded ground-truth worlds, degraded observation emission, and a
brute-force oracle.

A world holds true registration epochs per domain (annual-expiry dynamics
with tasting-style early deletions and fast re-registrations) plus true
linkage histories per ecosystem.  ``emit_observations`` writes the exact
pipeline input formats, optionally dropping observations per a noise model;
``oracle_evaluate`` computes every expected output directly from the truth,
with no inference, as the comparison target for pipeline tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

from .dataio import (
    DatasetManifest,
    atomic_write_text,
    manifest_entry,
    save_certificates,
    save_ens_claims,
    save_gasless,
    save_maven_versions,
    save_observations,
    save_rdap,
    save_serving,
)
from .days import parse_day
from .errors import DataFormatError
from .indicators import DEFAULT_AGP_DAYS, MavenActivityBreakdown, ServingObservation
from .linkages import (
    ENS_GASLESS,
    ENS_ONCHAIN,
    MAVEN,
    WEBPKI,
    CertificateRecord,
    EnsClaimEvent,
    GaslessTxtRecord,
    MavenVersionRecord,
)
from .epochs import RdapRecord

ONE_DAY = timedelta(days=1)

_TLDS = ("com", "net", "org", "io", "dev")


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class WorldParams:
    """Knobs for world generation.

    Epoch lengths follow a fixed per-anniversary non-renewal probability
    over 365-day years; a tasting fraction of domains delete their first
    registration within the add grace period, and a dropcatch fraction of
    deletions re-register within the merge threshold, the case only
    registration-data evidence can split.
    """

    n_domains: int = 100
    window_start: date = date(2023, 1, 1)
    window_end: date = date(2025, 6, 30)
    annual_nonrenewal_p: float = 0.35
    tasting_fraction: float = 0.1
    dropcatch_fraction: float = 0.2
    slow_rereg_p: float = 0.35
    webpki_p: float = 0.5
    ens_p: float = 0.3
    maven_p: float = 0.3
    gasless_p: float = 0.05
    serving_p: float = 0.8
    revocation_p: float = 0.06
    gap_threshold_days: int = 80
    agp_days: int = DEFAULT_AGP_DAYS

    def __post_init__(self) -> None:
        if self.n_domains < 1:
            raise ValueError("a world needs at least one domain")
        if self.window_end <= self.window_start:
            raise ValueError("window_end must be after window_start")
        for name in (
            "annual_nonrenewal_p",
            "tasting_fraction",
            "dropcatch_fraction",
            "slow_rereg_p",
            "webpki_p",
            "ens_p",
            "maven_p",
            "gasless_p",
            "serving_p",
            "revocation_p",
        ):
            _check_probability(name, getattr(self, name))


@dataclass(frozen=True)
class NoiseModel:
    """Per-day coverage probabilities; 1.0 everywhere means complete data."""

    zone_coverage_p: float = 1.0
    scan_coverage_p: float = 1.0
    rdap_coverage_p: float = 1.0
    rdap_date_omission_p: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "zone_coverage_p",
            "scan_coverage_p",
            "rdap_coverage_p",
            "rdap_date_omission_p",
        ):
            _check_probability(name, getattr(self, name))


ZERO_NOISE = NoiseModel()


@dataclass(frozen=True)
class TrueEpoch:
    start: date
    end: date  # truncated at the window's last day
    ongoing: bool  # natural end lies beyond the window


@dataclass
class DomainTruth:
    name: str
    epochs: list[TrueEpoch]


@dataclass(frozen=True)
class TrueLinkage:
    """Generator-recorded truth for one linkage; ``key`` is its stable id."""

    ecosystem: str
    key: str
    dns_name: str
    birth: date
    death: date | None = None
    death_cause: str | None = None
    publishes: tuple[date, ...] = ()
    not_after: date | None = None


@dataclass
class GroundTruthWorld:
    params: WorldParams
    seed: int
    domains: list[DomainTruth]
    linkages: list[TrueLinkage]
    certificates: list[CertificateRecord]
    ens_claims: list[EnsClaimEvent]
    maven_versions: list[MavenVersionRecord]
    gasless_records: list[GaslessTxtRecord]
    serving: list[ServingObservation]
    rdap: list[RdapRecord]

    @property
    def window(self) -> tuple[date, date]:
        return (self.params.window_start, self.params.window_end)


def _draw_epochs(rng: random.Random, params: WorldParams) -> list[TrueEpoch]:
    window_days = (params.window_end - params.window_start).days + 1
    start = params.window_start + timedelta(days=rng.randint(0, max(window_days // 2, 1)))
    epochs: list[TrueEpoch] = []
    first = True
    while start <= params.window_end:
        if first and rng.random() < params.tasting_fraction:
            length = rng.randint(1, params.agp_days)
        else:
            years = 1
            while years < 8 and rng.random() > params.annual_nonrenewal_p:
                years += 1
            length = 365 * years
        first = False
        natural_end = start + timedelta(days=length - 1)
        if natural_end >= params.window_end:
            epochs.append(TrueEpoch(start, params.window_end, ongoing=natural_end > params.window_end))
            break
        epochs.append(TrueEpoch(start, natural_end, ongoing=False))
        roll = rng.random()
        if roll < params.dropcatch_fraction:
            gap = rng.randint(1, params.gap_threshold_days - 1)
        elif roll < params.dropcatch_fraction + params.slow_rereg_p:
            gap = rng.randint(params.gap_threshold_days, params.gap_threshold_days + 400)
        else:
            break
        start = natural_end + timedelta(days=gap + 1)
    return epochs


def _day_in_epoch(rng: random.Random, epoch: TrueEpoch, early_bias: bool) -> date:
    span = (epoch.end - epoch.start).days
    if early_bias and rng.random() < 0.5:
        offset = rng.randint(0, min(30, span))
    else:
        offset = rng.randint(0, span)
    return epoch.start + timedelta(days=offset)


def generate_world(params: WorldParams, seed: int) -> GroundTruthWorld:
    """Build a deterministic world for ``seed``; identical inputs give
    identical worlds."""
    rng = random.Random(seed)
    domains: list[DomainTruth] = []
    linkages: list[TrueLinkage] = []
    certificates: list[CertificateRecord] = []
    ens_claims: list[EnsClaimEvent] = []
    maven_versions: list[MavenVersionRecord] = []
    gasless_records: list[GaslessTxtRecord] = []
    serving: list[ServingObservation] = []
    rdap: list[RdapRecord] = []

    for i in range(params.n_domains):
        name = f"d{i:06d}.{_TLDS[i % len(_TLDS)]}"
        epochs = _draw_epochs(rng, params)
        domains.append(DomainTruth(name, epochs))

        for epoch in epochs:
            offset = rng.randint(0, min(5, (epoch.end - epoch.start).days))
            rdap.append(
                RdapRecord(name, epoch.start + timedelta(days=offset), "positive", epoch.start)
            )
        for prev, nxt in zip(epochs, epochs[1:]):
            gap_days = (nxt.start - prev.end).days - 1
            if gap_days >= 7 and rng.random() < 0.5:
                midpoint = prev.end + timedelta(days=gap_days // 2 + 1)
                rdap.append(RdapRecord(name, midpoint, "negative"))

        if rng.random() < params.webpki_p:
            for epoch_idx, epoch in enumerate(epochs):
                for cert_idx in range(1 + (rng.random() < 0.2)):
                    birth = _day_in_epoch(rng, epoch, early_bias=True)
                    not_after = birth + timedelta(days=89)
                    revocation = None
                    if rng.random() < params.revocation_p:
                        revocation = birth + timedelta(days=rng.randint(1, 89))
                    fingerprint = f"{name}:c{epoch_idx}.{cert_idx}"
                    cert = CertificateRecord(f"www.{name}", birth, not_after, fingerprint, revocation)
                    certificates.append(cert)
                    death = revocation if revocation is not None and revocation < not_after else not_after
                    cause = "revoked" if death == revocation and revocation is not None and revocation < not_after else "expired"
                    linkages.append(
                        TrueLinkage(WEBPKI, fingerprint, name, birth, death, cause, not_after=not_after)
                    )
                    if rng.random() < params.serving_p:
                        served_len = rng.randint(1, (death - birth).days + 1)
                        for k in range(served_len):
                            serving.append(ServingObservation(fingerprint, birth + timedelta(days=k), True))
                        probe_gap_day = birth + timedelta(days=served_len)
                        if probe_gap_day <= death and rng.random() < 0.3:
                            serving.append(ServingObservation(fingerprint, probe_gap_day, False))

        if rng.random() < params.ens_p:
            claim_epochs = [rng.choice(epochs)]
            if len(epochs) > 1 and rng.random() < 0.15:
                claim_epochs.append(epochs[-1])
            claim_days = sorted({_day_in_epoch(rng, e, early_bias=True) for e in claim_epochs})
            for j, day in enumerate(claim_days):
                txn = f"{name}:t{j}"
                ens_claims.append(EnsClaimEvent(name, day, f"0x{i:05x}{j}", txn))
                successor = claim_days[j + 1] if j + 1 < len(claim_days) else None
                linkages.append(
                    TrueLinkage(
                        ENS_ONCHAIN,
                        txn,
                        name,
                        day,
                        successor,
                        "overwritten" if successor else None,
                    )
                )

        if rng.random() < params.maven_p:
            epoch = epochs[0]
            namespace = ".".join(reversed(name.split(".")))
            birth = _day_in_epoch(rng, epoch, early_bias=True)
            publishes = [birth]
            horizon = params.window_end
            cursor = birth
            for _ in range(rng.randint(0, 4)):
                cursor = cursor + timedelta(days=rng.randint(20, 400))
                if cursor > horizon:
                    break
                publishes.append(cursor)
            for j, day in enumerate(sorted(publishes)):
                maven_versions.append(MavenVersionRecord(namespace, "lib", f"1.{j}", day))
            linkages.append(
                TrueLinkage(MAVEN, namespace, name, min(publishes), publishes=tuple(sorted(publishes)))
            )

        if rng.random() < params.gasless_p:
            epoch = rng.choice(epochs)
            day = _day_in_epoch(rng, epoch, early_bias=False)
            gasless_records.append(GaslessTxtRecord(name, f"ENS1 0xresolver{i:05x}", day))
            linkages.append(TrueLinkage(ENS_GASLESS, f"{name}:txt", name, day))

    return GroundTruthWorld(
        params=params,
        seed=seed,
        domains=domains,
        linkages=linkages,
        certificates=certificates,
        ens_claims=ens_claims,
        maven_versions=maven_versions,
        gasless_records=gasless_records,
        serving=serving,
        rdap=rdap,
    )


# -- emission ----------------------------------------------------------------


def _epoch_days(epoch: TrueEpoch):
    day = epoch.start
    while day <= epoch.end:
        yield day
        day += ONE_DAY


def emit_observations(
    world: GroundTruthWorld, noise: NoiseModel, outdir: str | Path, include_truth: bool = True
) -> dict[str, Path]:
    """Write the full pipeline input set for ``world`` under ``outdir``.

    With zero noise every true registered day appears in the zone file and
    every epoch has a usable positive registration record.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(f"{world.seed}/emit")
    paths = {
        "observations": outdir / "observations.csv",
        "rdap": outdir / "rdap.jsonl",
        "certificates": outdir / "certificates.jsonl",
        "ens_claims": outdir / "ens_claims.jsonl",
        "maven_versions": outdir / "maven_versions.jsonl",
        "gasless": outdir / "gasless.jsonl",
        "serving": outdir / "serving.csv",
    }

    def observation_groups():
        for domain in world.domains:
            zone: list[date] = []
            scan: list[date] = []
            for epoch in domain.epochs:
                for day in _epoch_days(epoch):
                    if noise.zone_coverage_p >= 1.0 or rng.random() < noise.zone_coverage_p:
                        zone.append(day)
                    if noise.scan_coverage_p >= 1.0 or (
                        noise.scan_coverage_p > 0.0 and rng.random() < noise.scan_coverage_p
                    ):
                        scan.append(day)
            if zone or scan:
                yield domain.name, zone, scan

    counts = {"observations": save_observations(paths["observations"], observation_groups())}

    rdap_records = []
    for record in world.rdap:
        if noise.rdap_coverage_p < 1.0 and rng.random() >= noise.rdap_coverage_p:
            continue
        if (
            record.polarity == "positive"
            and noise.rdap_date_omission_p > 0.0
            and rng.random() < noise.rdap_date_omission_p
        ):
            record = RdapRecord(record.domain, record.query_time, "positive", None)
        rdap_records.append(record)
    counts["rdap"] = save_rdap(paths["rdap"], rdap_records)

    counts["certificates"] = save_certificates(paths["certificates"], world.certificates)
    counts["ens_claims"] = save_ens_claims(paths["ens_claims"], world.ens_claims)
    counts["maven_versions"] = save_maven_versions(paths["maven_versions"], world.maven_versions)
    counts["gasless"] = save_gasless(paths["gasless"], world.gasless_records)
    counts["serving"] = save_serving(paths["serving"], world.serving)

    if include_truth:
        paths["truth_epochs"] = outdir / "truth_epochs.jsonl"
        paths["truth_linkages"] = outdir / "truth_linkages.jsonl"
        counts["truth_epochs"] = save_truth_epochs(world, paths["truth_epochs"])
        counts["truth_linkages"] = save_truth_linkages(world, paths["truth_linkages"])

    files = dict(
        manifest_entry(name, path, counts[name], base_dir=outdir) for name, path in paths.items()
    )
    manifest = DatasetManifest(
        files=files,
        config={
            "seed": world.seed,
            "n_domains": world.params.n_domains,
            "noise": {
                "zone_coverage_p": noise.zone_coverage_p,
                "scan_coverage_p": noise.scan_coverage_p,
                "rdap_coverage_p": noise.rdap_coverage_p,
                "rdap_date_omission_p": noise.rdap_date_omission_p,
            },
        },
        window=world.window,
    )
    manifest.save(outdir / "manifest.json")
    paths["manifest"] = outdir / "manifest.json"
    return paths


def save_truth_epochs(world: GroundTruthWorld, path: str | Path) -> int:
    import json

    lines = []
    for domain in world.domains:
        payload = {
            "domain": domain.name,
            "epochs": [
                {"start": e.start.isoformat(), "end": e.end.isoformat(), "ongoing": e.ongoing}
                for e in domain.epochs
            ],
        }
        lines.append(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    atomic_write_text(path, "".join(lines))
    return len(lines)


def save_truth_linkages(world: GroundTruthWorld, path: str | Path) -> int:
    import json

    lines = []
    for linkage in world.linkages:
        payload = {
            "ecosystem": linkage.ecosystem,
            "key": linkage.key,
            "dns_name": linkage.dns_name,
            "birth": linkage.birth.isoformat(),
            "death": linkage.death.isoformat() if linkage.death else None,
            "death_cause": linkage.death_cause,
            "publishes": [d.isoformat() for d in linkage.publishes],
            "not_after": linkage.not_after.isoformat() if linkage.not_after else None,
        }
        lines.append(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    atomic_write_text(path, "".join(lines))
    return len(lines)


# -- oracle -------------------------------------------------------------------


@dataclass
class OracleVerdict:
    status: str
    zombie_birth: date | None = None
    zombie_death: date | None = None
    rereg_start: date | None = None
    rereg_overlaps: bool | None = None
    epoch_start: date | None = None
    epoch_end: date | None = None


@dataclass
class OracleExpectation:
    """Every expected pipeline output, computed directly from truth."""

    as_of: date
    timelines: dict[str, list[tuple[date, date, bool]]]  # (start, end, right_censored)
    verdicts: dict[tuple[str, str], OracleVerdict]  # (ecosystem, key) -> verdict
    summaries: dict[str, tuple[int, int, int]]  # ecosystem -> (total, active, zombie)
    series: dict[str, list[tuple[int, int]]]  # ecosystem -> per-day (active, zombie)
    breakdown: MavenActivityBreakdown
    agp: dict[str, tuple[int, int]]  # ecosystem -> (zombies with known epochs, within AGP)
    revocation: tuple[int, int, int, int]
    served_days: dict[str, int]  # fingerprint -> days served after DNS death
    rereg_overlap_count: int
    served_past_days: dict[str, int]


def oracle_evaluate(
    world: GroundTruthWorld, as_of: date, observability: bool = True
) -> OracleExpectation:
    """Expected outputs from ground truth.

    With ``observability=True`` an epoch counts as ended only when a
    day-granularity record could prove it (a later epoch exists, or the
    window tail after its end reaches the gap threshold); this is the exact
    target for a perfect pipeline over complete observations.  With
    ``observability=False`` every truly ended epoch counts, an upper bound
    the conservative pipeline must never exceed.
    """
    params = world.params
    window_start, window_end = world.window
    t = params.gap_threshold_days

    timelines: dict[str, list[tuple[date, date, bool]]] = {}
    epochs_by_domain: dict[str, list[TrueEpoch]] = {}
    for domain in world.domains:
        epochs_by_domain[domain.name] = domain.epochs
        timelines[domain.name] = [
            (e.start, e.end, e.end == window_end) for e in domain.epochs
        ]

    served_true: dict[str, set[date]] = {}
    for obs in world.serving:
        if obs.served:
            served_true.setdefault(obs.fingerprint, set()).add(obs.day)

    def ended(epochs: list[TrueEpoch], idx: int) -> bool:
        epoch = epochs[idx]
        if epoch.ongoing:
            return False
        if not observability:
            return True
        if idx + 1 < len(epochs):
            return True
        return (window_end - epoch.end).days >= t

    verdicts: dict[tuple[str, str], OracleVerdict] = {}
    summaries: dict[str, list[int]] = {}
    series_delta: dict[str, tuple[list[int], list[int]]] = {}
    n_days = (as_of - window_start).days + 1
    agp: dict[str, list[int]] = {}
    revocation = [0, 0, 0, 0]
    served_days: dict[str, int] = {}
    served_past: dict[str, int] = {}
    rereg_overlap_count = 0
    bd = {key: 0 for key in (
        "total", "live", "unk", "known", "quiet", "publishing",
        "no_rereg", "rereg", "quiet_after", "publishing_after",
    )}

    for linkage in world.linkages:
        key = (linkage.ecosystem, linkage.key)
        epochs = epochs_by_domain[linkage.dns_name]
        verdict = OracleVerdict(status="live")
        if linkage.ecosystem == ENS_GASLESS:
            verdict.status = "exempt"
        else:
            idx = next(
                i for i, e in enumerate(epochs) if e.start <= linkage.birth <= e.end
            )
            epoch = epochs[idx]
            verdict.epoch_start, verdict.epoch_end = epoch.start, epoch.end
            zombie_birth = epoch.end + ONE_DAY
            is_zombie = (
                ended(epochs, idx)
                and epoch.end < as_of
                and (linkage.death is None or linkage.death >= zombie_birth)
            )
            if is_zombie:
                verdict.status = "zombie"
                verdict.zombie_birth = zombie_birth
                if linkage.death is not None:
                    verdict.zombie_death = min(linkage.death, as_of)
                if idx + 1 < len(epochs) and epochs[idx + 1].start <= as_of:
                    verdict.rereg_start = epochs[idx + 1].start
                    valid_until = linkage.death if linkage.death is not None else as_of
                    verdict.rereg_overlaps = valid_until >= verdict.rereg_start
        verdicts[key] = verdict

        bucket = summaries.setdefault(linkage.ecosystem, [0, 0, 0])
        bucket[0] += 1
        active_now = linkage.birth <= as_of and (linkage.death is None or as_of < linkage.death)
        if active_now:
            bucket[1] += 1
            if verdict.status == "zombie":
                bucket[2] += 1

        active_d, zombie_d = series_delta.setdefault(
            linkage.ecosystem, ([0] * (n_days + 1), [0] * (n_days + 1))
        )
        lo = max((linkage.birth - window_start).days, 0)
        hi = n_days if linkage.death is None else min((linkage.death - window_start).days, n_days)
        if lo < hi:
            active_d[lo] += 1
            active_d[hi] -= 1
        if verdict.status == "zombie":
            zlo = max((verdict.zombie_birth - window_start).days, lo)
            if zlo < hi:
                zombie_d[zlo] += 1
                zombie_d[hi] -= 1

        if verdict.status == "zombie" and verdict.epoch_start is not None:
            eco_agp = agp.setdefault(linkage.ecosystem, [0, 0])
            eco_agp[0] += 1
            lifespan = (verdict.epoch_end - verdict.epoch_start).days + 1
            if lifespan <= params.agp_days:
                eco_agp[1] += 1

        if linkage.ecosystem == WEBPKI and verdict.status == "zombie":
            revoked = linkage.death_cause == "revoked"
            if verdict.rereg_start is not None:
                revocation[0] += 1
                revocation[1] += revoked
            else:
                revocation[2] += 1
                revocation[3] += revoked
            window_last = as_of if linkage.death is None else min(linkage.death, as_of)
            days = sum(
                1
                for day in served_true.get(linkage.key, ())
                if verdict.zombie_birth <= day <= window_last
            )
            served_days[linkage.key] = days
            if verdict.rereg_overlaps:
                rereg_overlap_count += 1
                past = sum(
                    1
                    for day in served_true.get(linkage.key, ())
                    if verdict.rereg_start <= day <= window_last
                )
                if past > 0:
                    served_past[linkage.key] = past

        if linkage.ecosystem == MAVEN:
            bd["total"] += 1
            if verdict.status != "zombie":
                bd["live"] += 1
            elif verdict.zombie_birth is None:
                bd["unk"] += 1
            else:
                bd["known"] += 1
                while_zombie = [
                    d for d in linkage.publishes if verdict.zombie_birth <= d <= as_of
                ]
                if not while_zombie:
                    bd["quiet"] += 1
                else:
                    bd["publishing"] += 1
                    if verdict.rereg_start is None:
                        bd["no_rereg"] += 1
                    else:
                        bd["rereg"] += 1
                        if any(d >= verdict.rereg_start for d in while_zombie):
                            bd["publishing_after"] += 1
                        else:
                            bd["quiet_after"] += 1

    series: dict[str, list[tuple[int, int]]] = {}
    for ecosystem, (active_d, zombie_d) in series_delta.items():
        rows = []
        active = zombie = 0
        for i in range(n_days):
            active += active_d[i]
            zombie += zombie_d[i]
            rows.append((active, zombie))
        series[ecosystem] = rows

    breakdown = MavenActivityBreakdown(
        total=bd["total"],
        live=bd["live"],
        zombie_unknown_start=bd["unk"],
        zombie_known_start=bd["known"],
        no_changes_while_zombie=bd["quiet"],
        new_versions_while_zombie=bd["publishing"],
        not_reregistered=bd["no_rereg"],
        reregistered=bd["rereg"],
        no_changes_after_rereg=bd["quiet_after"],
        new_versions_after_rereg=bd["publishing_after"],
    )
    if bd["total"]:
        breakdown.validate()

    return OracleExpectation(
        as_of=as_of,
        timelines=timelines,
        verdicts=verdicts,
        summaries={eco: tuple(vals) for eco, vals in summaries.items()},
        series=series,
        breakdown=breakdown,
        agp={eco: tuple(vals) for eco, vals in agp.items()},
        revocation=tuple(revocation),
        served_days=served_days,
        rereg_overlap_count=rereg_overlap_count,
        served_past_days=served_past,
    )


def load_truth_epochs(path: str | Path) -> dict[str, list[TrueEpoch]]:
    import json

    out: dict[str, list[TrueEpoch]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", str(path), lineno)
            out[payload["domain"]] = [
                TrueEpoch(parse_day(e["start"]), parse_day(e["end"]), bool(e["ongoing"]))
                for e in payload["epochs"]
            ]
    return out
