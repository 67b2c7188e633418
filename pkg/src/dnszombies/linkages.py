"""Adapters from per-ecosystem raw records to uniform linkage records.

Each ecosystem binds a DNS name to an identifier it controls (a certificate
key, a wallet address, a package namespace).  Adapters normalize those raw
records into ``Linkage`` rows carrying a birth day, an optional death day
with its cause, and enough metadata for downstream analyses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Iterable

from .errors import DataFormatError, NotRegistrableError
from .suffixes import SuffixRules

log = logging.getLogger(__name__)

WEBPKI = "webpki"
ENS_ONCHAIN = "ens_onchain"
ENS_GASLESS = "ens_gasless"
MAVEN = "maven"
ECOSYSTEMS = (WEBPKI, ENS_ONCHAIN, ENS_GASLESS, MAVEN)

DEATH_EXPIRED = "expired"
DEATH_REVOKED = "revoked"
DEATH_OVERWRITTEN = "overwritten"

DEFAULT_GASLESS_PREFIX = "ENS1"


@dataclass
class Linkage:
    """Ecosystem-neutral record of one DNS-name binding."""

    ecosystem: str
    dns_name: str
    linked_name: str
    birth: date
    death: date | None = None
    death_cause: str | None = None
    fqdn: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.ecosystem not in ECOSYSTEMS:
            raise DataFormatError(f"unknown ecosystem {self.ecosystem!r}")
        if self.death is not None and self.death < self.birth:
            raise DataFormatError(f"linkage death {self.death} before birth {self.birth}")
        if (self.death is None) != (self.death_cause is None):
            raise DataFormatError("death and death_cause must be present together")


@dataclass(frozen=True)
class CertificateRecord:
    """One TLS certificate as seen in transparency logs."""

    fqdn: str
    not_before: date
    not_after: date
    fingerprint: str
    revocation_time: date | None = None

    def __post_init__(self) -> None:
        if self.not_before > self.not_after:
            raise DataFormatError(f"certificate {self.fingerprint}: notBefore after notAfter")
        if self.revocation_time is not None and not (
            self.not_before <= self.revocation_time <= self.not_after
        ):
            raise DataFormatError(f"certificate {self.fingerprint}: revocation outside validity")

    @property
    def validity_days(self) -> int:
        return (self.not_after - self.not_before).days + 1


@dataclass(frozen=True)
class EnsClaimEvent:
    """One successful name-claim event decoded from chain records."""

    dns_name: str
    block_time: date
    wallet: str
    txn: str


@dataclass(frozen=True)
class MavenVersionRecord:
    """One published package version under a reverse-DNS namespace."""

    namespace: str
    artifact_id: str
    version: str
    publish_time: date


@dataclass(frozen=True)
class GaslessTxtRecord:
    """One TXT record observed for a DNS name."""

    dns_name: str
    txt_value: str
    observed: date


def _simple_name(name: str) -> str:
    return name.strip().lower().rstrip(".")


def linkages_from_certificates(
    certs: Iterable[CertificateRecord], suffix_rules: SuffixRules
) -> list[Linkage]:
    """Certificates become linkages that die at expiry or revocation, whichever
    is earlier.  Duplicate transparency-log entries deduplicate by fingerprint;
    names that do not reduce to a registrable domain are skipped with a warning.
    """
    out: list[Linkage] = []
    seen: set[str] = set()
    for cert in certs:
        if cert.fingerprint in seen:
            continue
        seen.add(cert.fingerprint)
        try:
            dns_name = suffix_rules.registrable(cert.fqdn)
        except NotRegistrableError as exc:
            log.warning("skipping certificate %s: %s", cert.fingerprint, exc)
            continue
        if cert.revocation_time is not None and cert.revocation_time < cert.not_after:
            death, cause = cert.revocation_time, DEATH_REVOKED
        else:
            death, cause = cert.not_after, DEATH_EXPIRED
        out.append(
            Linkage(
                ecosystem=WEBPKI,
                dns_name=dns_name,
                linked_name=cert.fingerprint,
                birth=cert.not_before,
                death=death,
                death_cause=cause,
                fqdn=_simple_name(cert.fqdn),
                metadata={
                    "not_after": cert.not_after.isoformat(),
                    "revocation_time": (
                        cert.revocation_time.isoformat() if cert.revocation_time else None
                    ),
                },
            )
        )
    return out


def linkages_from_ens_claims(events: Iterable[EnsClaimEvent]) -> list[Linkage]:
    """Each claim is a linkage; a later claim for the same DNS name overwrites
    (kills) the previous one, and the final claim per name has no death.
    """
    by_name: dict[str, list[EnsClaimEvent]] = {}
    for event in events:
        by_name.setdefault(_simple_name(event.dns_name), []).append(event)
    out: list[Linkage] = []
    for dns_name in sorted(by_name):
        ordered = sorted(by_name[dns_name], key=lambda e: (e.block_time, e.txn))
        for i, event in enumerate(ordered):
            successor = ordered[i + 1] if i + 1 < len(ordered) else None
            out.append(
                Linkage(
                    ecosystem=ENS_ONCHAIN,
                    dns_name=dns_name,
                    linked_name=event.wallet,
                    birth=event.block_time,
                    death=successor.block_time if successor else None,
                    death_cause=DEATH_OVERWRITTEN if successor else None,
                    metadata={"txn": event.txn},
                )
            )
    return out


def match_gasless_txt(
    records: Iterable[GaslessTxtRecord], pattern: str = DEFAULT_GASLESS_PREFIX
) -> list[Linkage]:
    """TXT records whose first token equals ``pattern`` become deathless
    gasless linkages; the remainder of the record is the linked name.
    """
    if not pattern:
        raise ValueError("gasless TXT pattern must be non-empty")
    out: list[Linkage] = []
    for record in records:
        head, _, rest = record.txt_value.strip().partition(" ")
        if head != pattern:
            continue
        out.append(
            Linkage(
                ecosystem=ENS_GASLESS,
                dns_name=_simple_name(record.dns_name),
                linked_name=rest.strip(),
                birth=record.observed,
                metadata={"txt_value": record.txt_value},
            )
        )
    return out


def reverse_namespace(namespace: str) -> str:
    """``com.example`` -> ``example.com``; rejects single-label namespaces."""
    labels = [label for label in namespace.strip().lower().split(".") if label]
    if len(labels) < 2:
        raise DataFormatError(f"namespace {namespace!r} is not reverse-DNS (need >= 2 labels)")
    return ".".join(reversed(labels))


def linkages_from_maven_index(
    versions: Iterable[MavenVersionRecord], suffix_rules: SuffixRules
) -> list[Linkage]:
    """One linkage per namespace, born at its first published version.

    Namespaces are immutable and never die.  The full publish timeline is
    retained in metadata for the activity breakdown.  Distinct namespaces
    under the same registrable domain stay distinct linkages.
    """
    by_namespace: dict[str, list[MavenVersionRecord]] = {}
    for record in versions:
        by_namespace.setdefault(record.namespace.strip().lower(), []).append(record)
    out: list[Linkage] = []
    for namespace in sorted(by_namespace):
        try:
            full_name = reverse_namespace(namespace)
            dns_name = suffix_rules.registrable(full_name)
        except (DataFormatError, NotRegistrableError) as exc:
            log.warning("skipping namespace %s: %s", namespace, exc)
            continue
        publishes = sorted(r.publish_time for r in by_namespace[namespace])
        out.append(
            Linkage(
                ecosystem=MAVEN,
                dns_name=dns_name,
                linked_name=namespace,
                birth=publishes[0],
                fqdn=full_name,
                metadata={"publish_times": [d.isoformat() for d in publishes]},
            )
        )
    return out
