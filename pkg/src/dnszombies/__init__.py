"""Toolkit for DNS registration-epoch inference and zombie-linkage analysis.

A linkage binds a DNS name into an external ecosystem (a TLS certificate, a
wallet import, a package namespace).  When the registration epoch that
created the linkage ends while the entry stays valid, the linkage is a
zombie.  This package infers registration epochs from delegation, scan, and
registration-data observations, classifies linkages, and computes survival
statistics and attack-surface indicators over the results.
"""

from .classify import ZombieVerdict, batch_classify, classify_linkage, zombie_duration
from .epochs import (
    EpochInferenceParams,
    EpochTimeline,
    ObservationBitset,
    OwnershipInterval,
    RdapRecord,
    infer_epochs,
)
from .linkages import (
    CertificateRecord,
    EnsClaimEvent,
    GaslessTxtRecord,
    Linkage,
    MavenVersionRecord,
    linkages_from_certificates,
    linkages_from_ens_claims,
    linkages_from_maven_index,
    match_gasless_txt,
)
from .stats import kaplan_meier, mann_whitney_u, zombie_fraction_series
from .suffixes import SuffixRules, normalize_dns_name

__version__ = "0.1.0"

__all__ = [
    "CertificateRecord",
    "EnsClaimEvent",
    "EpochInferenceParams",
    "EpochTimeline",
    "GaslessTxtRecord",
    "Linkage",
    "MavenVersionRecord",
    "ObservationBitset",
    "OwnershipInterval",
    "RdapRecord",
    "SuffixRules",
    "ZombieVerdict",
    "batch_classify",
    "classify_linkage",
    "infer_epochs",
    "kaplan_meier",
    "linkages_from_certificates",
    "linkages_from_ens_claims",
    "linkages_from_maven_index",
    "mann_whitney_u",
    "match_gasless_txt",
    "normalize_dns_name",
    "zombie_duration",
    "zombie_fraction_series",
    "__version__",
]
