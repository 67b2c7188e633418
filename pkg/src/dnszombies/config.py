"""Run configuration: inference parameters, per-TLD overrides, the gasless
TXT prefix, and the declared ecosystem design facts behind the indicator
matrix.  Files are TOML; command-line flags override file values and the
effective configuration is echoed into every output manifest.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .epochs import EpochInferenceParams
from .errors import ConfigError
from .indicators import (
    ATTACKS,
    AVAILABLE,
    DEFAULT_AGP_DAYS,
    ESCALATES,
    INSUFFICIENT,
    NAME_TAKEOVER,
    NO_EVIDENCE,
    PREVENTED,
    EcosystemDesign,
)
from .linkages import DEFAULT_GASLESS_PREFIX, ECOSYSTEMS, WEBPKI

_VALID_TOP_KEYS = {
    "gap_threshold_days",
    "grace_window_days",
    "agp_days",
    "gasless_txt_prefix",
    "tld_overrides",
    "design",
    "design_overrides",
}
_VALID_TLD_KEYS = {"gap_threshold_days", "grace_window_days"}
_VALID_DESIGN_KEYS = {"resource_independent", "validate_on_use", "linkage_expires"}
_VALID_CELL_STATUSES = {PREVENTED, ESCALATES, INSUFFICIENT, AVAILABLE, NO_EVIDENCE}


def default_designs() -> dict[str, EcosystemDesign]:
    return {
        "webpki": EcosystemDesign(resource_independent=True, linkage_expires=True),
        "ens_onchain": EcosystemDesign(resource_independent=True),
        "ens_gasless": EcosystemDesign(resource_independent=True, validate_on_use=True),
        "maven": EcosystemDesign(resource_independent=False),
    }


@dataclass
class RunConfig:
    gap_threshold_days: int = 80
    grace_window_days: int = 2
    agp_days: int = DEFAULT_AGP_DAYS
    gasless_txt_prefix: str = DEFAULT_GASLESS_PREFIX
    tld_overrides: dict[str, dict[str, int]] = field(default_factory=dict)
    designs: dict[str, EcosystemDesign] = field(default_factory=default_designs)
    # The dataset-scope cell the default dataset cannot observe: takeovers
    # require re-registration of names older than the collection window.
    design_overrides: dict[tuple[str, str], str] = field(
        default_factory=lambda: {(NAME_TAKEOVER, WEBPKI): INSUFFICIENT}
    )

    def params(self) -> EpochInferenceParams:
        return EpochInferenceParams(self.gap_threshold_days, self.grace_window_days)

    def params_for(self, domain: str) -> EpochInferenceParams:
        """Inference parameters for one domain, honoring TLD overrides.

        The longest configured suffix wins, so an override for ``co.uk``
        beats one for ``uk``.
        """
        best: dict[str, int] | None = None
        best_len = -1
        for suffix, override in self.tld_overrides.items():
            if (domain == suffix or domain.endswith("." + suffix)) and len(suffix) > best_len:
                best, best_len = override, len(suffix)
        if best is None:
            return self.params()
        return EpochInferenceParams(
            best.get("gap_threshold_days", self.gap_threshold_days),
            best.get("grace_window_days", self.grace_window_days),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "gap_threshold_days": self.gap_threshold_days,
            "grace_window_days": self.grace_window_days,
            "agp_days": self.agp_days,
            "gasless_txt_prefix": self.gasless_txt_prefix,
            "tld_overrides": self.tld_overrides,
            "design": {
                ecosystem: {
                    "resource_independent": design.resource_independent,
                    "validate_on_use": design.validate_on_use,
                    "linkage_expires": design.linkage_expires,
                }
                for ecosystem, design in sorted(self.designs.items())
            },
            "design_overrides": [
                {"attack": attack, "ecosystem": ecosystem, "status": status}
                for (attack, ecosystem), status in sorted(self.design_overrides.items())
            ],
        }


def _require_keys(payload: dict, valid: set[str], context: str) -> None:
    unknown = set(payload) - valid
    if unknown:
        raise ConfigError(
            f"unknown {context} key(s) {sorted(unknown)}; valid keys: {sorted(valid)}"
        )


def load_config(path: str | Path | None) -> RunConfig:
    """Parse a TOML config file; an absent or empty file means all defaults."""
    config = RunConfig()
    if path is None:
        return config
    with open(path, "rb") as handle:
        try:
            payload = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}")
    _require_keys(payload, _VALID_TOP_KEYS, "config")

    for scalar in ("gap_threshold_days", "grace_window_days", "agp_days"):
        if scalar in payload:
            value = payload[scalar]
            if not isinstance(value, int):
                raise ConfigError(f"{scalar} must be an integer")
            setattr(config, scalar, value)
    if config.gap_threshold_days < 1:
        raise ConfigError("gap_threshold_days must be >= 1")
    if config.grace_window_days < 0:
        raise ConfigError("grace_window_days must be >= 0")
    if "gasless_txt_prefix" in payload:
        prefix = payload["gasless_txt_prefix"]
        if not isinstance(prefix, str) or not prefix:
            raise ConfigError("gasless_txt_prefix must be a non-empty string")
        config.gasless_txt_prefix = prefix

    for suffix, override in payload.get("tld_overrides", {}).items():
        _require_keys(override, _VALID_TLD_KEYS, f"tld_overrides.{suffix}")
        config.tld_overrides[suffix.lower()] = dict(override)

    for ecosystem, design in payload.get("design", {}).items():
        if ecosystem not in ECOSYSTEMS:
            raise ConfigError(
                f"unknown ecosystem {ecosystem!r} in design; valid: {sorted(ECOSYSTEMS)}"
            )
        _require_keys(design, _VALID_DESIGN_KEYS, f"design.{ecosystem}")
        base = config.designs.get(ecosystem, EcosystemDesign(resource_independent=False))
        config.designs[ecosystem] = EcosystemDesign(
            resource_independent=design.get("resource_independent", base.resource_independent),
            validate_on_use=design.get("validate_on_use", base.validate_on_use),
            linkage_expires=design.get("linkage_expires", base.linkage_expires),
        )

    if "design_overrides" in payload:
        config.design_overrides = {}
        for entry in payload["design_overrides"]:
            _require_keys(entry, {"attack", "ecosystem", "status"}, "design_overrides")
            attack, ecosystem, status = entry["attack"], entry["ecosystem"], entry["status"]
            if attack not in ATTACKS:
                raise ConfigError(f"unknown attack {attack!r}; valid: {list(ATTACKS)}")
            if ecosystem not in ECOSYSTEMS:
                raise ConfigError(f"unknown ecosystem {ecosystem!r}; valid: {sorted(ECOSYSTEMS)}")
            if status not in _VALID_CELL_STATUSES:
                raise ConfigError(
                    f"unknown status {status!r}; valid: {sorted(_VALID_CELL_STATUSES)}"
                )
            config.design_overrides[(attack, ecosystem)] = status
    return config
