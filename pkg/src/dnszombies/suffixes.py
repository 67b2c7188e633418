"""Public-suffix rules and registrable-domain extraction.

Implements the standard suffix-list matching algorithm (exact, wildcard, and
exception rules; longest match wins; unknown TLDs fall back to the last
label).  A small bundled rule set covers the suffixes used by the test and
synthetic datasets; point ``SuffixRules.from_file`` at a full public suffix
list download for production inputs.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import NotRegistrableError


def _normalize(name: str) -> str:
    name = name.strip().lower().rstrip(".")
    if not name or ".." in name or name.startswith("."):
        raise NotRegistrableError(f"malformed DNS name {name!r}")
    return name


class SuffixRules:
    """A parsed public-suffix rule set."""

    def __init__(self, rules: Iterable[str]):
        self.exact: set[str] = set()
        self.wildcard: set[str] = set()
        self.exception: set[str] = set()
        for raw in rules:
            rule = raw.strip().lower()
            if not rule or rule.startswith("//"):
                continue
            if rule.startswith("!"):
                self.exception.add(rule[1:])
            elif rule.startswith("*."):
                self.wildcard.add(rule[2:])
            else:
                self.exact.add(rule)

    @classmethod
    def from_file(cls, path: str | Path) -> SuffixRules:
        with open(path, encoding="utf-8") as handle:
            return cls(handle)

    @classmethod
    def bundled(cls) -> SuffixRules:
        text = resources.files("dnszombies").joinpath("data/public_suffixes.dat").read_text("utf-8")
        return cls(text.splitlines())

    def suffix_length(self, labels: list[str]) -> int:
        """Number of labels in the public suffix of ``labels``."""
        best = 1  # implicit "*" rule: the TLD itself
        for take in range(1, len(labels) + 1):
            candidate = ".".join(labels[-take:])
            if candidate in self.exception:
                return take - 1
            if candidate in self.exact and take > best:
                best = take
            if take >= 2 and ".".join(labels[-(take - 1):]) in self.wildcard and take > best:
                best = take
        return best

    def registrable(self, name: str) -> str:
        """Reduce ``name`` to its registrable domain (suffix plus one label)."""
        normalized = _normalize(name)
        labels = normalized.split(".")
        take = self.suffix_length(labels)
        if len(labels) <= take:
            raise NotRegistrableError(f"{normalized!r} is a public suffix, not a registrable name")
        return ".".join(labels[-(take + 1):])


def normalize_dns_name(name: str, suffix_rules: SuffixRules) -> str:
    """Lowercased, dot-stripped registrable domain for ``name``."""
    return suffix_rules.registrable(name)
