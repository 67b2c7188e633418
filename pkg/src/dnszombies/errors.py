"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class DnsZombiesError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(DnsZombiesError):
    """A record or file violates its documented schema."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = path if line is None else f"{path}:{line}"
            prefix += ": "
        super().__init__(prefix + message)


class EmptyObservationsError(DnsZombiesError):
    """No zone or scan observation exists for a domain."""


class NotRegistrableError(DnsZombiesError):
    """A DNS name is a public suffix (or above) and has no registrable part."""


class DomainMismatchError(DnsZombiesError):
    """A linkage was paired with a timeline for a different domain."""


class ConfigError(DnsZombiesError):
    """A configuration file contains unknown or invalid entries."""


class FetchError(DnsZombiesError):
    """The RDAP fetch client could not complete a request."""
