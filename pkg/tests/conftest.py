"""Shared session fixtures: classified paper-aggregate datasets."""

from __future__ import annotations

import pytest

from dnszombies.classify import batch_classify
from fixture_builders import (
    AS_OF,
    build_ens_fixture,
    build_maven_fixture,
    build_webpki_fixture,
)


@pytest.fixture(scope="session")
def ens_classified():
    linkages, timelines = build_ens_fixture()
    return batch_classify(linkages, timelines, AS_OF)


@pytest.fixture(scope="session")
def maven_classified():
    linkages, timelines = build_maven_fixture()
    return batch_classify(linkages, timelines, AS_OF)


@pytest.fixture(scope="session")
def webpki_classified():
    linkages, timelines, serving = build_webpki_fixture()
    verdicts, summary = batch_classify(linkages, timelines, AS_OF)
    return verdicts, summary, serving
