from __future__ import annotations

import pytest

from dilemmagen import ModelBundle, load_bundle
from dilemmagen.fixtures import fixture_path


def load_fixture_bundle(name: str) -> ModelBundle:
    return load_bundle(
        fixture_path(f"{name}_tasks.json"),
        fixture_path(f"{name}_causality.json"),
        fixture_path(f"{name}_world.json"),
    )


@pytest.fixture(scope="session")
def driving() -> ModelBundle:
    return load_fixture_bundle("driving")


@pytest.fixture(scope="session")
def screening() -> ModelBundle:
    return load_fixture_bundle("screening")


@pytest.fixture(scope="session")
def two_evils() -> ModelBundle:
    return load_fixture_bundle("two_evils")
