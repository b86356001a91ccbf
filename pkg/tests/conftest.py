from __future__ import annotations

import pytest

from normsup.datafiles import data_text
from normsup.dslio import parse_model, parse_norms, parse_scenario


@pytest.fixture(scope="session")
def road_model():
    return parse_model(data_text("road.ts.json"))


@pytest.fixture(scope="session")
def noise_model():
    return parse_model(data_text("noise.ts.json"))


@pytest.fixture(scope="session")
def narrow_model():
    return parse_model(data_text("narrow.ts.json"))


def normset(name: str):
    return parse_norms(data_text(f"{name}.norm"))


@pytest.fixture(scope="session")
def road_norms():
    return {k: normset(f"road_{k}") for k in ("n1", "r1", "r2", "r3", "s1")}


@pytest.fixture(scope="session")
def noise_norms():
    return {k: normset(f"noise_{k}") for k in ("n2", "r5", "r6", "s2")}


@pytest.fixture(scope="session")
def narrow_norms():
    return {k: normset(f"narrow_{k}") for k in ("n3", "r8", "r9")}


@pytest.fixture(scope="session")
def road_scenario():
    return parse_scenario(data_text("road.scenario.json"))


@pytest.fixture(scope="session")
def noise_scenario():
    return parse_scenario(data_text("noise.scenario.json"))
