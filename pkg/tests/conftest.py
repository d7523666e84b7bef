"""Shared fixtures: the two bundled demo markets and their named allocations."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from envylattice import Market, parse_market

MARKET_DIR = Path(__file__).resolve().parent.parent / "markets"
NO_LAD_PATH = MARKET_DIR / "no_lad_demo.market.json"
LATTICE_PATH = MARKET_DIR / "lattice_demo.market.json"

# no_lad_demo: two table doctors, three quota-1 hospitals.  Doctor d2
# drops from two signed contracts to one when x23 shows up, breaking the
# law of aggregate demand, so the count-based consequences fail while
# the lattice structure itself survives.
DOCTOR_OPT = frozenset({"x11", "x12", "x23"})
HOSPITAL_OPT = frozenset({"x13", "x21", "x22"})
EF_MIDDLE = frozenset({"x11", "x23"})
EF_LOW = frozenset({"x21", "x22"})

# lattice_demo: two quota-2 hospitals that prefer the y contracts while
# both doctors prefer the x contracts.  Ships with an embedded
# "reference" block whose claims disagree with the computed lattice.
LD_DOCTOR_OPT = frozenset({"x11", "x12", "x21", "x22"})
LD_HOSPITAL_OPT = frozenset({"x11", "x12", "y21", "y22"})
LD_STABLE = frozenset(
    {
        LD_DOCTOR_OPT,
        LD_HOSPITAL_OPT,
        frozenset({"x11", "x12", "x21", "y22"}),
        frozenset({"x11", "x12", "x22", "y21"}),
    }
)
LD_JOIN_LEFT = frozenset({"y11", "y12", "y21"})
LD_JOIN_RIGHT = frozenset({"y11", "y12", "y22"})
LD_JOIN_VALUE = frozenset({"y11", "y12", "y21", "y22"})


@pytest.fixture(scope="session")
def no_lad() -> Market:
    return parse_market(NO_LAD_PATH.read_text())


@pytest.fixture(scope="session")
def lattice_demo() -> Market:
    return parse_market(LATTICE_PATH.read_text())


@pytest.fixture(scope="session")
def no_lad_doc() -> dict:
    return json.loads(NO_LAD_PATH.read_text())


@pytest.fixture(scope="session")
def lattice_doc() -> dict:
    return json.loads(LATTICE_PATH.read_text())
