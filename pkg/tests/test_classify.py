"""Allocation classes: IR, envy-freeness, stability, and enumeration."""

from __future__ import annotations

import random

import pytest

from envylattice import (
    Contract,
    DoctorSpec,
    EnumerationCapError,
    GenParams,
    HospitalSpec,
    Market,
    ResponsiveDoctor,
    blocking_contracts,
    canon,
    classify,
    enumerate_allocations,
    generate_responsive_market,
    is_envy_free,
    is_individually_rational,
    is_stable,
    justified_envy_witnesses,
)

from conftest import (
    DOCTOR_OPT,
    EF_LOW,
    EF_MIDDLE,
    HOSPITAL_OPT,
    LD_STABLE,
)
from oracles import brute_blocking, brute_envy, powerset_allocations

# frozen from the brute-force subset filter over both demo markets
NO_LAD_COUNTS = {"allocation": 27, "ir": 17, "envy-free": 11, "stable": 2}
LATTICE_COUNTS = {"allocation": 81, "ir": 72, "envy-free": 22, "stable": 4}


def test_frozen_counts(no_lad, lattice_demo):
    for market, expected in ((no_lad, NO_LAD_COUNTS), (lattice_demo, LATTICE_COUNTS)):
        for kind, count in expected.items():
            assert len(enumerate_allocations(market, kind)) == count, kind


def test_stable_sets_exact(no_lad, lattice_demo):
    assert set(enumerate_allocations(no_lad, "stable")) == {DOCTOR_OPT, HOSPITAL_OPT}
    assert set(enumerate_allocations(lattice_demo, "stable")) == set(LD_STABLE)


def test_enumeration_is_sorted_and_nested(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        tiers = [enumerate_allocations(market, k) for k in ("allocation", "ir", "envy-free", "stable")]
        for tier in tiers:
            assert tier == sorted(tier, key=canon)
        for smaller, larger in zip(tiers[1:], tiers):
            assert set(smaller) <= set(larger)


def test_enumerator_equals_subset_filter(no_lad, lattice_demo):
    markets = [no_lad, lattice_demo]
    for seed in range(12):
        markets.append(
            generate_responsive_market(
                GenParams(doctors=2, hospitals=2, contracts=6, seed=300 + seed)
            )
        )
    for market in markets:
        for kind in ("allocation", "ir", "envy-free", "stable"):
            assert enumerate_allocations(market, kind) == powerset_allocations(market, kind)


def test_unknown_class(no_lad):
    from envylattice import MarketError

    with pytest.raises(MarketError):
        enumerate_allocations(no_lad, "everything")


def test_enumeration_cap(no_lad):
    with pytest.raises(EnumerationCapError):
        enumerate_allocations(no_lad, "allocation", cap=3)
    # the cap bounds the contract count, not the result count
    assert enumerate_allocations(no_lad, "allocation", cap=6)


def test_env_var_cap(no_lad, monkeypatch):
    monkeypatch.setenv("ENVYLATTICE_ENUM_CAP", "4")
    with pytest.raises(EnumerationCapError):
        enumerate_allocations(no_lad, "allocation")
    monkeypatch.setenv("ENVYLATTICE_ENUM_CAP", "6")
    assert len(enumerate_allocations(no_lad, "allocation")) == 27


def test_golden_classifications(no_lad):
    rep = classify(no_lad, EF_MIDDLE)
    assert rep.is_allocation and rep.is_ir and rep.is_envy_free and not rep.is_stable
    assert rep.blocking == frozenset({"x12"})
    assert rep.envy == ()

    rep = classify(no_lad, EF_LOW)
    assert rep.is_envy_free and not rep.is_stable
    assert rep.blocking == frozenset({"x13", "x23"})

    for Y in (DOCTOR_OPT, HOSPITAL_OPT):
        rep = classify(no_lad, Y)
        assert rep.is_stable and rep.blocking == frozenset() and rep.envy == ()


def test_classify_non_allocation(no_lad):
    rep = classify(no_lad, frozenset({"x13", "x23"}))
    assert not rep.is_allocation
    assert rep.violations
    assert not rep.is_ir and not rep.is_envy_free and not rep.is_stable


def test_blocking_against_oracle(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "ir"):
            assert blocking_contracts(market, Y) == brute_blocking(market, Y), canon(Y)


def test_envy_against_oracle(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "ir"):
            got = [
                (w.envious, w.envied, w.held, w.desired, w.hospital)
                for w in justified_envy_witnesses(market, Y)
            ]
            assert got == brute_envy(market, Y), canon(Y)


def test_blocking_and_envy_on_random_markets():
    for seed in range(20):
        market = generate_responsive_market(
            GenParams(doctors=3, hospitals=2, contracts=7, seed=600 + seed)
        )
        rng = random.Random(f"classify:{seed}")
        allocations = enumerate_allocations(market, "allocation")
        for Y in rng.sample(allocations, min(12, len(allocations))):
            assert blocking_contracts(market, Y) == brute_blocking(market, Y)
            got = [
                (w.envious, w.envied, w.held, w.desired, w.hospital)
                for w in justified_envy_witnesses(market, Y)
            ]
            assert got == brute_envy(market, Y)


def test_stability_decomposition(no_lad, lattice_demo):
    # stable == IR + no blocking; envy-free == IR + no justified envy
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "allocation"):
            ir = is_individually_rational(market, Y)
            assert is_stable(market, Y) == (ir and not blocking_contracts(market, Y))
            assert is_envy_free(market, Y) == (ir and not justified_envy_witnesses(market, Y))


def test_stable_implies_envy_free(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "stable"):
            assert is_envy_free(market, Y)


def test_self_envy():
    # one doctor, two contracts at the same hospital; both sides prefer b,
    # so holding a leaves the doctor enviously eyeing her own upgrade
    m = Market(
        doctors=(DoctorSpec(id="d", choice=ResponsiveDoctor(quota=1, ranking=("b", "a"))),),
        hospitals=(HospitalSpec(id="h", quota=1, ranking=("b", "a")),),
        contracts=(
            Contract(id="a", doctor="d", hospital="h"),
            Contract(id="b", doctor="d", hospital="h"),
        ),
    )
    Y = frozenset({"a"})
    assert is_individually_rational(m, Y)
    witnesses = justified_envy_witnesses(m, Y)
    assert [(w.envious, w.envied, w.held, w.desired) for w in witnesses] == [
        ("d", "d", "a", "b")
    ]
    assert not is_envy_free(m, Y)
    assert blocking_contracts(m, Y) == frozenset({"b"})


def test_vacancy_blocking_without_envy():
    # an open slot lets a contract block without wronging anyone
    m = Market(
        doctors=(
            DoctorSpec(id="d1", choice=ResponsiveDoctor(quota=1, ranking=("a",))),
            DoctorSpec(id="d2", choice=ResponsiveDoctor(quota=1, ranking=("b",))),
        ),
        hospitals=(HospitalSpec(id="h", quota=2, ranking=("a", "b")),),
        contracts=(
            Contract(id="a", doctor="d1", hospital="h"),
            Contract(id="b", doctor="d2", hospital="h"),
        ),
    )
    Y = frozenset({"a"})
    assert is_envy_free(m, Y)
    assert blocking_contracts(m, Y) == frozenset({"b"})
    assert not is_stable(m, Y)


def test_classification_report_shape(no_lad):
    rep = classify(no_lad, DOCTOR_OPT)
    assert rep.violations == ()
    assert isinstance(rep.blocking, frozenset)
    assert isinstance(rep.envy, tuple)
