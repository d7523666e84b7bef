"""Blocking-driven reallocation: one-step map, iteration, retirements."""

from __future__ import annotations

import pytest

from envylattice import (
    GenParams,
    InvariantViolation,
    MarketError,
    RetirementEvent,
    blair_dominates,
    enumerate_allocations,
    generate_responsive_market,
    is_envy_free,
    is_stable,
    reduce_market,
    star_blocking,
    tarski_fixed_point,
    tarski_step,
    vacancy_chain,
    verify_lad_predictions,
)
from envylattice.dynamics import default_iteration_cap

from conftest import (
    DOCTOR_OPT,
    EF_LOW,
    EF_MIDDLE,
    HOSPITAL_OPT,
    LD_DOCTOR_OPT,
)


def test_star_blocking_golden(no_lad):
    # h3 ranks x13 over x23, so only x13 is starred out of the pair
    assert star_blocking(no_lad, EF_MIDDLE) == frozenset({"x12"})
    assert star_blocking(no_lad, EF_LOW) == frozenset({"x13"})
    assert star_blocking(no_lad, DOCTOR_OPT) == frozenset()


def test_one_step_golden(no_lad):
    assert tarski_step(no_lad, EF_MIDDLE) == DOCTOR_OPT
    assert tarski_step(no_lad, EF_LOW) == HOSPITAL_OPT
    assert tarski_step(no_lad, frozenset()) == HOSPITAL_OPT


def test_step_requires_envy_freeness(no_lad):
    # {x12} is individually rational but d2 justifiably envies d1
    with pytest.raises(MarketError):
        tarski_step(no_lad, frozenset({"x12"}))


def test_step_maps_envy_free_into_envy_free(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "envy-free"):
            image = tarski_step(market, Y)
            assert is_envy_free(market, image)
            assert blair_dominates(market, image, Y)


def test_fixed_points_are_exactly_stable(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "envy-free"):
            assert (tarski_step(market, Y) == Y) == is_stable(market, Y)


def test_isotone_on_comparable_pairs(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        nodes = enumerate_allocations(market, "envy-free")
        for a in nodes:
            for b in nodes:
                if blair_dominates(market, a, b):
                    assert blair_dominates(
                        market, tarski_step(market, a), tarski_step(market, b)
                    )


def test_trace_golden(no_lad):
    trace = tarski_fixed_point(no_lad, EF_MIDDLE)
    assert trace.fixed_point == DOCTOR_OPT
    assert trace.iterations == 1
    assert [s.allocation for s in trace.steps] == [EF_MIDDLE, DOCTOR_OPT]
    first = trace.steps[0]
    assert first.blocking == frozenset({"x12"})
    assert first.starred == frozenset({"x12"})
    assert first.per_doctor == {"d1": frozenset({"x12"})}
    last = trace.steps[-1]
    assert last.blocking == frozenset() and last.per_doctor == {}


def test_trace_from_stable_is_trivial(no_lad):
    trace = tarski_fixed_point(no_lad, HOSPITAL_OPT)
    assert trace.iterations == 0
    assert trace.fixed_point == HOSPITAL_OPT
    assert [s.allocation for s in trace.steps] == [HOSPITAL_OPT]


def test_every_envy_free_start_reaches_stable(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        for Y in enumerate_allocations(market, "envy-free"):
            trace = tarski_fixed_point(market, Y)
            assert is_stable(market, trace.fixed_point)
            assert trace.iterations <= default_iteration_cap(market)


def test_iteration_cap(no_lad):
    with pytest.raises(InvariantViolation):
        tarski_fixed_point(no_lad, EF_MIDDLE, cap=0)
    assert tarski_fixed_point(no_lad, EF_MIDDLE, cap=1).fixed_point == DOCTOR_OPT
    assert default_iteration_cap(no_lad) == 13


def test_reduce_market(no_lad):
    reduced = reduce_market(no_lad, {"d1"})
    assert [d.id for d in reduced.doctors] == ["d2"]
    assert sorted(c.id for c in reduced.contracts) == ["x21", "x22", "x23"]
    assert {h.id: h.ranking for h in reduced.hospitals} == {
        "h1": ("x21",),
        "h2": ("x22",),
        "h3": ("x23",),
    }
    with pytest.raises(MarketError):
        reduce_market(no_lad, {"d9"})


def test_vacancy_chain_golden(no_lad):
    # d1 leaves the hospital-side optimum: d2 walks her upgrade chain
    reduced, trace = vacancy_chain(
        no_lad, RetirementEvent(retiring=frozenset({"d1"}), before=HOSPITAL_OPT)
    )
    assert sorted(c.id for c in reduced.contracts) == ["x21", "x22", "x23"]
    assert trace.fixed_point == frozenset({"x23"})
    assert trace.iterations == 1
    assert [s.allocation for s in trace.steps] == [
        frozenset({"x21", "x22"}),
        frozenset({"x23"}),
    ]

    # d2 leaves the doctor-side optimum: nothing worth re-signing appears
    reduced, trace = vacancy_chain(
        no_lad, RetirementEvent(retiring=frozenset({"d2"}), before=DOCTOR_OPT)
    )
    assert trace.fixed_point == frozenset({"x11", "x12"})
    assert trace.iterations == 0


def test_vacancy_chain_survivors_start_envy_free(no_lad, lattice_demo):
    for market in (no_lad, lattice_demo):
        doctors = sorted(market.doctor_by_id)
        for before in enumerate_allocations(market, "stable"):
            for retiree in doctors:
                reduced, trace = vacancy_chain(
                    market, RetirementEvent(retiring=frozenset({retiree}), before=before)
                )
                surviving = frozenset(
                    x for x in before if market.contract_by_id[x].doctor != retiree
                )
                assert trace.steps[0].allocation == surviving
                assert is_envy_free(reduced, surviving)
                assert is_stable(reduced, trace.fixed_point)


def test_vacancy_chain_retire_everyone(no_lad):
    reduced, trace = vacancy_chain(
        no_lad, RetirementEvent(retiring=frozenset({"d1", "d2"}), before=DOCTOR_OPT)
    )
    assert reduced.contracts == ()
    assert trace.fixed_point == frozenset()
    assert trace.iterations == 0


def test_vacancy_chain_preconditions(no_lad):
    with pytest.raises(MarketError):
        vacancy_chain(no_lad, RetirementEvent(retiring=frozenset(), before=DOCTOR_OPT))
    with pytest.raises(MarketError):
        vacancy_chain(
            no_lad, RetirementEvent(retiring=frozenset({"d1"}), before=EF_MIDDLE)
        )


def test_lad_report_no_lad_market(no_lad):
    report = verify_lad_predictions(no_lad, EF_MIDDLE)
    assert not report.applicable
    assert report.lad_failures == ("d2",)
    checks = report.checks
    assert not checks["fixed_point_equals_join"].holds
    assert checks["fixed_point_equals_join"].detail["fixed_point"] == ["x11", "x12", "x23"]
    assert checks["fixed_point_equals_join"].detail["join_with_hospital_optimal"] == [
        "x11",
        "x23",
    ]
    assert not checks["dominating_envy_free_is_stable"].holds
    assert not checks["stable_counts_constant"].holds
    violated = {v["agent"] for v in checks["stable_counts_constant"].detail["violations"]}
    assert violated == {"d1", "d2"}
    assert checks["envy_free_never_exceeds_stable_counts"].holds


def test_lad_report_from_empty_start(no_lad):
    report = verify_lad_predictions(no_lad, frozenset())
    assert not report.applicable
    assert report.checks["fixed_point_equals_join"].holds
    assert report.checks["dominating_envy_free_is_stable"].holds
    assert not report.checks["stable_counts_constant"].holds


def test_lad_report_lattice_demo(lattice_demo):
    report = verify_lad_predictions(lattice_demo, frozenset())
    assert not report.applicable
    assert report.lad_failures == ("d1",)
    assert all(check.holds for check in report.checks.values())


def test_lad_report_on_valid_market():
    market = generate_responsive_market(
        GenParams(doctors=3, hospitals=2, contracts=8, seed=77)
    )
    for Y in enumerate_allocations(market, "envy-free"):
        report = verify_lad_predictions(market, Y)
        assert report.applicable
        assert report.lad_failures == ()
        assert all(check.holds for check in report.checks.values()), {
            k: v.detail for k, v in report.checks.items() if not v.holds
        }


def test_lad_report_requires_envy_free_start(no_lad):
    with pytest.raises(MarketError):
        verify_lad_predictions(no_lad, frozenset({"x12"}))


def test_fixed_point_requires_envy_free_start(no_lad):
    with pytest.raises(MarketError):
        tarski_fixed_point(no_lad, frozenset({"x12"}))
