"""Re-equilibration dynamics on the envy-free set.

One adjustment round starting from an envy-free allocation Y: collect
the blocking contracts of Y, keep only each hospital's best one (the
starred set), hand every doctor their starred contracts on top of Y,
and let them re-choose.  The round maps envy-free allocations to
envy-free allocations, never moves a doctor down the Blair order, and
its fixed points are exactly the stable allocations, so iterating from
any envy-free start walks up to a stable outcome.  Both facts are
asserted on every computed step; their failure means the market
violates the choice axioms and is reported loudly.

The vacancy-chain operation applies this to retirements: deleting some
doctors (and all their contracts) from a market leaves the surviving
part of any stable allocation envy-free in the reduced market, and the
iteration re-stabilizes it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .choice import doctor_choose, hospital_prefers
from .classify import (
    blocking_contracts,
    enumerate_allocations,
    is_envy_free,
    is_stable,
    justified_envy_witnesses,
)
from .lattice import blair_dominates, choice_join, hospital_optimal
from .model import (
    HospitalSpec,
    InvariantViolation,
    Market,
    MarketError,
    canon,
    require_allocation,
)


def _require_envy_free(market: Market, Y) -> frozenset:
    Y = require_allocation(market, Y)
    if not is_envy_free(market, Y):
        raise MarketError(f"allocation {canon(Y)} is not envy-free")
    return Y


def star_blocking(market: Market, Y) -> frozenset:
    """Each hospital's best blocking contract at Y (its ranking decides)."""
    Y = _require_envy_free(market, Y)
    blocking = blocking_contracts(market, Y)
    best: dict[str, str] = {}
    for x in canon(blocking):
        h = market.contract_by_id[x].hospital
        cur = best.get(h)
        if cur is None or hospital_prefers(market, h, x, cur):
            best[h] = x
    return frozenset(best.values())


def tarski_step(market: Market, Y) -> frozenset:
    """One adjustment round.  Requires and returns an envy-free allocation."""
    Y = _require_envy_free(market, Y)
    starred = star_blocking(market, Y)
    result: set = set()
    for d in market.doctors:
        gained = starred & market.doctor_contracts[d.id]
        result |= doctor_choose(market, d.id, Y | gained)
    out = frozenset(result)
    if not is_envy_free(market, out):
        raise InvariantViolation(
            f"adjustment round left the envy-free set at {canon(Y)} -> {canon(out)}"
        )
    if not blair_dominates(market, out, Y):
        raise InvariantViolation(
            f"adjustment round moved doctors down the Blair order at {canon(Y)}"
        )
    return out


@dataclass(frozen=True)
class TarskiStep:
    """State before one application: the allocation and its blocking data.

    ``per_doctor`` maps each doctor with starred contracts to them; the
    final step of a trace has all three collections empty.
    """

    allocation: frozenset
    blocking: frozenset
    starred: frozenset
    per_doctor: dict[str, frozenset]


@dataclass(frozen=True)
class TarskiTrace:
    steps: tuple[TarskiStep, ...]
    fixed_point: frozenset
    iterations: int


def _describe(market: Market, Y: frozenset) -> TarskiStep:
    blocking = blocking_contracts(market, Y)
    starred = star_blocking(market, Y)
    per_doctor = {}
    for d in sorted(market.doctor_contracts):
        gained = starred & market.doctor_contracts[d]
        if gained:
            per_doctor[d] = gained
    return TarskiStep(
        allocation=Y, blocking=blocking, starred=starred, per_doctor=per_doctor
    )


def default_iteration_cap(market: Market) -> int:
    # Each round strictly improves some doctor; |X| * |D| + 1 rounds is a
    # generous bound on any monotone walk through the envy-free set.
    return len(market.contracts) * max(len(market.doctors), 1) + 1


def tarski_fixed_point(market: Market, Y, cap: int | None = None) -> TarskiTrace:
    """Iterate adjustment rounds from Y until stable.

    The trace records every visited allocation including the fixed
    point; ``iterations`` counts the applications.  Exceeding the cap is
    a hard fault: on an axiom-satisfying market the walk provably
    terminates well inside it.
    """
    Y = _require_envy_free(market, Y)
    if cap is None:
        cap = default_iteration_cap(market)
    steps = [_describe(market, Y)]
    current = Y
    while steps[-1].blocking:
        if len(steps) > cap:
            raise InvariantViolation(
                f"no fixed point within {cap} iterations; the market "
                "violates the choice axioms"
            )
        current = tarski_step(market, current)
        steps.append(_describe(market, current))
    if not is_stable(market, current):
        raise InvariantViolation("iteration stopped on a non-stable allocation")
    return TarskiTrace(
        steps=tuple(steps), fixed_point=current, iterations=len(steps) - 1
    )


@dataclass(frozen=True)
class RetirementEvent:
    retiring: frozenset  # doctor ids
    before: frozenset  # stable allocation in the full market


def reduce_market(market: Market, retiring) -> Market:
    """The market without the retiring doctors and all their contracts."""
    retiring = frozenset(retiring)
    unknown = sorted(r for r in retiring if r not in market.doctor_by_id)
    if unknown:
        raise MarketError(f"unknown doctor ids: {unknown}")
    dead = {c.id for c in market.contracts if c.doctor in retiring}
    doctors = tuple(d for d in market.doctors if d.id not in retiring)
    contracts = tuple(c for c in market.contracts if c.id not in dead)
    hospitals = tuple(
        HospitalSpec(
            id=h.id,
            quota=h.quota,
            ranking=tuple(cid for cid in h.ranking if cid not in dead),
        )
        for h in market.hospitals
    )
    return Market(doctors=doctors, hospitals=hospitals, contracts=contracts)


def vacancy_chain(
    market: Market, event: RetirementEvent, cap: int | None = None
) -> tuple[Market, TarskiTrace]:
    """Re-stabilize after retirements.

    Checks that ``event.before`` is stable, builds the reduced market,
    keeps the surviving part of the allocation, asserts it is envy-free
    there (anything else disproves the model and is raised with the
    witnesses attached, never repaired), and iterates to a fixed point.
    """
    if not event.retiring:
        raise MarketError("retiring set must be nonempty")
    before = require_allocation(market, event.before)
    if not is_stable(market, before):
        raise MarketError(f"allocation {canon(before)} is not stable in this market")
    reduced = reduce_market(market, event.retiring)
    surviving = frozenset(
        x for x in before if market.contract_by_id[x].doctor not in event.retiring
    )
    if not is_envy_free(reduced, surviving):
        witnesses = justified_envy_witnesses(reduced, surviving)
        raise InvariantViolation(
            "surviving allocation is not envy-free in the reduced market; "
            f"restriction={canon(surviving)} witnesses={witnesses}"
        )
    trace = tarski_fixed_point(reduced, surviving, cap)
    return reduced, trace


@dataclass(frozen=True)
class CheckVerdict:
    holds: bool
    detail: dict


@dataclass(frozen=True)
class TheoremReport:
    """Outcome of the aggregate-demand consequence checks at one start Y.

    When some doctor fails the law of aggregate demand the consequences
    are not guaranteed; ``applicable`` is False and the verdicts record
    the observed behavior descriptively rather than as failures.
    """

    applicable: bool
    lad_failures: tuple[str, ...]
    checks: dict[str, CheckVerdict]


def verify_lad_predictions(market: Market, Y, cap: int | None = None) -> TheoremReport:
    """Check the consequences of the law of aggregate demand at Y.

    * fixed_point_equals_join: iterating from the envy-free Y lands on
      join(Y, hospital-optimal stable allocation);
    * dominating_envy_free_is_stable: if Y dominates the
      hospital-optimal stable allocation then Y is stable;
    * envy_free_never_exceeds_stable_counts: no doctor signs more at the
      envy-free Y than at any stable allocation;
    * stable_counts_constant: every agent signs the same number of
      contracts in every stable allocation.
    """
    from .choice import check_lad

    Y = _require_envy_free(market, Y)
    lad_failures = tuple(
        d.id
        for d in sorted(market.doctors, key=lambda s: s.id)
        if not check_lad(market, d.id).passed
    )
    stable = enumerate_allocations(market, "stable", cap)
    y_hosp = hospital_optimal(market, cap)
    trace = tarski_fixed_point(market, Y, cap)
    joined = choice_join(market, Y, y_hosp)

    checks: dict[str, CheckVerdict] = {}
    checks["fixed_point_equals_join"] = CheckVerdict(
        holds=trace.fixed_point == joined,
        detail={
            "fixed_point": list(canon(trace.fixed_point)),
            "join_with_hospital_optimal": list(canon(joined)),
            "iterations": trace.iterations,
        },
    )
    dominates = blair_dominates(market, Y, y_hosp)
    y_stable = is_stable(market, Y)
    checks["dominating_envy_free_is_stable"] = CheckVerdict(
        holds=(not dominates) or y_stable,
        detail={"dominates_hospital_optimal": dominates, "is_stable": y_stable},
    )
    size_violations = []
    for Z in stable:
        for d in sorted(market.doctor_contracts):
            mine = len(Y & market.doctor_contracts[d])
            theirs = len(Z & market.doctor_contracts[d])
            if mine > theirs:
                size_violations.append(
                    {"doctor": d, "envy_free_count": mine, "stable_count": theirs,
                     "stable_allocation": list(canon(Z))}
                )
    checks["envy_free_never_exceeds_stable_counts"] = CheckVerdict(
        holds=not size_violations, detail={"violations": size_violations}
    )
    count_violations = []
    pools = [
        (agent, market.doctor_contracts[agent])
        for agent in sorted(market.doctor_contracts)
    ] + [
        (agent, market.hospital_contracts[agent])
        for agent in sorted(market.hospital_contracts)
    ]
    for agent, pool in pools:
        counts = sorted({len(Z & pool) for Z in stable})
        if len(counts) > 1:
            count_violations.append({"agent": agent, "counts": counts})
    checks["stable_counts_constant"] = CheckVerdict(
        holds=not count_violations, detail={"violations": count_violations}
    )
    return TheoremReport(
        applicable=not lad_failures, lad_failures=lad_failures, checks=checks
    )
