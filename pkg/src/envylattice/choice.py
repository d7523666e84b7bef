"""Choice evaluation and choice-axiom checking.

Doctor choice functions must satisfy, over subsets of the doctor's own
contracts X_d:

* containment and distinctness: C(S) is a subset of S naming pairwise
  distinct hospitals;
* substitutability: C(Y) & Yp <= C(Yp) whenever Yp <= Y;
* consistency: C(Yp) == C(Y) whenever C(Y) <= Yp <= Y;
* path independence: C(Y | Yp) == C(C(Y) | Yp)  (implied by the two
  properties above, checked anyway as a derived cross-check);
* law of aggregate demand (LAD), informative only: |C(Yp)| <= |C(Y)|
  whenever Yp <= Y.

The quantified checks run over single-element removals instead of all
subset pairs: the full universally-quantified properties follow from the
single-removal instances by induction on the removed set.  Witnesses are
reported as full (Y, Yp) pairs either way so that replaying them through
the evaluator reproduces the violation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import (
    InvariantViolation,
    Market,
    ResponsiveDoctor,
    TableDoctor,
    UnknownIdError,
    canon,
)

PROPERTIES = (
    "distinct-hospitals",
    "substitutability",
    "consistency",
    "path-independence",
    "lad",
)


def doctor_choose(market: Market, doctor: str, S) -> frozenset:
    """C_d(S): evaluate the doctor's choice on S & X_d.

    The empty restriction always chooses the empty set.  For table
    doctors a missing row is a hard fault: validation proves totality, so
    a miss means the table was mutated after construction.
    """
    spec = market.doctor_by_id.get(doctor)
    if spec is None:
        raise UnknownIdError(f"unknown doctor id: {doctor!r}")
    own = frozenset(S) & market.doctor_contracts[doctor]
    if not own:
        return frozenset()
    key = ("D", doctor, own)
    cached = market._choice_cache.get(key)
    if cached is not None:
        return cached
    rule = spec.choice
    if isinstance(rule, TableDoctor):
        try:
            chosen = rule.table[own]
        except KeyError:
            raise InvariantViolation(
                f"choice table for doctor {doctor} has no row for {canon(own)}"
            ) from None
    else:
        chosen = _responsive_choose(market, rule, own)
    market._choice_cache[key] = chosen
    return chosen


def _responsive_choose(market: Market, rule: ResponsiveDoctor, own: frozenset) -> frozenset:
    taken: list[str] = []
    used_hospitals: set[str] = set()
    for cid in rule.ranking:
        if len(taken) >= rule.quota:
            break
        if cid not in own:
            continue
        h = market.contract_by_id[cid].hospital
        if h in used_hospitals:
            continue
        used_hospitals.add(h)
        taken.append(cid)
    return frozenset(taken)


def hospital_choose(market: Market, hospital: str, S) -> frozenset:
    """C_h(S): the best-ranked acceptable contracts of S & X_h, up to quota."""
    spec = market.hospital_by_id.get(hospital)
    if spec is None:
        raise UnknownIdError(f"unknown hospital id: {hospital!r}")
    own = frozenset(S) & market.hospital_contracts[hospital]
    if not own:
        return frozenset()
    key = ("H", hospital, own)
    cached = market._choice_cache.get(key)
    if cached is not None:
        return cached
    ranked = [cid for cid in spec.ranking if cid in own]
    chosen = frozenset(ranked[: spec.quota])
    market._choice_cache[key] = chosen
    return chosen


def agent_choose(market: Market, agent: str, S) -> frozenset:
    """Dispatch to the doctor or hospital evaluator by agent id."""
    if agent in market.doctor_by_id:
        return doctor_choose(market, agent, S)
    if agent in market.hospital_by_id:
        return hospital_choose(market, agent, S)
    raise UnknownIdError(f"unknown agent id: {agent!r}")


def hospital_prefers(market: Market, hospital: str, a: str, b: str) -> bool:
    """Strict contract-level comparison a > b for ``hospital``.

    Acceptable beats unacceptable; among acceptable contracts the ranking
    position decides.  Two unacceptable contracts are never comparable.
    """
    rank = market.hospital_rank[hospital]
    if a not in rank:
        return False
    return b not in rank or rank[a] < rank[b]


def hospital_accepts(market: Market, hospital: str, x: str) -> bool:
    """Whether signing x alone beats the empty set for ``hospital``."""
    return x in market.hospital_rank[hospital]


@dataclass(frozen=True)
class PropertyWitness:
    """A violating instance of one choice axiom.

    ``subsets`` holds the one or two contract sets quantified over and
    ``choices`` the evaluator's answers on them, in the same order.
    Replaying the subsets through the evaluator must reproduce
    ``choices`` and hence the violation.
    """

    prop: str
    subsets: tuple[tuple[str, ...], ...]
    choices: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class CheckOutcome:
    """Result of one axiom check on one agent."""

    prop: str
    passed: bool
    witness: PropertyWitness | None
    sampled: bool


@dataclass(frozen=True)
class ValidationLimits:
    """Exhaustiveness caps for the axiom checkers.

    Up to ``subset_cap`` own contracts the single-removal sweeps cover
    all n * 2^n instances; path independence sweeps all 4^n subset pairs
    up to ``pair_cap``.  Larger agents are spot-checked with ``samples``
    seeded random instances and the outcome is marked sampled.
    """

    subset_cap: int = 16
    pair_cap: int = 10
    samples: int = 2000


DEFAULT_LIMITS = ValidationLimits()


class _MaskEnv:
    """Bitmask view of one doctor's choice function.

    Subsets of X_d are masks over a fixed sorted contract order; choices
    are evaluated through ``doctor_choose`` and stored as masks so the
    checkers run on integer operations only.
    """

    def __init__(self, market: Market, doctor: str, masks):
        self.contracts = canon(market.doctor_contracts[doctor])
        self.index = {cid: i for i, cid in enumerate(self.contracts)}
        self.market = market
        self.doctor = doctor
        self.choice: dict[int, int] = {}
        for mask in masks:
            self.choice[mask] = self.eval(mask)

    def eval(self, mask: int) -> int:
        got = self.choice.get(mask)
        if got is not None:
            return got
        S = frozenset(
            cid for i, cid in enumerate(self.contracts) if mask >> i & 1
        )
        chosen = doctor_choose(self.market, self.doctor, S)
        out = 0
        for cid in chosen:
            out |= 1 << self.index[cid]
        self.choice[mask] = out
        return out

    def ids(self, mask: int) -> tuple[str, ...]:
        return tuple(cid for i, cid in enumerate(self.contracts) if mask >> i & 1)

    def witness(self, prop: str, *masks: int) -> PropertyWitness:
        return PropertyWitness(
            prop=prop,
            subsets=tuple(self.ids(m) for m in masks),
            choices=tuple(self.ids(self.eval(m)) for m in masks),
        )


def _subset_masks(market: Market, doctor: str, limits: ValidationLimits):
    """All subset masks when exhaustive, a seeded sample otherwise."""
    n = len(market.doctor_contracts[doctor])
    if n <= limits.subset_cap:
        return list(range(1 << n)), False
    rng = random.Random(f"axiom-check:{doctor}:{n}")
    masks = {0, (1 << n) - 1}
    # a tight samples limit can exceed the whole mask space
    target = min(limits.samples, 1 << n)
    while len(masks) < target:
        masks.add(rng.getrandbits(n))
    return sorted(masks), True


def check_distinct_hospitals(
    market: Market, doctor: str, limits: ValidationLimits = DEFAULT_LIMITS
) -> CheckOutcome:
    """C(S) <= S, and no two chosen contracts name the same hospital."""
    masks, sampled = _subset_masks(market, doctor, limits)
    env = _MaskEnv(market, doctor, masks)
    for mask in masks:
        chosen = env.choice[mask]
        if chosen & ~mask:
            return CheckOutcome(
                "distinct-hospitals", False, env.witness("distinct-hospitals", mask), sampled
            )
        hospitals = [
            market.contract_by_id[cid].hospital for cid in env.ids(chosen)
        ]
        if len(hospitals) != len(set(hospitals)):
            return CheckOutcome(
                "distinct-hospitals", False, env.witness("distinct-hospitals", mask), sampled
            )
    return CheckOutcome("distinct-hospitals", True, None, sampled)


def check_substitutable(
    market: Market, doctor: str, limits: ValidationLimits = DEFAULT_LIMITS
) -> CheckOutcome:
    """Chosen contracts stay chosen when other contracts disappear."""
    masks, sampled = _subset_masks(market, doctor, limits)
    env = _MaskEnv(market, doctor, masks)
    for mask in masks:
        chosen = env.choice[mask]
        bits = mask
        while bits:
            low = bits & -bits
            bits ^= low
            sub = mask ^ low
            if (chosen & sub) & ~env.eval(sub):
                return CheckOutcome(
                    "substitutability", False, env.witness("substitutability", mask, sub), sampled
                )
    return CheckOutcome("substitutability", True, None, sampled)


def check_consistency(
    market: Market, doctor: str, limits: ValidationLimits = DEFAULT_LIMITS
) -> CheckOutcome:
    """Dropping unchosen contracts never changes the choice."""
    masks, sampled = _subset_masks(market, doctor, limits)
    env = _MaskEnv(market, doctor, masks)
    for mask in masks:
        chosen = env.choice[mask]
        bits = mask & ~chosen
        while bits:
            low = bits & -bits
            bits ^= low
            sub = mask ^ low
            if env.eval(sub) != chosen:
                return CheckOutcome(
                    "consistency", False, env.witness("consistency", mask, sub), sampled
                )
    return CheckOutcome("consistency", True, None, sampled)


def check_path_independence(
    market: Market, doctor: str, limits: ValidationLimits = DEFAULT_LIMITS
) -> CheckOutcome:
    """C(Y | Yp) == C(C(Y) | Yp) over subset pairs.

    Derived cross-check: substitutability plus consistency imply it, so a
    failure here flags an internal contradiction in the other checks.
    """
    n = len(market.doctor_contracts[doctor])
    if n <= limits.pair_cap:
        pairs = ((a, b) for a in range(1 << n) for b in range(1 << n))
        sampled = False
    else:
        rng = random.Random(f"axiom-check-pairs:{doctor}:{n}")
        pairs = (
            (rng.getrandbits(n), rng.getrandbits(n)) for _ in range(limits.samples)
        )
        sampled = True
    env = _MaskEnv(market, doctor, ())
    for a, b in pairs:
        direct = env.eval(a | b)
        if direct != env.eval(env.eval(a) | b):
            return CheckOutcome(
                "path-independence", False, env.witness("path-independence", a, b), sampled
            )
    return CheckOutcome("path-independence", True, None, sampled)


def check_lad(
    market: Market, doctor: str, limits: ValidationLimits = DEFAULT_LIMITS
) -> CheckOutcome:
    """Law of aggregate demand: smaller offer sets never win more contracts."""
    masks, sampled = _subset_masks(market, doctor, limits)
    env = _MaskEnv(market, doctor, masks)
    for mask in masks:
        size = bin(env.choice[mask]).count("1")
        bits = mask
        while bits:
            low = bits & -bits
            bits ^= low
            sub = mask ^ low
            if bin(env.eval(sub)).count("1") > size:
                return CheckOutcome(
                    "lad", False, env.witness("lad", mask, sub), sampled
                )
    return CheckOutcome("lad", True, None, sampled)


CHECKERS = {
    "distinct-hospitals": check_distinct_hospitals,
    "substitutability": check_substitutable,
    "consistency": check_consistency,
    "path-independence": check_path_independence,
    "lad": check_lad,
}
