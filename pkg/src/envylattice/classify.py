"""Solution concepts: individual rationality, blocking, justified envy,
stability, and exhaustive enumeration by solution class.

Definitions, for an allocation Y:

* individually rational (IR): C_a(Y) == Y_a for every agent a;
* x outside Y blocks Y when both sides would sign it on top of Y:
  x in C_d(Y | {x}) for the doctor d naming x, and the hospital side
  holds per the quota shortcut: a vacancy plus acceptability, or a held
  contract the hospital ranks below x;
* doctor dp has justified envy at Y when some held contract x in Y and
  some dp-contract xp outside Y name the same hospital h, h ranks xp
  strictly above x, and xp in C_dp(Y | {xp}).  dp == d is allowed: a
  doctor can justifiably envy their own inferior contract;
* envy-free: IR with no justified envy;  stable: IR with no blocking
  contract.  Stability implies envy-freeness: a justified-envy triple is
  itself a blocking contract.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .choice import agent_choose, doctor_choose, hospital_accepts, hospital_prefers
from .model import (
    Market,
    MarketError,
    canon,
    check_ids,
    contract_count_balance,
    require_allocation,
    restrict,
)

CLASSES = ("allocation", "ir", "envy-free", "stable")

DEFAULT_ENUM_CAP = 22
ENUM_CAP_ENV = "ENVYLATTICE_ENUM_CAP"


class EnumerationCapError(MarketError):
    """Raised instead of attempting an enumeration that cannot finish."""


@dataclass(frozen=True)
class EnvyWitness:
    envious: str
    envied: str
    held: str
    desired: str
    hospital: str


@dataclass(frozen=True)
class ClassificationReport:
    """Full classification of one contract set.

    The boolean fields form an implication chain: stable implies
    envy-free implies IR implies allocation.  ``blocking`` and ``envy``
    are populated only when the set is an allocation.
    """

    is_allocation: bool
    violations: tuple[str, ...]
    is_ir: bool
    is_envy_free: bool
    is_stable: bool
    blocking: frozenset
    envy: tuple[EnvyWitness, ...]


def is_individually_rational(market: Market, Y) -> bool:
    Y = require_allocation(market, Y)
    for d in market.doctors:
        own = Y & market.doctor_contracts[d.id]
        if doctor_choose(market, d.id, own) != own:
            return False
    for h in market.hospitals:
        own = Y & market.hospital_contracts[h.id]
        if agent_choose(market, h.id, own) != own:
            return False
    return True


def _hospital_would_take(market: Market, Y: frozenset, x: str) -> bool:
    # Quota shortcut for x in C_h(Y | {x}) on an allocation Y:
    # below quota, acceptability decides; at quota, x must beat a held
    # contract in the hospital's ranking.
    c = market.contract_by_id[x]
    held = Y & market.hospital_contracts[c.hospital]
    if len(held) < market.hospital_by_id[c.hospital].quota:
        return hospital_accepts(market, c.hospital, x)
    return any(hospital_prefers(market, c.hospital, x, held_x) for held_x in held)


def blocking_contracts(market: Market, Y) -> frozenset:
    """All contracts outside Y that block Y.  Requires an allocation."""
    Y = require_allocation(market, Y)
    out = []
    for x in canon(frozenset(market.contract_by_id) - Y):
        c = market.contract_by_id[x]
        if x not in doctor_choose(market, c.doctor, Y | {x}):
            continue
        if _hospital_would_take(market, Y, x):
            out.append(x)
    return frozenset(out)


def justified_envy_witnesses(market: Market, Y) -> tuple[EnvyWitness, ...]:
    """Every justified-envy instance at Y, deterministically ordered."""
    Y = require_allocation(market, Y)
    found = []
    for x in canon(Y):
        held = market.contract_by_id[x]
        h = held.hospital
        for xp in canon(market.hospital_contracts[h] - Y):
            if not hospital_prefers(market, h, xp, x):
                continue
            dp = market.contract_by_id[xp].doctor
            if xp in doctor_choose(market, dp, Y | {xp}):
                found.append(
                    EnvyWitness(envious=dp, envied=held.doctor, held=x, desired=xp, hospital=h)
                )
    found.sort(key=lambda w: (w.hospital, w.held, w.desired, w.envious))
    return tuple(found)


def _has_justified_envy(market: Market, Y: frozenset) -> bool:
    # Short-circuit variant used by the enumeration filters.
    for x in Y:
        held = market.contract_by_id[x]
        h = held.hospital
        for xp in market.hospital_contracts[h] - Y:
            if hospital_prefers(market, h, xp, x):
                dp = market.contract_by_id[xp].doctor
                if xp in doctor_choose(market, dp, Y | {xp}):
                    return True
    return False


def is_envy_free(market: Market, Y) -> bool:
    Y = require_allocation(market, Y)
    return is_individually_rational(market, Y) and not _has_justified_envy(market, Y)


def is_stable(market: Market, Y) -> bool:
    Y = require_allocation(market, Y)
    return is_individually_rational(market, Y) and not blocking_contracts(market, Y)


def classify(market: Market, Y) -> ClassificationReport:
    from .model import allocation_violations

    Y = check_ids(market, Y)
    violations = tuple(allocation_violations(market, Y))
    if violations:
        return ClassificationReport(
            is_allocation=False, violations=violations, is_ir=False,
            is_envy_free=False, is_stable=False, blocking=frozenset(), envy=(),
        )
    ir = is_individually_rational(market, Y)
    blocking = blocking_contracts(market, Y)
    envy = justified_envy_witnesses(market, Y)
    return ClassificationReport(
        is_allocation=True, violations=(), is_ir=ir,
        is_envy_free=ir and not envy, is_stable=ir and not blocking,
        blocking=blocking, envy=envy,
    )


def _resolved_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get(ENUM_CAP_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise MarketError(f"{ENUM_CAP_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_ENUM_CAP


def all_allocations(market: Market, cap: int | None = None) -> list[frozenset]:
    """Every allocation, canonically sorted.

    Walks doctor-hospital pairs depth-first, assigning each pair either
    nothing or one of its contracts, and prunes on hospital quotas, so
    the work is proportional to the number of allocations rather than to
    2^|X|.  Refuses markets above the cap (default 22 contracts,
    overridable via the ENVYLATTICE_ENUM_CAP environment variable).
    """
    cap = _resolved_cap(cap)
    if len(market.contracts) > cap:
        raise EnumerationCapError(
            f"market has {len(market.contracts)} contracts, enumeration cap is {cap}"
        )
    pairs: dict[tuple[str, str], list[str]] = {}
    for c in market.contracts:
        pairs.setdefault((c.doctor, c.hospital), []).append(c.id)
    pair_list = [
        (hospital, sorted(ids)) for (_, hospital), ids in sorted(pairs.items())
    ]
    quota = {h.id: h.quota for h in market.hospitals}
    load = {h.id: 0 for h in market.hospitals}
    chosen: list[str] = []
    out: list[frozenset] = []

    def walk(i: int):
        if i == len(pair_list):
            Y = frozenset(chosen)
            bd, bh, size = contract_count_balance(market, Y)
            if not bd == bh == size:
                raise AssertionError("restriction accounting identity failed")
            out.append(Y)
            return
        walk(i + 1)
        hospital, ids = pair_list[i]
        if load[hospital] < quota[hospital]:
            load[hospital] += 1
            for cid in ids:
                chosen.append(cid)
                walk(i + 1)
                chosen.pop()
            load[hospital] -= 1

    walk(0)
    out.sort(key=canon)
    return out


def enumerate_allocations(
    market: Market, kind: str = "allocation", cap: int | None = None
) -> list[frozenset]:
    """All allocations of the requested solution class, canonically sorted."""
    if kind not in CLASSES:
        raise MarketError(f"unknown class {kind!r}, expected one of {CLASSES}")
    allocations = all_allocations(market, cap)
    if kind == "allocation":
        return allocations
    rational = [Y for Y in allocations if is_individually_rational(market, Y)]
    if kind == "ir":
        return rational
    if kind == "envy-free":
        return [Y for Y in rational if not _has_justified_envy(market, Y)]
    return [Y for Y in rational if not blocking_contracts(market, Y)]
