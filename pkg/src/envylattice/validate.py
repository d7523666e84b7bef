"""Whole-market validation.

Validation runs in two passes.  A structural pass checks that ids are
unique and resolvable and that every agent spec is well formed (rankings
name own contracts without duplicates, quotas are positive, choice
tables are total over the doctor's contracts with rows contained in
their keys).  Structural failures are fatal and suppress the second
pass, which replays the choice-axiom checkers on every doctor.  Axiom
failures are fatal except for the law of aggregate demand, which the
model treats as an optional regularity and reports informatively.
"""

from __future__ import annotations

from dataclasses import dataclass

from .choice import DEFAULT_LIMITS, PROPERTIES, CHECKERS, PropertyWitness, ValidationLimits
from .model import Market, TableDoctor


@dataclass(frozen=True)
class ValidationEntry:
    agent: str
    agent_kind: str  # "doctor" | "hospital" | "market"
    prop: str
    passed: bool
    severity: str  # "fatal" | "informative"
    sampled: bool = False
    witness: PropertyWitness | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[ValidationEntry, ...]

    @property
    def ok(self) -> bool:
        return not self.fatal

    @property
    def fatal(self) -> tuple[ValidationEntry, ...]:
        return tuple(
            e for e in self.entries if not e.passed and e.severity == "fatal"
        )


def _structural(market: Market) -> list[ValidationEntry]:
    bad: list[ValidationEntry] = []

    def flag(agent, kind, detail):
        bad.append(
            ValidationEntry(
                agent=agent, agent_kind=kind, prop="structure",
                passed=False, severity="fatal", detail=detail,
            )
        )

    seen: set[str] = set()
    for c in market.contracts:
        if c.id in seen:
            flag(c.id, "market", f"duplicate contract id {c.id}")
        seen.add(c.id)
    doctor_ids = [d.id for d in market.doctors]
    hospital_ids = [h.id for h in market.hospitals]
    for name, ids in (("doctor", doctor_ids), ("hospital", hospital_ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        for i in dupes:
            flag(i, name, f"duplicate {name} id {i}")
    overlap = sorted(set(doctor_ids) & set(hospital_ids))
    for i in overlap:
        # Restriction by agent id must be unambiguous.
        flag(i, "market", f"id {i} names both a doctor and a hospital")
    for c in market.contracts:
        if c.doctor not in market.doctor_by_id:
            flag(c.id, "market", f"contract {c.id} names unknown doctor {c.doctor}")
        if c.hospital not in market.hospital_by_id:
            flag(c.id, "market", f"contract {c.id} names unknown hospital {c.hospital}")
    if bad:
        # Ids are unusable; the per-agent checks below assume clean indexes.
        return bad

    for h in market.hospitals:
        if h.quota < 1:
            flag(h.id, "hospital", f"hospital {h.id} has quota {h.quota}, expected >= 1")
        own = market.hospital_contracts[h.id]
        seen_r: set[str] = set()
        for cid in h.ranking:
            if cid in seen_r:
                flag(h.id, "hospital", f"hospital {h.id} ranks {cid} twice")
            seen_r.add(cid)
            if cid not in own:
                flag(h.id, "hospital", f"hospital {h.id} ranks {cid}, which does not name it")

    for d in market.doctors:
        own = market.doctor_contracts[d.id]
        rule = d.choice
        if isinstance(rule, TableDoctor):
            rows = rule.table
            for given, chosen in rows.items():
                if not given:
                    flag(d.id, "doctor", f"doctor {d.id} has a table row for the empty set")
                if not given <= own:
                    extra = sorted(given - own)
                    flag(d.id, "doctor", f"doctor {d.id} table row {sorted(given)} uses foreign ids {extra}")
                if not chosen <= given:
                    flag(d.id, "doctor", f"doctor {d.id} table row {sorted(given)} chooses outside the row: {sorted(chosen - given)}")
            want = (1 << len(own)) - 1
            usable = sum(1 for g in rows if g and g <= own)
            if usable != want:
                flag(d.id, "doctor", f"doctor {d.id} table has {usable} valid rows, needs {want} (one per nonempty subset)")
        else:
            if rule.quota < 1:
                flag(d.id, "doctor", f"doctor {d.id} has quota {rule.quota}, expected >= 1")
            seen_r = set()
            for cid in rule.ranking:
                if cid in seen_r:
                    flag(d.id, "doctor", f"doctor {d.id} ranks {cid} twice")
                seen_r.add(cid)
                if cid not in own:
                    flag(d.id, "doctor", f"doctor {d.id} ranks {cid}, which does not name them")
    return bad


def validate_market(
    market: Market, limits: ValidationLimits = DEFAULT_LIMITS
) -> ValidationReport:
    """Validate structure first, then the choice axioms doctor by doctor.

    Deterministic: identical markets produce identical reports, including
    any sampled checks, whose generators are seeded from agent ids.
    """
    structural = _structural(market)
    if structural:
        return ValidationReport(entries=tuple(structural))

    entries: list[ValidationEntry] = []
    for d in sorted(market.doctors, key=lambda s: s.id):
        for prop in PROPERTIES:
            outcome = CHECKERS[prop](market, d.id, limits)
            severity = "informative" if prop == "lad" else "fatal"
            entries.append(
                ValidationEntry(
                    agent=d.id, agent_kind="doctor", prop=prop,
                    passed=outcome.passed, severity=severity,
                    sampled=outcome.sampled, witness=outcome.witness,
                )
            )
    for h in sorted(market.hospitals, key=lambda s: s.id):
        # Quota rules over a strict ranking satisfy every axiom; the
        # ranking itself was vetted structurally.
        entries.append(
            ValidationEntry(
                agent=h.id, agent_kind="hospital", prop="ranking",
                passed=True, severity="fatal",
            )
        )
    return ValidationReport(entries=tuple(entries))
