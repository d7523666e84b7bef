"""Blair order and the lattice of envy-free allocations.

The doctor-side Blair order compares individually rational allocations:
Y weakly dominates Yp when every doctor, offered the union of the two,
would choose exactly their part of Y, i.e. Y_d == C_d(Y | Yp) for all d.
The dominance test is evaluated restriction-wise, which is the reading
consistent with how the order is actually used by the join and the
fixed-point dynamics.

On the envy-free set the order is a lattice.  The join has a closed
form: let every doctor choose from the union and collect the results.
The meet is computed extensionally, as the join of all common lower
bounds within the complete enumerated envy-free set; no intensional
meet formula is assumed.

``join`` checks that its inputs are individually rational allocations
and that its result is an allocation.  Envy-freeness of the inputs is
the domain on which the lattice guarantees (closure, least upper bound)
are theorems; the computation itself is well defined on any pair of IR
allocations, and callers that need the guarantees should enumerate or
check envy-freeness explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .choice import doctor_choose
from .classify import enumerate_allocations, is_individually_rational, is_stable
from .model import (
    InvariantViolation,
    Market,
    MarketError,
    allocation_violations,
    canon,
    require_allocation,
)


def _require_ir(market: Market, Y) -> frozenset:
    Y = require_allocation(market, Y)
    if not is_individually_rational(market, Y):
        raise MarketError(f"allocation {canon(Y)} is not individually rational")
    return Y


def choice_join(market: Market, Y: frozenset, Yp: frozenset) -> frozenset:
    """Per-doctor choice from the union; the hospital side just collects."""
    union = Y | Yp
    out: set = set()
    for d in market.doctors:
        out |= doctor_choose(market, d.id, union)
    return frozenset(out)


def blair_dominates(market: Market, Y, Yp, weak: bool = True) -> bool:
    """Whether Y dominates Yp in the doctor-side Blair order.

    Both arguments must be individually rational allocations.  With
    ``weak=False`` the comparison is strict (dominance plus inequality).
    """
    Y = _require_ir(market, Y)
    Yp = _require_ir(market, Yp)
    if not weak and Y == Yp:
        return False
    union = Y | Yp
    for d in market.doctors:
        own = Y & market.doctor_contracts[d.id]
        if doctor_choose(market, d.id, union) != own:
            return False
    return True


def join(market: Market, Y, Yp) -> frozenset:
    """Least upper bound of two envy-free allocations in the Blair order.

    Accepts any pair of individually rational allocations; the lattice
    guarantees hold when both are envy-free.  The result is verified to
    be an allocation and returned as a frozenset.
    """
    Y = _require_ir(market, Y)
    Yp = _require_ir(market, Yp)
    result = choice_join(market, Y, Yp)
    bad = allocation_violations(market, result)
    if bad:
        raise InvariantViolation(
            "join produced a non-allocation (inputs are outside the "
            "envy-free domain): " + "; ".join(bad)
        )
    return result


def meet(market: Market, Y, Yp, envy_free) -> frozenset:
    """Greatest lower bound of Y and Yp within the enumerated envy-free set.

    ``envy_free`` must be the complete enumeration; the meet is computed
    extensionally as the join of all common lower bounds, then verified
    to be a common lower bound itself.
    """
    Y = frozenset(Y)
    Yp = frozenset(Yp)
    members = {frozenset(Z) for Z in envy_free}
    for name, Z in (("left", Y), ("right", Yp)):
        if Z not in members:
            raise MarketError(
                f"{name} allocation {canon(Z)} is not in the supplied envy-free set"
            )
    lower = [
        Z
        for Z in sorted(members, key=canon)
        if blair_dominates(market, Y, Z) and blair_dominates(market, Yp, Z)
    ]
    if not lower:
        # The empty allocation is envy-free and below everything, so a
        # complete enumeration always yields at least one lower bound.
        raise MarketError("supplied envy-free set has no common lower bound; is it complete?")
    glb = lower[0]
    for Z in lower[1:]:
        glb = join(market, glb, Z)
    if not (blair_dominates(market, Y, glb) and blair_dominates(market, Yp, glb)):
        raise InvariantViolation(
            "join of the common lower bounds is not itself a lower bound; "
            "the supplied set is not a complete envy-free enumeration"
        )
    return glb


def dominance_matrix(market: Market, nodes: list[frozenset]) -> list[list[bool]]:
    """matrix[i][j] == nodes[i] weakly dominates nodes[j].

    Exploits the join closed form: Y dominates Yp exactly when the
    per-doctor choice from the union reproduces Y.
    """
    n = len(nodes)
    out = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                out[i][j] = True
            else:
                out[i][j] = choice_join(market, nodes[i], nodes[j]) == nodes[i]
    return out


@dataclass(frozen=True)
class LatticeGraph:
    """Hasse diagram of the envy-free set under the Blair order.

    ``covers`` holds (lower, upper) node-index pairs after transitive
    reduction; ``bottom`` indexes the empty allocation, which is always
    envy-free and below every other envy-free allocation.
    """

    nodes: tuple[frozenset, ...]
    covers: tuple[tuple[int, int], ...]
    stable: tuple[bool, ...]
    bottom: int

    def heights(self) -> list[int]:
        """Longest chain length from the bottom to each node."""
        n = len(self.nodes)
        above: dict[int, list[int]] = {i: [] for i in range(n)}
        indeg = [0] * n
        for lo, hi in self.covers:
            above[lo].append(hi)
            indeg[hi] += 1
        height = [0] * n
        queue = [i for i in range(n) if indeg[i] == 0]
        while queue:
            i = queue.pop()
            for j in above[i]:
                height[j] = max(height[j], height[i] + 1)
                indeg[j] -= 1
                if indeg[j] == 0:
                    queue.append(j)
        return height


def hasse(market: Market, cap: int | None = None) -> LatticeGraph:
    """Enumerate the envy-free set and build its Hasse diagram."""
    nodes = enumerate_allocations(market, "envy-free", cap)
    dom = dominance_matrix(market, nodes)
    n = len(nodes)
    covers = []
    for j in range(n):  # lower
        for i in range(n):  # upper
            if i == j or not dom[i][j]:
                continue
            if any(
                k != i and k != j and dom[i][k] and dom[k][j] for k in range(n)
            ):
                continue
            covers.append((j, i))
    covers.sort()
    stable = tuple(is_stable(market, Y) for Y in nodes)
    bottom = nodes.index(frozenset())
    return LatticeGraph(
        nodes=tuple(nodes), covers=tuple(covers), stable=stable, bottom=bottom
    )


def _stable_set(market: Market, cap: int | None) -> list[frozenset]:
    stable = enumerate_allocations(market, "stable", cap)
    if not stable:
        raise InvariantViolation(
            "stable set is empty; the market violates the choice axioms"
        )
    return stable


def doctor_optimal(market: Market, cap: int | None = None) -> frozenset:
    """The stable allocation every doctor weakly prefers (Blair-greatest)."""
    stable = _stable_set(market, cap)
    for Y in stable:
        if all(blair_dominates(market, Y, Z) for Z in stable):
            return Y
    raise InvariantViolation("no Blair-extremum in stable set")


def hospital_optimal(market: Market, cap: int | None = None) -> frozenset:
    """The Blair-least stable allocation (doctors' unanimous worst)."""
    stable = _stable_set(market, cap)
    for Y in stable:
        if all(blair_dominates(market, Z, Y) for Z in stable):
            return Y
    raise InvariantViolation("no Blair-extremum in stable set")


def _node_label(Y: frozenset) -> str:
    return "{" + ", ".join(canon(Y)) + "}" if Y else "∅"


def to_dot(graph: LatticeGraph) -> str:
    """Deterministic Graphviz rendering, bottom-up, stable nodes filled."""
    lines = [
        "digraph envy_free_lattice {",
        "  rankdir=BT;",
        '  node [shape=box, fontname="Helvetica"];',
    ]
    for i, Y in enumerate(graph.nodes):
        style = ' style="bold,filled" fillcolor="lightgrey"' if graph.stable[i] else ""
        lines.append(f'  n{i} [label="{_node_label(Y)}"{style}];')
    for lo, hi in graph.covers:
        lines.append(f"  n{lo} -> n{hi};")
    height = graph.heights()
    for level in sorted(set(height)):
        members = " ".join(f"n{i};" for i, hh in enumerate(height) if hh == level)
        lines.append(f"  {{ rank=same; {members} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph: LatticeGraph) -> dict:
    return {
        "nodes": [list(canon(Y)) for Y in graph.nodes],
        "covers": [list(edge) for edge in graph.covers],
        "stable": list(graph.stable),
        "bottom": graph.bottom,
    }
