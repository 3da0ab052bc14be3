"""Derived probability tables, property preorders, and ortholattice checks.

The operations here are backend-agnostic: a "model" is any object exposing
``state_ids``, ``property_ids``, ``q_probability(state, prop)``, a
``tolerance``, an optional ``lattice`` and a ``first_kind`` registry of
state transforms.  Both the contextual models and the Hilbert-space backend
satisfy that surface.

Lattice tables (meet, join, orthocomplement) are supplied data that gets
verified, never synthesized from the preorder: their existence is a
structural hypothesis of the generalized-measure notion, not a construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .errors import (
    ConditionNullError,
    InvalidModelError,
    NoFirstKindError,
    StateExcludedError,
    UnknownIdError,
)
from .report import FAIL, INFO, PASS, Report
from .tolerances import COMPARISON_EPS

__all__ = [
    "StateProbabilityFamily",
    "PropertyPreorder",
    "OrthoLattice",
    "FirstKindTransform",
    "q_probability",
    "build_preorder",
    "check_ortholattice",
    "check_gpm",
    "classical_conditioning_failure",
    "conditional_q_probability",
]


@dataclass(frozen=True, eq=False)
class StateProbabilityFamily:
    """The (state, property) -> probability table a model induces."""

    states: tuple[str, ...]
    properties: tuple[str, ...]
    table: Mapping[tuple[str, str], object]

    @classmethod
    def from_model(cls, model) -> "StateProbabilityFamily":
        states = tuple(model.state_ids)
        props = tuple(model.property_ids)
        table = {(s, e): model.q_probability(s, e) for s in states for e in props}
        return cls(states, props, table)

    def value(self, state: str, prop: str):
        try:
            return self.table[(state, prop)]
        except KeyError:
            raise UnknownIdError(f"no table entry for ({state!r}, {prop!r})") from None

    def column(self, prop: str) -> tuple:
        return tuple(self.value(s, prop) for s in self.states)


def q_probability(model, state: str, prop: str):
    """Probability of ``prop`` in ``state`` as the model derives it."""
    return model.q_probability(state, prop)


@dataclass(frozen=True, eq=False)
class PropertyPreorder:
    """The pointwise order of probability columns, with its quotient."""

    properties: tuple[str, ...]
    relation: Mapping[tuple[str, str], bool]
    classes: tuple[tuple[str, ...], ...]

    def leq(self, a: str, b: str) -> bool:
        return self.relation[(a, b)]

    def equivalent(self, a: str, b: str) -> bool:
        return self.relation[(a, b)] and self.relation[(b, a)]

    def class_of(self, prop: str) -> tuple[str, ...]:
        for cls in self.classes:
            if prop in cls:
                return cls
        raise UnknownIdError(f"unknown property {prop!r}")

    def representatives(self) -> tuple[str, ...]:
        return tuple(cls[0] for cls in self.classes)

    def quotient_leq(self, rep_a: str, rep_b: str) -> bool:
        return self.relation[(rep_a, rep_b)]


def build_preorder(model) -> PropertyPreorder:
    """Order properties by pointwise comparison of their probability columns.

    Comparisons allow the model's tolerance of slack; the slack must stay
    below the smallest genuine gap for the result to be transitive.
    """
    family = StateProbabilityFamily.from_model(model)
    tol = model.tolerance
    props = family.properties
    relation = {}
    for a in props:
        col_a = family.column(a)
        for b in props:
            col_b = family.column(b)
            relation[(a, b)] = all(x <= y + tol for x, y in zip(col_a, col_b))
    classes: list[tuple[str, ...]] = []
    assigned: set[str] = set()
    for a in props:
        if a in assigned:
            continue
        cls = tuple(sorted(b for b in props if relation[(a, b)] and relation[(b, a)]))
        assigned.update(cls)
        classes.append(cls)
    classes.sort(key=lambda c: c[0])
    return PropertyPreorder(props, relation, tuple(classes))


class OrthoLattice:
    """Finite bounded lattice with orthocomplement, given by total tables."""

    def __init__(
        self,
        elements: Iterable[str],
        meet: Mapping,
        join: Mapping,
        ortho: Mapping[str, str],
        bottom: str,
        top: str,
        order: Mapping | None = None,
    ):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise InvalidModelError("lattice elements must be distinct")
        universe = set(self.elements)
        self.meet = self._normalize_binary(meet, universe, "meet")
        self.join = self._normalize_binary(join, universe, "join")
        self.ortho = dict(ortho)
        if set(self.ortho) != universe or not set(self.ortho.values()) <= universe:
            raise InvalidModelError("orthocomplement table must be total over the elements")
        for name in (bottom, top):
            if name not in universe:
                raise InvalidModelError(f"bound {name!r} is not a lattice element")
        self.bottom = bottom
        self.top = top
        if order is None:
            # a <= b exactly when meeting with b leaves a unchanged
            self._order = {
                (a, b): self.meet[(a, b)] == a for a in self.elements for b in self.elements
            }
        else:
            self._order = self._normalize_order(order, universe)

    @staticmethod
    def _normalize_binary(table: Mapping, universe: set[str], name: str) -> dict:
        flat: dict[tuple[str, str], str] = {}
        for key, value in table.items():
            if isinstance(value, Mapping):
                for inner, res in value.items():
                    flat[(key, inner)] = res
            else:
                flat[tuple(key)] = value
        expected = {(a, b) for a in universe for b in universe}
        if set(flat) != expected:
            raise InvalidModelError(f"{name} table must be total over element pairs")
        if not set(flat.values()) <= universe:
            raise InvalidModelError(f"{name} table maps outside the elements")
        return flat

    @staticmethod
    def _normalize_order(order: Mapping, universe: set[str]) -> dict:
        flat: dict[tuple[str, str], bool] = {}
        for key, value in order.items():
            if isinstance(value, Mapping):
                for inner, res in value.items():
                    flat[(key, inner)] = bool(res)
            else:
                flat[tuple(key)] = bool(value)
        expected = {(a, b) for a in universe for b in universe}
        if set(flat) != expected:
            raise InvalidModelError("order table must be total over element pairs")
        return flat

    def leq(self, a: str, b: str) -> bool:
        return self._order[(a, b)]

    def meet_of(self, a: str, b: str) -> str:
        return self.meet[(a, b)]

    def join_of(self, a: str, b: str) -> str:
        return self.join[(a, b)]

    def ortho_of(self, a: str) -> str:
        return self.ortho[a]

    def orthogonal(self, a: str, b: str) -> bool:
        """a is below b's orthocomplement."""
        return self.leq(a, self.ortho[b])

    def join_all(self, elems: Iterable[str]) -> str:
        result = self.bottom
        for e in elems:
            result = self.join[(result, e)]
        return result


def check_ortholattice(lattice: OrthoLattice) -> Report:
    """Verify order/bound/meet/join/ortho axioms; report distributivity
    and orthomodularity as informational statuses."""
    report = Report("ortholattice")
    elems = lattice.elements
    leq = lattice.leq

    witness = None
    for a in elems:
        if not leq(a, a):
            witness = (a,)
            break
    if witness is None:
        for a in elems:
            for b in elems:
                if a != b and leq(a, b) and leq(b, a):
                    witness = (a, b)
                    break
            if witness:
                break
    if witness is None:
        for a in elems:
            for b in elems:
                if not leq(a, b):
                    continue
                for c in elems:
                    if leq(b, c) and not leq(a, c):
                        witness = (a, b, c)
                        break
                if witness:
                    break
            if witness:
                break
    if witness is None:
        report.add("order", PASS, "reflexive, antisymmetric, transitive")
    else:
        report.add("order", FAIL, "partial-order axiom violated", witness=list(witness))

    bad_bounds = [a for a in elems if not (leq(lattice.bottom, a) and leq(a, lattice.top))]
    if not bad_bounds:
        report.add("bounds", PASS, f"bottom={lattice.bottom!r}, top={lattice.top!r}")
    else:
        report.add("bounds", FAIL, "element escapes the bounds", witness=bad_bounds[0])

    def glb_ok(a, b):
        m = lattice.meet_of(a, b)
        if not (leq(m, a) and leq(m, b)):
            return False
        return all(leq(c, m) for c in elems if leq(c, a) and leq(c, b))

    def lub_ok(a, b):
        j = lattice.join_of(a, b)
        if not (leq(a, j) and leq(b, j)):
            return False
        return all(leq(j, c) for c in elems if leq(a, c) and leq(b, c))

    for name, ok in (("meet", glb_ok), ("join", lub_ok)):
        bad = next(((a, b) for a in elems for b in elems if not ok(a, b)), None)
        if bad is None:
            report.add(name, PASS, "greatest lower / least upper bounds" if name == "meet" else "")
        else:
            report.add(name, FAIL, f"{name} table entry is not the {name}", witness=list(bad))

    bad = next((a for a in elems if lattice.ortho_of(lattice.ortho_of(a)) != a), None)
    if bad is None:
        report.add("ortho-involution", PASS)
    else:
        report.add(
            "ortho-involution",
            FAIL,
            f"{bad!r} maps to {lattice.ortho_of(lattice.ortho_of(bad))!r} under double complement",
            witness=bad,
        )

    bad = next(
        (
            (a, b)
            for a in elems
            for b in elems
            if leq(a, b) and not leq(lattice.ortho_of(b), lattice.ortho_of(a))
        ),
        None,
    )
    if bad is None:
        report.add("ortho-antitone", PASS)
    else:
        report.add("ortho-antitone", FAIL, "complement does not reverse the order", witness=list(bad))

    bad = next(
        (
            a
            for a in elems
            if lattice.meet_of(a, lattice.ortho_of(a)) != lattice.bottom
            or lattice.join_of(a, lattice.ortho_of(a)) != lattice.top
        ),
        None,
    )
    if bad is None:
        report.add("ortho-complement", PASS)
    else:
        report.add("ortho-complement", FAIL, "complement laws fail", witness=bad)

    dist_witness = next(
        (
            (a, b, c)
            for a in elems
            for b in elems
            for c in elems
            if lattice.meet_of(a, lattice.join_of(b, c))
            != lattice.join_of(lattice.meet_of(a, b), lattice.meet_of(a, c))
        ),
        None,
    )
    if dist_witness is None:
        report.add("distributive", INFO, "yes (Boolean when the checks above pass)")
    else:
        report.add("distributive", INFO, "no", witness=list(dist_witness))

    om_witness = next(
        (
            (a, b)
            for a in elems
            for b in elems
            if leq(a, b)
            and lattice.join_of(a, lattice.meet_of(b, lattice.ortho_of(a))) != b
        ),
        None,
    )
    if om_witness is None:
        report.add("orthomodular", INFO, "yes")
    else:
        report.add("orthomodular", INFO, "no", witness=list(om_witness))
    return report


def _maximal_cliques(elems: tuple[str, ...], adjacent) -> list[tuple[str, ...]]:
    """Maximal pairwise-adjacent families, deterministically ordered."""
    cliques: list[tuple[str, ...]] = []

    def extend(clique: list[str], candidates: list[str]) -> None:
        grown = False
        for i, v in enumerate(candidates):
            nxt = [u for u in candidates[i + 1 :] if adjacent(u, v)]
            extend(clique + [v], nxt)
            grown = True
        if not grown and len(clique) >= 2:
            if all(adjacent(a, b) for a, b in combinations(clique, 2)):
                key = tuple(clique)
                if not any(set(key) <= set(c) for c in cliques):
                    cliques.append(key)

    extend([], list(elems))
    # drop non-maximal leftovers from branch ordering
    maximal = [c for c in cliques if not any(set(c) < set(d) for d in cliques if d != c)]
    return sorted(set(maximal))


def check_gpm(values: Mapping[str, object], lattice: OrthoLattice, tolerance=COMPARISON_EPS) -> Report:
    """Verify a generalized probability measure: unit top value, and
    additivity over every orthogonal pair and maximal orthogonal family."""
    report = Report("gpm")
    missing = [e for e in lattice.elements if e not in values]
    if missing:
        report.add("domain", FAIL, f"no value for elements {missing}", witness=missing)
        return report

    top_val = values[lattice.top]
    if abs(top_val - 1) <= tolerance:
        report.add("unit", PASS, f"value at top = {top_val}", tolerance=tolerance)
    else:
        report.add(
            "unit", FAIL, f"value at top = {top_val}", gap=abs(top_val - 1), tolerance=tolerance
        )

    families: list[tuple[str, ...]] = [
        (a, b)
        for a, b in combinations(lattice.elements, 2)
        if lattice.orthogonal(a, b)
    ]
    families += [c for c in _maximal_cliques(lattice.elements, lattice.orthogonal) if len(c) > 2]

    failures = 0
    checked = 0
    for family in families:
        checked += 1
        joined = lattice.join_all(family)
        lhs = values[joined]
        rhs = sum(values[e] for e in family)
        gap = abs(lhs - rhs)
        if gap > tolerance:
            failures += 1
            report.add(
                f"additivity {','.join(family)}",
                FAIL,
                f"join {joined!r} has value {lhs}, members sum to {rhs}",
                witness=list(family),
                gap=gap,
                tolerance=tolerance,
            )
    if failures == 0:
        report.add(
            "additivity", PASS, f"{checked} orthogonal families", tolerance=tolerance
        )
    return report


def classical_conditioning_failure(model, state: str, e1: str, e2: str, f: str):
    """Both sides of the meet-based conditioning identity for e1 ⊥ e2.

    Returns ``(lhs, rhs)`` with lhs = P((e1 ⋓ e2) ⋒ f | f-normalized) and
    rhs the sum of the two meet-conditioned terms; they differ exactly on
    non-distributive fixtures.
    """
    lattice = model.lattice
    if lattice is None:
        raise InvalidModelError("model has no lattice tables")
    for elem in (e1, e2, f):
        if elem not in lattice.elements:
            raise UnknownIdError(f"{elem!r} is not a lattice element")
    if not lattice.orthogonal(e1, e2):
        raise InvalidModelError(f"{e1!r} and {e2!r} are not orthogonal")
    p_f = model.q_probability(state, f)
    if p_f <= model.tolerance:
        raise ConditionNullError(f"property {f!r} has probability 0 in state {state!r}")
    joined = lattice.join_of(e1, e2)
    lhs = model.q_probability(state, lattice.meet_of(joined, f)) / p_f
    rhs = (
        model.q_probability(state, lattice.meet_of(e1, f)) / p_f
        + model.q_probability(state, lattice.meet_of(e2, f)) / p_f
    )
    return lhs, rhs


@dataclass(frozen=True, eq=False)
class FirstKindTransform:
    """State transform of a repeatable measurement of one property.

    ``mapping`` sends every state with non-zero probability of the
    property to a state in which the property holds with probability 1.
    """

    property: str
    mapping: Mapping[str, str]

    def __init__(self, property: str, mapping: Mapping[str, str]):
        object.__setattr__(self, "property", property)
        object.__setattr__(self, "mapping", dict(mapping))

    def validate(self, model, tolerance=None) -> None:
        tol = model.tolerance if tolerance is None else tolerance
        for state in model.state_ids:
            if model.q_probability(state, self.property) <= tol:
                continue
            target = self.mapping.get(state)
            if target is None:
                raise InvalidModelError(
                    f"transform for {self.property!r} is undefined on state {state!r}"
                )
            value = model.q_probability(target, self.property)
            if abs(value - 1) > tol:
                raise InvalidModelError(
                    f"transform for {self.property!r} sends {state!r} to {target!r} "
                    f"where the property has probability {value}, not 1"
                )


def conditional_q_probability(model, state: str, target: str, condition: str):
    """Sequential conditioning: probability of ``target`` after the
    registered first-kind measurement of ``condition`` updates the state.

    Touches only the transform and the probability table; no lattice
    operation is involved.
    """
    transform = model.first_kind.get(condition)
    if transform is None:
        raise NoFirstKindError(f"no first-kind transform registered for {condition!r}")
    p_cond = model.q_probability(state, condition)
    if p_cond <= model.tolerance:
        raise StateExcludedError(
            f"state {state!r} gives {condition!r} probability 0; sequential "
            "conditioning is undefined"
        )
    mapped = transform.mapping.get(state)
    if mapped is None:
        raise InvalidModelError(
            f"transform for {condition!r} is undefined on state {state!r}"
        )
    return model.q_probability(mapped, target)
