"""Non-contextual backend: states fully determine which properties hold.

Contexts are inert here, every property set is measured by a single
procedure, and the collapse suite verifies that the general machinery
reduces to the textbook notions on such models.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import InvalidModelError
from .language import Entity, PropertyAtom, StateAtom, TruthAssignment
from .lattice import (
    FirstKindTransform,
    OrthoLattice,
    build_preorder,
    check_gpm,
    check_ortholattice,
    conditional_q_probability,
)
from .measurement import MeasurementCatalog, MeasurementProcedure
from .model import ContextualModel
from .probability import ProbabilitySpace, event_probability
from .report import FAIL, PASS, SKIP, Report

__all__ = ["build_classical_model", "verify_classical_collapse"]

PossessionMap = Mapping[str, frozenset[str]]


def build_classical_model(
    entity: Entity,
    possession: Mapping,
    state_weights: Mapping,
    *,
    procedure_id: str = "all",
    context: str | None = None,
) -> ContextualModel:
    """Model where each state's assignment is its possession set, repeated
    identically in every context.

    One procedure measures all properties over a single context; the
    first-kind transform of every property is the identity on the states
    possessing it.  Weights must be positive; possession sets distinct.
    """
    possession = {s: frozenset(ps) for s, ps in possession.items()}
    if set(possession) != entity.states:
        raise InvalidModelError("possession map must cover exactly the declared states")
    for state, props in possession.items():
        if not props <= entity.properties:
            raise InvalidModelError(
                f"state {state!r} possesses undeclared properties {sorted(props - entity.properties)}"
            )
    states = sorted(entity.states)
    seen = {}
    for state in states:
        key = possession[state]
        if key in seen:
            raise InvalidModelError(
                f"duplicate possession sets for states {seen[key]!r} and {state!r}"
            )
        seen[key] = state
    if set(state_weights) != entity.states:
        raise InvalidModelError("state weights must cover exactly the declared states")
    for state in states:
        if state_weights[state] <= 0:
            raise InvalidModelError(f"state {state!r} has non-positive weight")
    mass = sum(state_weights.values())
    exact = all(isinstance(w, (Fraction, int)) for w in state_weights.values())
    if (exact and mass != 1) or (not exact and abs(mass - 1) > 1e-9):
        raise InvalidModelError(f"state weights sum to {mass}")

    if context is None:
        context = sorted(entity.contexts)[0]
    elif context not in entity.contexts:
        raise InvalidModelError(f"context {context!r} is not declared")

    assignments = []
    for state in states:
        atoms = [StateAtom(state)]
        for prop in sorted(possession[state]):
            for ctx in sorted(entity.contexts):
                atoms.append(PropertyAtom(prop, ctx))
        assignments.append(TruthAssignment(entity, atoms))
    space = ProbabilitySpace(assignments, [state_weights[s] for s in states])

    procedure = MeasurementProcedure(
        procedure_id, sorted(entity.properties), [context], {context: Fraction(1)}
    )
    catalog = MeasurementCatalog(entity, [procedure])

    first_kind = {
        prop: FirstKindTransform(prop, {s: s for s in states if prop in possession[s]})
        for prop in sorted(entity.properties)
    }
    return ContextualModel(
        entity,
        space,
        catalog,
        first_kind=first_kind,
        kind="classical",
        possession=possession,
    )


def _pattern(model: ContextualModel, prop: str) -> tuple[bool, ...]:
    return tuple(model.q_probability(s, prop) > 0.5 for s in model.state_ids)


def _boolean_tables(patterns: Mapping[str, tuple[bool, ...]]):
    """Lattice tables over pattern representatives, if the patterns are
    closed under pointwise meet and complement; None otherwise."""
    by_pattern: dict[tuple[bool, ...], str] = {}
    for name in sorted(patterns):
        by_pattern.setdefault(patterns[name], name)
    reps = {rep: pat for pat, rep in by_pattern.items()}

    def rep_for(pattern):
        return by_pattern.get(tuple(pattern))

    meet, join, ortho = {}, {}, {}
    for a, pa in reps.items():
        comp = rep_for(not x for x in pa)
        if comp is None:
            return None
        ortho[a] = comp
        for b, pb in reps.items():
            m = rep_for(x and y for x, y in zip(pa, pb))
            j = rep_for(x or y for x, y in zip(pa, pb))
            if m is None or j is None:
                return None
            meet[(a, b)] = m
            join[(a, b)] = j
    n = len(next(iter(reps.values())))
    bottom = rep_for([False] * n)
    top = rep_for([True] * n)
    if bottom is None or top is None:
        return None
    return OrthoLattice(sorted(reps), meet, join, ortho, bottom, top)


def verify_classical_collapse(model: ContextualModel) -> Report:
    """The non-contextual collapse suite:

    (a) atom extensions ignore the context index;
    (b) each state proposition has a singleton extension;
    (c) the probability table is two-valued;
    (d) the property preorder is extension inclusion and a partial order;
    (e) when the pattern quotient is Boolean, each state's table is a
        classical measure on it;
    (f) sequential conditioning equals the plain table value, and equals
        meet-based conditioning wherever the conjunction class exists.
    """
    report = Report("classical-collapse")
    entity = model.entity
    space = model.space
    states = model.state_ids
    props = model.property_ids
    contexts = sorted(entity.contexts)

    if model.possession is not None:
        mismatch = None
        for w in space.universe:
            state = w.state
            expected = model.possession.get(state, frozenset())
            for prop in props:
                for ctx in contexts:
                    if w.value(PropertyAtom(prop, ctx)) != (prop in expected):
                        mismatch = (state, prop, ctx)
                        break
                if mismatch:
                    break
            if mismatch:
                break
        if mismatch is None:
            report.add("possession", PASS, "universe matches the possession map")
        else:
            report.add("possession", FAIL, "assignment disagrees with possession", witness=list(mismatch))

    # (a) context invariance
    witness = None
    for prop in props:
        base = space.extension_of(PropertyAtom(prop, contexts[0]))
        for ctx in contexts[1:]:
            if space.extension_of(PropertyAtom(prop, ctx)) != base:
                witness = (prop, contexts[0], ctx)
                break
        if witness:
            break
    if witness is None:
        report.add("context-invariance", PASS, f"{len(props)} properties x {len(contexts)} contexts")
    else:
        report.add("context-invariance", FAIL, "extension depends on the context", witness=list(witness))

    # (b) singleton state extensions
    bad = None
    for state in states:
        ext = space.extension_of(StateAtom(state))
        if len(ext) != 1:
            bad = (state, len(ext))
            break
    if bad is None:
        report.add("state-extensions", PASS, "each state proposition has one model")
    else:
        report.add("state-extensions", FAIL, f"state {bad[0]!r} has {bad[1]} models", witness=bad[0])

    # (c) two-valued table
    bad = None
    for state in states:
        for prop in props:
            v = model.q_probability(state, prop)
            if min(abs(v), abs(v - 1)) > model.tolerance:
                bad = (state, prop, v)
                break
        if bad:
            break
    if bad is None:
        report.add("two-valued", PASS, "all table entries in {0, 1}")
    else:
        report.add(
            "two-valued", FAIL, f"P[{bad[0]}, {bad[1]}] = {bad[2]}", witness=[bad[0], bad[1]]
        )

    # (d) preorder = extension inclusion, and a partial order
    preorder = build_preorder(model)
    c0 = contexts[0]
    bad = None
    for a in props:
        ext_a = space.extension_of(PropertyAtom(a, c0))
        for b in props:
            ext_b = space.extension_of(PropertyAtom(b, c0))
            if preorder.leq(a, b) != (ext_a <= ext_b):
                bad = ("inclusion", a, b)
                break
            if a != b and preorder.leq(a, b) and preorder.leq(b, a):
                bad = ("antisymmetry", a, b)
                break
        if bad:
            break
    if bad is None:
        report.add("preorder", PASS, "matches extension inclusion; partial order")
    else:
        report.add("preorder", FAIL, f"{bad[0]} fails", witness=[bad[1], bad[2]])

    # (e) Boolean quotient carries classical measures
    patterns = {prop: _pattern(model, prop) for prop in props}
    lattice = _boolean_tables(patterns)
    if lattice is None:
        report.add(
            "boolean-quotient",
            SKIP,
            "patterns not closed under meet/complement; quotient is not Boolean",
        )
    else:
        ortho_report = check_ortholattice(lattice)
        distributive = any(
            e.name == "distributive" and e.detail.startswith("yes") for e in ortho_report.entries
        )
        ok = ortho_report.passed and distributive
        for state in states:
            values = {rep: model.q_probability(state, rep) for rep in lattice.elements}
            if not check_gpm(values, lattice, model.tolerance).passed:
                ok = False
                report.add(
                    "boolean-quotient", FAIL, f"state {state!r} fails the measure axioms",
                    witness=state,
                )
                break
        else:
            if ok:
                report.add(
                    "boolean-quotient",
                    PASS,
                    f"Boolean quotient with {len(lattice.elements)} classes; "
                    "all state tables are classical measures",
                )
            else:
                report.add("boolean-quotient", FAIL, "derived tables fail the lattice axioms")

    # (f) sequential = plain = meet-conditioned, where defined
    pattern_to_prop: dict[tuple[bool, ...], str] = {}
    for name in sorted(patterns):
        pattern_to_prop.setdefault(patterns[name], name)
    checked = skipped = 0
    bad = None
    for state in states:
        for cond in props:
            if model.q_probability(state, cond) <= model.tolerance:
                continue
            if cond not in model.first_kind:
                skipped += 1
                continue
            for target in props:
                seq = conditional_q_probability(model, state, target, cond)
                plain = model.q_probability(state, target)
                if abs(seq - plain) > model.tolerance:
                    bad = ("sequential", state, target, cond)
                    break
                conj = pattern_to_prop.get(
                    tuple(x and y for x, y in zip(patterns[target], patterns[cond]))
                )
                if conj is None:
                    skipped += 1
                    continue
                classical = model.q_probability(state, conj) / model.q_probability(state, cond)
                if abs(classical - plain) > model.tolerance:
                    bad = ("meet-conditioning", state, target, cond)
                    break
                checked += 1
            if bad:
                break
        if bad:
            break
    if bad is None:
        report.add(
            "conditioning",
            PASS,
            f"{checked} triples agree; {skipped} lack a conjunction class (skipped)",
        )
    else:
        report.add("conditioning", FAIL, f"{bad[0]} mismatch", witness=list(bad[1:]))
    return report
