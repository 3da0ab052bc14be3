"""The full contextual model: entity, weighted universe, procedures, extras."""

from __future__ import annotations

from typing import Mapping

from .errors import InvalidModelError, UnknownIdError
from .language import Entity, PropertyAtom, StateAtom
from .lattice import FirstKindTransform, OrthoLattice, StateProbabilityFamily
from .measurement import MeasurementCatalog, mean_conditional
from .probability import ProbabilitySpace, event_probability
from .report import FAIL, PASS, Report
from .tolerances import COMPARISON_EPS

__all__ = ["ContextualModel", "verify_structure"]


class ContextualModel:
    """Entity + probability space + measurement catalog, plus optional
    lattice tables, first-kind transforms and backend annotations.

    Immutable by convention; derived probabilities are cached.  With
    ``validate=True`` the class-membership conditions are enforced at
    construction (every state proposition has positive mass, transforms
    are well-formed); the model-file loader disables that so violations
    surface in check reports instead.
    """

    kind: str

    def __init__(
        self,
        entity: Entity,
        space: ProbabilitySpace,
        catalog: MeasurementCatalog,
        *,
        lattice: OrthoLattice | None = None,
        first_kind: Mapping[str, FirstKindTransform] | None = None,
        kind: str = "generic",
        possession: Mapping[str, frozenset[str]] | None = None,
        quantum=None,
        tolerance=COMPARISON_EPS,
        validate: bool = True,
    ):
        if catalog.entity != entity:
            raise InvalidModelError("catalog was built for a different entity")
        for w in space.universe:
            if w.entity != entity:
                raise InvalidModelError("universe assignment declared over a different entity")
        self.entity = entity
        self.space = space
        self.catalog = catalog
        self.lattice = lattice
        self.first_kind = dict(first_kind or {})
        self.kind = kind
        self.possession = (
            None if possession is None else {s: frozenset(ps) for s, ps in possession.items()}
        )
        self.quantum = quantum
        self.tolerance = tolerance
        self.state_ids = tuple(sorted(entity.states))
        self.property_ids = tuple(sorted(entity.properties))
        self._q_cache: dict[tuple[str, str], object] = {}
        if validate:
            for state in self.state_ids:
                mass = event_probability(space, space.extension_of(StateAtom(state)))
                if mass <= 0:
                    raise InvalidModelError(
                        f"state {state!r} has zero probability; useless states are not allowed"
                    )
            for prop, transform in self.first_kind.items():
                if prop not in entity.properties:
                    raise UnknownIdError(f"transform registered for unknown property {prop!r}")
                transform.validate(self)

    def q_probability(self, state: str, prop: str):
        """Mean probability of the property given the state, through the
        canonical witness: smallest covering procedure id, smallest context."""
        key = (state, prop)
        cached = self._q_cache.get(key)
        if cached is not None:
            return cached
        if state not in self.entity.states:
            raise UnknownIdError(f"unknown state {state!r}")
        procs = self.catalog.procedures_for([prop])
        if not procs:
            raise UnknownIdError(f"no procedure measures {prop!r}")
        procedure = procs[0]
        context = sorted(procedure.contexts)[0]
        value = mean_conditional(
            self, PropertyAtom(prop, context), StateAtom(state), procedure
        )
        self._q_cache[key] = value
        return value

    def probability_table(self) -> StateProbabilityFamily:
        return StateProbabilityFamily.from_model(self)


def verify_structure(model: ContextualModel) -> Report:
    """Report-level version of the construction invariants: procedure
    weight normalization, property coverage, and no zero-mass states."""
    report = Report("structure")
    for procedure in model.catalog.sorted_procedures():
        mass = sum(procedure.context_weights.values())
        tol = 0 if procedure.exact else model.space.mass_tolerance or COMPARISON_EPS
        negative = [c for c, w in sorted(procedure.context_weights.items()) if w < 0]
        if negative:
            report.add(
                f"procedure-weights {procedure.id}",
                FAIL,
                f"negative weight at context {negative[0]!r}",
                witness=negative[0],
            )
        elif abs(mass - 1) > tol:
            report.add(
                f"procedure-weights {procedure.id}",
                FAIL,
                f"context weights sum to {mass}",
                gap=abs(mass - 1),
                tolerance=tol,
            )
        else:
            report.add(f"procedure-weights {procedure.id}", PASS, f"mass={mass}")
    uncovered = [p for p, pids in model.catalog.by_property.items() if not pids]
    if uncovered:
        report.add(
            "property-coverage",
            FAIL,
            f"properties without a procedure: {uncovered}",
            witness=uncovered,
        )
    else:
        report.add("property-coverage", PASS, f"{len(model.property_ids)} properties covered")
    for state in model.state_ids:
        mass = event_probability(model.space, model.space.extension_of(StateAtom(state)))
        if mass <= 0:
            report.add(f"state-mass {state}", FAIL, "state proposition has zero mass")
        else:
            report.add(f"state-mass {state}", PASS, f"mass={mass}")
    for prop in sorted(model.first_kind):
        transform = model.first_kind[prop]
        try:
            transform.validate(model)
        except InvalidModelError as err:
            report.add(f"first-kind {prop}", FAIL, str(err))
        else:
            report.add(f"first-kind {prop}", PASS, f"{len(transform.mapping)} states mapped")
    return report
