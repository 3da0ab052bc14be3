"""Measurement procedures over micro-contexts and mean conditional probability.

A procedure carries the set of properties it measures, the micro-contexts
it can realize, and a weight per context.  Averaging the plain conditional
probabilities over those contexts yields the mean conditional probability;
the dispatch distinguishes four shapes of (target, condition) pairs:

* ``joint``      - both are property formulas, jointly testable;
* ``target``     - the target is a property formula, the condition a
                   state formula;
* ``condition``  - the reverse;
* ``state-only`` - both are state formulas; no averaging happens and the
                   result is procedure-independent by construction.

A model is *procedure independent* when, for every eligible pair, all
procedures measuring the involved properties define the same mean.  That
is what :func:`verify_procedure_independence` checks, by bounded
enumeration of formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    CaseMismatchError,
    ConditionNullError,
    InvalidModelError,
    UnknownIdError,
)
from .language import (
    And,
    Entity,
    Not,
    Or,
    Proposition,
    StateAtom,
    contexts_of,
    enumerate_formulas,
    entity_atoms,
    format_proposition,
    has_state_atoms,
    properties_of,
    substitute_context,
)
from .probability import conditional_probability
from .report import FAIL, PASS, Report
from .tolerances import MASS_EPS

if TYPE_CHECKING:  # pragma: no cover
    from .model import ContextualModel

__all__ = [
    "MeasurementProcedure",
    "MeasurementCatalog",
    "TestabilityWitness",
    "compatible",
    "testable",
    "mean_conditional",
    "mean_probability",
    "conditioning_case",
    "verify_procedure_independence",
]

CASE_JOINT = "joint"
CASE_TARGET = "target"
CASE_CONDITION = "condition"
CASE_STATE_ONLY = "state-only"


@dataclass(frozen=True, eq=False)
class MeasurementProcedure:
    """A named procedure: measured properties, realizable contexts, weights."""

    id: str
    measures: frozenset[str]
    contexts: frozenset[str]
    context_weights: Mapping[str, object]

    def __init__(
        self,
        id: str,
        measures: Iterable[str],
        contexts: Iterable[str],
        context_weights: Mapping[str, object],
        *,
        validate: bool = True,
    ):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "measures", frozenset(measures))
        object.__setattr__(self, "contexts", frozenset(contexts))
        object.__setattr__(self, "context_weights", dict(context_weights))
        if not self.measures:
            raise InvalidModelError(f"procedure {id!r} measures no property")
        if not self.contexts:
            raise InvalidModelError(f"procedure {id!r} has no contexts")
        if set(self.context_weights) != self.contexts:
            raise InvalidModelError(
                f"procedure {id!r}: context weights must cover exactly its contexts"
            )
        if validate:
            if any(w < 0 for w in self.context_weights.values()):
                raise InvalidModelError(f"procedure {id!r} has a negative context weight")
            mass = sum(self.context_weights.values())
            tol = 0 if self.exact else MASS_EPS
            if abs(mass - 1) > tol:
                raise InvalidModelError(f"procedure {id!r}: context weights sum to {mass}")

    @property
    def exact(self) -> bool:
        return all(isinstance(w, (Fraction, int)) for w in self.context_weights.values())

    def weight(self, context: str):
        return self.context_weights[context]


class MeasurementCatalog:
    """The procedures of an entity, indexed by measured property.

    Referential integrity against the entity is always enforced;
    ``validate=True`` additionally requires every property to be covered
    by at least one procedure.
    """

    def __init__(
        self,
        entity: Entity,
        procedures: Iterable[MeasurementProcedure],
        *,
        validate: bool = True,
    ):
        self.entity = entity
        self.procedures: dict[str, MeasurementProcedure] = {}
        for proc in procedures:
            if proc.id in self.procedures:
                raise InvalidModelError(f"duplicate procedure id {proc.id!r}")
            if not proc.measures <= entity.properties:
                raise InvalidModelError(
                    f"procedure {proc.id!r} measures undeclared properties "
                    f"{sorted(proc.measures - entity.properties)}"
                )
            if not proc.contexts <= entity.contexts:
                raise InvalidModelError(
                    f"procedure {proc.id!r} uses undeclared contexts "
                    f"{sorted(proc.contexts - entity.contexts)}"
                )
            self.procedures[proc.id] = proc
        self.by_property: dict[str, tuple[str, ...]] = {
            prop: tuple(
                pid for pid in sorted(self.procedures) if prop in self.procedures[pid].measures
            )
            for prop in sorted(entity.properties)
        }
        if validate:
            uncovered = [p for p, pids in self.by_property.items() if not pids]
            if uncovered:
                raise InvalidModelError(f"properties without any procedure: {uncovered}")

    def get(self, procedure_id: str) -> MeasurementProcedure:
        try:
            return self.procedures[procedure_id]
        except KeyError:
            raise UnknownIdError(f"unknown procedure {procedure_id!r}") from None

    def sorted_procedures(self) -> list[MeasurementProcedure]:
        return [self.procedures[pid] for pid in sorted(self.procedures)]

    def procedures_for(self, props: Iterable[str]) -> list[MeasurementProcedure]:
        """Procedures measuring all of ``props``, sorted by id."""
        wanted = frozenset(props)
        unknown = wanted - self.entity.properties
        if unknown:
            raise UnknownIdError(f"unknown properties {sorted(unknown)}")
        return [p for p in self.sorted_procedures() if wanted <= p.measures]


@dataclass(frozen=True, eq=False)
class TestabilityWitness:
    """A procedure and one of its contexts realizing a testable formula."""

    procedure: MeasurementProcedure
    context: str


def compatible(catalog: MeasurementCatalog, props: Iterable[str]) -> bool:
    """True when one procedure measures every property in ``props``."""
    wanted = frozenset(props)
    if not wanted:
        raise ValueError("compatibility is defined for non-empty property sets")
    return bool(catalog.procedures_for(wanted))


def _uniform_context(prop: Proposition) -> str | None:
    ctxs = contexts_of(prop)
    if len(ctxs) == 1:
        (ctx,) = ctxs
        return ctx
    return None


def testable(catalog: MeasurementCatalog, prop: Proposition) -> TestabilityWitness | None:
    """Witness that ``prop`` can be tested, or ``None``.

    Requires: no state atoms and at least one property atom; all atoms
    share one context index; some procedure measures all the properties
    and realizes that context.  Ties break to the smallest procedure id.
    """
    if has_state_atoms(prop):
        return None
    props = properties_of(prop)
    if not props:
        return None
    ctx = _uniform_context(prop)
    if ctx is None:
        return None
    candidates = [p for p in catalog.procedures_for(props) if ctx in p.contexts]
    if not candidates:
        return None
    return TestabilityWitness(candidates[0], ctx)


def _classify(
    catalog: MeasurementCatalog,
    target: Proposition,
    condition: Proposition,
    procedure: MeasurementProcedure | None,
) -> str:
    """Dispatch a (target, condition) pair for the given procedure."""
    t_props = properties_of(target)
    c_props = properties_of(condition)
    t_state_free = not has_state_atoms(target)
    c_state_free = not has_state_atoms(condition)

    if t_props and not t_state_free:
        raise CaseMismatchError("the target mixes state and property atoms")
    if c_props and not c_state_free:
        raise CaseMismatchError("the condition mixes state and property atoms")

    if not t_props and not c_props:
        return CASE_STATE_ONLY

    if procedure is None:
        raise CaseMismatchError("a procedure is required when property atoms occur")
    if not (t_props | c_props) <= procedure.measures:
        raise CaseMismatchError(
            f"procedure {procedure.id!r} does not measure all of "
            f"{sorted(t_props | c_props)}"
        )

    if t_props and c_props:
        t_ctx = _uniform_context(target)
        c_ctx = _uniform_context(condition)
        if t_ctx is None or c_ctx is None or t_ctx != c_ctx:
            raise CaseMismatchError("target and condition are not jointly testable")
        if t_ctx not in procedure.contexts:
            raise CaseMismatchError(
                f"context {t_ctx!r} is not realizable by procedure {procedure.id!r}"
            )
        return CASE_JOINT
    if t_props:
        t_ctx = _uniform_context(target)
        if t_ctx is None:
            raise CaseMismatchError("the target mixes context indices")
        if t_ctx not in procedure.contexts:
            raise CaseMismatchError(
                f"context {t_ctx!r} is not realizable by procedure {procedure.id!r}"
            )
        return CASE_TARGET
    c_ctx = _uniform_context(condition)
    if c_ctx is None:
        raise CaseMismatchError("the condition mixes context indices")
    if c_ctx not in procedure.contexts:
        raise CaseMismatchError(
            f"context {c_ctx!r} is not realizable by procedure {procedure.id!r}"
        )
    return CASE_CONDITION


def conditioning_case(
    model: "ContextualModel",
    target: Proposition,
    condition: Proposition,
    procedure: MeasurementProcedure | None = None,
) -> str:
    """The dispatch label the pair would take (raises CaseMismatchError otherwise)."""
    return _classify(model.catalog, target, condition, procedure)


def mean_conditional(
    model: "ContextualModel",
    target: Proposition,
    condition: Proposition,
    procedure: MeasurementProcedure | None = None,
):
    """Context-weighted average of conditional probabilities.

    Every substituted condition must have positive mass; the offending
    context is reported otherwise.  In the state-only case the value is
    the plain conditional probability, independent of the procedure.
    """
    case = _classify(model.catalog, target, condition, procedure)
    space = model.space
    if case == CASE_STATE_ONLY:
        return conditional_probability(space, target, condition)

    assert procedure is not None
    total = 0
    for ctx in sorted(procedure.contexts):
        t_sub = substitute_context(target, ctx) if case in (CASE_JOINT, CASE_TARGET) else target
        c_sub = (
            substitute_context(condition, ctx)
            if case in (CASE_JOINT, CASE_CONDITION)
            else condition
        )
        try:
            p = conditional_probability(space, t_sub, c_sub)
        except ConditionNullError as err:
            raise ConditionNullError(
                f"condition {format_proposition(c_sub)} has zero mass "
                f"in context {ctx!r}",
                context=ctx,
            ) from err
        total += procedure.weight(ctx) * p
    return total


def _state_tautology(entity: Entity) -> Proposition:
    first = sorted(entity.states)[0]
    return Or(StateAtom(first), Not(StateAtom(first)))


def mean_probability(
    model: "ContextualModel",
    target: Proposition,
    procedure: MeasurementProcedure | None = None,
):
    """Mean probability of ``target``: the mean conditional on a tautology."""
    return mean_conditional(model, target, _state_tautology(model.entity), procedure)


def _grouped_formulas(entity: Entity, depth: int):
    """Formulas to ``depth``, split into state-only and per-context groups.

    Pairs drawn from different context groups can never dispatch, so the
    verifier only combines formulas within a group (plus state-only ones).
    """
    state_only: list[Proposition] = []
    per_context: dict[str, list[Proposition]] = {c: [] for c in sorted(entity.contexts)}
    for formula in enumerate_formulas(entity_atoms(entity), depth):
        stateful = has_state_atoms(formula)
        props = properties_of(formula)
        if not props and stateful:
            state_only.append(formula)
            continue
        if props and not stateful:
            ctx = _uniform_context(formula)
            if ctx is not None:
                per_context[ctx].append(formula)
    return state_only, per_context


def verify_procedure_independence(model: "ContextualModel", depth: int) -> Report:
    """Check that competing procedures agree on every eligible mean.

    Enumerates formula pairs up to ``depth``; for each pair involving at
    least one property, every procedure covering the union of properties
    must (a) define the mean whenever any of them does and (b) produce
    the same value within the model's tolerance.  Violations are reported
    sorted by pair.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    report = Report("procedure-independence")
    catalog = model.catalog
    tol = model.tolerance
    state_only, per_context = _grouped_formulas(model.entity, depth)

    pairs_checked = 0
    comparisons = 0
    violations: list[tuple[str, ...]] = []
    for ctx in sorted(per_context):
        group = per_context[ctx]
        if not group:
            continue
        pool = group + state_only
        for target in pool:
            for condition in pool:
                union = properties_of(target) | properties_of(condition)
                if not union:
                    continue
                procs = catalog.procedures_for(union)
                if not procs:
                    continue
                outcomes = []
                for proc in procs:
                    try:
                        outcomes.append((proc.id, mean_conditional(model, target, condition, proc)))
                    except (CaseMismatchError, ConditionNullError) as err:
                        outcomes.append((proc.id, err))
                defined = [(pid, v) for pid, v in outcomes if not isinstance(v, Exception)]
                if not defined:
                    continue
                pairs_checked += 1
                pair_label = (format_proposition(target), format_proposition(condition))
                for pid, value in outcomes:
                    if isinstance(value, Exception):
                        violations.append(
                            ("undefined", *pair_label, defined[0][0], pid, str(value))
                        )
                base_id, base_value = defined[0]
                for pid, value in defined[1:]:
                    comparisons += 1
                    gap = abs(value - base_value)
                    if gap > tol:
                        violations.append(
                            ("gap", *pair_label, base_id, pid, gap)
                        )

    violations.sort(key=lambda v: tuple(str(x) for x in v))
    for violation in violations:
        kind, target_s, condition_s, pid_a, pid_b = violation[:5]
        name = f"pair {target_s} | {condition_s}"
        if kind == "gap":
            report.add(
                name,
                FAIL,
                f"procedures {pid_a!r} and {pid_b!r} disagree",
                witness=[pid_a, pid_b],
                gap=violation[5],
                tolerance=tol,
            )
        else:
            report.add(
                name,
                FAIL,
                f"mean defined for {pid_a!r} but not for {pid_b!r}: {violation[5]}",
                witness=[pid_a, pid_b],
            )
    report.add(
        "summary",
        PASS if not violations else FAIL,
        f"depth={depth}, eligible pairs={pairs_checked}, "
        f"procedure comparisons={comparisons}, violations={len(violations)}",
        tolerance=tol,
    )
    return report
