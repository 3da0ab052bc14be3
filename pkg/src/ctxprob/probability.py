"""Weighted finite universes of truth assignments and conditional probability.

A space pairs an ordered universe of assignments with non-negative weights
of total mass one (the event algebra is the full power set).  Weights may
be floats or exact ``Fraction``s; with Fractions every identity below is
exact and the verifier uses zero tolerance.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ConditionNullError, InvalidModelError
from .language import Proposition, TruthAssignment, extension
from .report import FAIL, PASS, Report
from .tolerances import MASS_EPS

__all__ = [
    "ProbabilitySpace",
    "event_probability",
    "conditional_probability",
    "absolute_probability",
    "verify_kolmogorov",
    "bayes_identity",
]


class ProbabilitySpace:
    """Ordered finite universe with a weight per assignment.

    ``validate=False`` admits non-normalized or negative weights so that
    Kolmogorov violations can be represented and reported by the verifier
    instead of rejected at construction.
    """

    def __init__(
        self,
        universe: Sequence[TruthAssignment],
        weights: Sequence,
        *,
        validate: bool = True,
    ):
        self._universe = tuple(universe)
        self._weights = tuple(weights)
        if len(self._universe) != len(self._weights):
            raise InvalidModelError("universe and weights must have equal length")
        if len(set(self._universe)) != len(self._universe):
            raise InvalidModelError("universe contains duplicate assignments")
        self._index = {w: i for i, w in enumerate(self._universe)}
        self._ext_cache: dict[Proposition, frozenset[TruthAssignment]] = {}
        if validate:
            if any(w < 0 for w in self._weights):
                raise InvalidModelError("weights must be non-negative")
            mass = sum(self._weights)
            if abs(mass - 1) > self.mass_tolerance:
                raise InvalidModelError(f"weights sum to {mass}, expected 1")

    @property
    def universe(self) -> tuple[TruthAssignment, ...]:
        return self._universe

    @property
    def weights(self) -> tuple:
        return self._weights

    @property
    def exact(self) -> bool:
        """True when every weight is an exact rational (or integer)."""
        return all(isinstance(w, (Fraction, int)) for w in self._weights)

    @property
    def mass_tolerance(self):
        return 0 if self.exact else MASS_EPS

    def weight(self, assignment: TruthAssignment):
        try:
            return self._weights[self._index[assignment]]
        except KeyError:
            raise ValueError("assignment is not in the universe") from None

    def extension_of(self, prop: Proposition) -> frozenset[TruthAssignment]:
        """Extension over this universe, cached per proposition."""
        cached = self._ext_cache.get(prop)
        if cached is None:
            cached = extension(self._universe, prop)
            self._ext_cache[prop] = cached
        return cached

    def __len__(self) -> int:
        return len(self._universe)


def event_probability(space: ProbabilitySpace, event: Iterable[TruthAssignment]):
    """Total weight of an event (a subset of the universe)."""
    total = 0
    for w in event:
        total += space.weight(w)
    return total


def absolute_probability(space: ProbabilitySpace, prop: Proposition):
    """Probability of ``prop``, i.e. conditioning on a tautology."""
    mass = event_probability(space, space.universe)
    if mass <= 0:
        raise ConditionNullError("the universe carries no mass")
    return event_probability(space, space.extension_of(prop)) / mass


def conditional_probability(space: ProbabilitySpace, target: Proposition, condition: Proposition):
    """Ratio of the joint extension's mass to the condition's mass.

    Raises :class:`ConditionNullError` when the condition's extension has
    zero (or negative) mass, i.e. the conditioning is ill-posed.
    """
    ext_b = space.extension_of(condition)
    denom = event_probability(space, ext_b)
    if denom <= 0:
        raise ConditionNullError(
            f"conditioning proposition {condition} has extension mass {denom}"
        )
    numer = event_probability(space, space.extension_of(target) & ext_b)
    return numer / denom


def bayes_identity(space: ProbabilitySpace, a: Proposition, b: Proposition):
    """Both sides of p(B)p(A|B) = p(A)p(B|A); they must agree.

    Requires both propositions to have positive extension mass.
    """
    if event_probability(space, space.extension_of(a)) <= 0:
        raise ConditionNullError(f"proposition {a} has extension mass 0")
    if event_probability(space, space.extension_of(b)) <= 0:
        raise ConditionNullError(f"proposition {b} has extension mass 0")
    lhs = absolute_probability(space, b) * conditional_probability(space, a, b)
    rhs = absolute_probability(space, a) * conditional_probability(space, b, a)
    return lhs, rhs


def _splits(n: int) -> list[tuple[str, list[int], list[int]]]:
    """Deterministic disjoint index pairs used by the additivity check."""
    out = []
    for k in range(1, n):
        out.append((f"prefix-{k}", list(range(k)), list(range(k, n))))
    if n >= 2:
        out.append(("parity", list(range(0, n, 2)), list(range(1, n, 2))))
    return out


def verify_kolmogorov(space: ProbabilitySpace) -> Report:
    """Check total mass, non-negativity, and finite additivity.

    Failures are reported with the offending weight or event, never raised.
    """
    report = Report("kolmogorov")
    tol = space.mass_tolerance
    mass = event_probability(space, space.universe)
    if abs(mass - 1) <= tol:
        report.add("total-mass", PASS, f"mass={mass}", tolerance=tol)
    else:
        report.add(
            "total-mass",
            FAIL,
            f"mass={mass}, deficit={1 - mass}",
            gap=abs(mass - 1),
            tolerance=tol,
        )

    bad = [(i, w) for i, w in enumerate(space.weights) if w < 0]
    if not bad:
        report.add("non-negativity", PASS, f"{len(space)} weights")
    else:
        i, w = bad[0]
        report.add("non-negativity", FAIL, f"weight #{i} is {w}", witness=i)

    universe = space.universe
    failures = 0
    first = None
    for label, left_idx, right_idx in _splits(len(universe)):
        left = [universe[i] for i in left_idx]
        right = [universe[i] for i in right_idx]
        whole = event_probability(space, left + right)
        parts = event_probability(space, left) + event_probability(space, right)
        if abs(whole - parts) > tol:
            failures += 1
            if first is None:
                first = (label, whole, parts)
    singletons = sum(event_probability(space, [w]) for w in universe)
    if abs(singletons - mass) > tol:
        failures += 1
        if first is None:
            first = ("singletons", mass, singletons)
    if failures == 0:
        report.add("additivity", PASS, f"{len(_splits(len(universe))) + 1} disjoint families")
    else:
        label, whole, parts = first
        report.add(
            "additivity",
            FAIL,
            f"family {label}: union mass {whole}, summed mass {parts}",
            witness=label,
            gap=abs(whole - parts),
            tolerance=tol,
        )
    return report
