"""Hilbert-space backend: density states, projector properties, and the
elastic-band constructor realizing trace probabilities as context averages.

Matrices are dense complex arrays of dimension 2..8 — everything the
checks need is exercised by qubits, and the cap keeps exhaustive
verification fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidModelError, NullOutcomeError, UnknownIdError
from .language import Entity, PropertyAtom, StateAtom, TruthAssignment
from .lattice import FirstKindTransform, OrthoLattice
from .measurement import MeasurementCatalog, MeasurementProcedure
from .model import ContextualModel
from .probability import ProbabilitySpace
from .report import FAIL, PASS, Report
from .tolerances import (
    COMPARISON_EPS,
    HERMITIAN_EPS,
    NULL_OUTCOME_EPS,
    PSD_EPS,
    stat_tolerance,
)

__all__ = [
    "DensityState",
    "ProjectorProperty",
    "HilbertModel",
    "born",
    "commuting",
    "luders",
    "q_conditional",
    "projector_lattice",
    "luders_transform",
    "build_band_model",
    "verify_born_reconstruction",
]

_MAX_DIM = 8


def _as_matrix(entries, what: str) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidModelError(f"{what} must be a square matrix, got shape {m.shape}")
    if not 2 <= m.shape[0] <= _MAX_DIM:
        raise InvalidModelError(f"{what} dimension {m.shape[0]} outside 2..{_MAX_DIM}")
    return m


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


@dataclass(eq=False)
class DensityState:
    """A named density operator: hermitian, positive semidefinite, trace one."""

    id: str
    rho: np.ndarray

    def __post_init__(self):
        self.rho = _as_matrix(self.rho, f"state {self.id!r}")
        if _max_abs(self.rho - self.rho.conj().T) > HERMITIAN_EPS:
            raise InvalidModelError(f"state {self.id!r} is not hermitian")
        eigs = np.linalg.eigvalsh(self.rho)
        if float(eigs.min()) < -PSD_EPS:
            raise InvalidModelError(
                f"state {self.id!r} has negative eigenvalue {eigs.min():.3e}"
            )
        trace = complex(np.trace(self.rho))
        if abs(trace - 1) > COMPARISON_EPS:
            raise InvalidModelError(f"state {self.id!r} has trace {trace}")

    @property
    def dimension(self) -> int:
        return self.rho.shape[0]


@dataclass(eq=False)
class ProjectorProperty:
    """A named orthogonal projector: hermitian and idempotent."""

    id: str
    proj: np.ndarray

    def __post_init__(self):
        self.proj = _as_matrix(self.proj, f"property {self.id!r}")
        if _max_abs(self.proj - self.proj.conj().T) > HERMITIAN_EPS:
            raise InvalidModelError(f"property {self.id!r} is not hermitian")
        if _max_abs(self.proj @ self.proj - self.proj) > HERMITIAN_EPS:
            raise InvalidModelError(f"property {self.id!r} is not idempotent")

    @property
    def dimension(self) -> int:
        return self.proj.shape[0]


def _check_dims(a, b) -> None:
    if a.dimension != b.dimension:
        raise InvalidModelError(
            f"dimension mismatch: {a.id!r} is {a.dimension}-dimensional, "
            f"{b.id!r} is {b.dimension}-dimensional"
        )


def born(state: DensityState, prop: ProjectorProperty) -> float:
    """Trace probability of the property in the state, clamped to [0, 1]."""
    _check_dims(state, prop)
    value = complex(np.trace(state.rho @ prop.proj))
    if abs(value.imag) > COMPARISON_EPS:
        raise ValueError(f"trace probability has imaginary part {value.imag:.3e}")
    real = value.real
    if real < -COMPARISON_EPS or real > 1 + COMPARISON_EPS:
        raise ValueError(f"trace probability {real} outside [0, 1]")
    return min(1.0, max(0.0, real))


def commuting(a: ProjectorProperty, b: ProjectorProperty) -> bool:
    """True when the projectors commute (simultaneously measurable)."""
    _check_dims(a, b)
    return _max_abs(a.proj @ b.proj - b.proj @ a.proj) <= COMPARISON_EPS


def luders(state: DensityState, prop: ProjectorProperty) -> DensityState:
    """Post-measurement state P rho P / Tr[rho P] of an ideal repeatable test."""
    _check_dims(state, prop)
    weight = complex(np.trace(state.rho @ prop.proj)).real
    if weight <= NULL_OUTCOME_EPS:
        raise NullOutcomeError(
            f"property {prop.id!r} has weight {weight:.3e} in state {state.id!r}"
        )
    updated = prop.proj @ state.rho @ prop.proj / weight
    return DensityState(f"{state.id}|{prop.id}", updated)


def q_conditional(state: DensityState, first: ProjectorProperty, second: ProjectorProperty) -> float:
    """Probability of ``second`` after measuring ``first``:
    Tr[Q P rho P Q] / Tr[P rho P]."""
    _check_dims(state, first)
    _check_dims(state, second)
    p, q = first.proj, second.proj
    denom = complex(np.trace(p @ state.rho @ p)).real
    if denom <= NULL_OUTCOME_EPS:
        raise NullOutcomeError(f"first measurement {first.id!r} has null outcome")
    numer = complex(np.trace(q @ p @ state.rho @ p @ q)).real
    return min(1.0, max(0.0, numer / denom))


class HilbertModel:
    """Finite families of density states and projector properties.

    Exposes the same probability surface as a contextual model, with the
    trace rule supplying the table directly.
    """

    kind = "quantum"

    def __init__(
        self,
        dimension: int,
        states: Iterable[DensityState],
        properties: Iterable[ProjectorProperty],
        *,
        lattice: OrthoLattice | None = None,
        first_kind: Mapping[str, FirstKindTransform] | None = None,
        tolerance=COMPARISON_EPS,
    ):
        self.dimension = dimension
        self.states: dict[str, DensityState] = {}
        for s in states:
            if s.dimension != dimension:
                raise InvalidModelError(f"state {s.id!r} has wrong dimension")
            if s.id in self.states:
                raise InvalidModelError(f"duplicate state id {s.id!r}")
            self.states[s.id] = s
        self.properties: dict[str, ProjectorProperty] = {}
        for p in properties:
            if p.dimension != dimension:
                raise InvalidModelError(f"property {p.id!r} has wrong dimension")
            if p.id in self.properties:
                raise InvalidModelError(f"duplicate property id {p.id!r}")
            self.properties[p.id] = p
        self.lattice = lattice
        self.first_kind = dict(first_kind or {})
        self.tolerance = tolerance
        self.state_ids = tuple(sorted(self.states))
        self.property_ids = tuple(sorted(self.properties))

    def state(self, state_id: str) -> DensityState:
        try:
            return self.states[state_id]
        except KeyError:
            raise UnknownIdError(f"unknown state {state_id!r}") from None

    def property(self, prop_id: str) -> ProjectorProperty:
        try:
            return self.properties[prop_id]
        except KeyError:
            raise UnknownIdError(f"unknown property {prop_id!r}") from None

    def q_probability(self, state_id: str, prop_id: str) -> float:
        return born(self.state(state_id), self.property(prop_id))


def _match_element(matrix: np.ndarray, family: Mapping[str, np.ndarray], tol: float) -> str | None:
    for name, candidate in family.items():
        if _max_abs(matrix - candidate) <= tol:
            return name
    return None


def projector_lattice(
    properties: Mapping[str, ProjectorProperty], match_tol: float = 1e-8
) -> OrthoLattice:
    """Meet/join/complement tables of a projector family closed under them.

    The meet projects onto the intersection of ranges (Anderson-Duffin
    formula 2P(P+Q)^+Q), the join is its De Morgan dual, the complement
    is I - P.  Raises when the family is not closed or lacks 0 and I.
    """
    mats = {name: p.proj for name, p in properties.items()}
    names = sorted(mats)
    dim = next(iter(mats.values())).shape[0]
    identity = np.eye(dim, dtype=complex)

    bottom = _match_element(np.zeros((dim, dim), dtype=complex), mats, match_tol)
    top = _match_element(identity, mats, match_tol)
    if bottom is None or top is None:
        raise InvalidModelError("projector family must contain the zero and identity projectors")

    def meet_mat(p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return 2 * p @ np.linalg.pinv(p + q) @ q

    meet: dict[tuple[str, str], str] = {}
    join: dict[tuple[str, str], str] = {}
    ortho: dict[str, str] = {}
    for a in names:
        complement = _match_element(identity - mats[a], mats, match_tol)
        if complement is None:
            raise InvalidModelError(f"family lacks the complement of {a!r}")
        ortho[a] = complement
        for b in names:
            m = _match_element(meet_mat(mats[a], mats[b]), mats, match_tol)
            if m is None:
                raise InvalidModelError(f"family is not closed under meet of {a!r}, {b!r}")
            meet[(a, b)] = m
            j = _match_element(
                identity - meet_mat(identity - mats[a], identity - mats[b]), mats, match_tol
            )
            if j is None:
                raise InvalidModelError(f"family is not closed under join of {a!r}, {b!r}")
            join[(a, b)] = j
    return OrthoLattice(names, meet, join, ortho, bottom, top)


def luders_transform(
    model: HilbertModel, prop_id: str, match_tol: float = 1e-8
) -> FirstKindTransform:
    """First-kind transform for a property, matching each post-measurement
    state against the model's declared states."""
    prop = model.property(prop_id)
    mapping: dict[str, str] = {}
    mats = {sid: s.rho for sid, s in model.states.items()}
    for sid in model.state_ids:
        state = model.states[sid]
        if born(state, prop) <= model.tolerance:
            continue
        image = luders(state, prop)
        target = _match_element(image.rho, mats, match_tol)
        if target is None:
            raise InvalidModelError(
                f"post-measurement state of {sid!r} under {prop_id!r} is not declared"
            )
        mapping[sid] = target
    return FirstKindTransform(prop_id, mapping)


# --- elastic-band construction ----------------------------------------------


def build_band_model(
    thetas: Iterable[float],
    segments: int,
    state_names: Iterable[str] | None = None,
    property_name: str = "up",
    procedure_id: str = "band",
) -> ContextualModel:
    """Discretized breakable-band picture of a two-outcome measurement.

    One state per polar angle; the band between the outcomes is cut into
    ``segments`` uniform micro-contexts, and a state at angle theta makes
    the outcome property true in exactly those segments whose midpoint
    lies below (1 + cos theta)/2.  The mean conditional probability of
    the property then counts segments, approaching cos^2(theta/2) with
    error at most 1/segments.
    """
    thetas = list(thetas)
    if segments < 1:
        raise ValueError("segment count must be >= 1")
    if not thetas:
        raise ValueError("at least one angle is required")
    for theta in thetas:
        if not 0 <= theta <= math.pi + 1e-12:
            raise ValueError(f"angle {theta} outside [0, pi]")
    if state_names is None:
        names = [f"S{i + 1}" for i in range(len(thetas))]
    else:
        names = list(state_names)
        if len(names) != len(thetas):
            raise ValueError("state_names must match thetas in length")
    contexts = [f"c{i + 1}" for i in range(segments)]
    entity = Entity([property_name], names, contexts)

    assignments = []
    for name, theta in zip(names, thetas):
        threshold = (1 + math.cos(theta)) / 2
        true_atoms = [StateAtom(name)]
        for i, ctx in enumerate(contexts):
            midpoint = (i + 0.5) / segments
            if midpoint < threshold:
                true_atoms.append(PropertyAtom(property_name, ctx))
        assignments.append(TruthAssignment(entity, true_atoms))
    share = Fraction(1, len(assignments))
    space = ProbabilitySpace(assignments, [share] * len(assignments))

    procedure = MeasurementProcedure(
        procedure_id,
        [property_name],
        contexts,
        {c: Fraction(1, segments) for c in contexts},
    )
    catalog = MeasurementCatalog(entity, [procedure])
    return ContextualModel(
        entity,
        space,
        catalog,
        kind="generic",
        tolerance=max(COMPARISON_EPS, stat_tolerance(segments)),
    )


def verify_born_reconstruction(model: HilbertModel, segments: int) -> Report:
    """Compare trace probabilities of a single qubit projector against the
    band model built from each pure state's relative angle.

    Every per-state gap must stay within the discretization bound
    1/segments; the report carries the gaps either way.
    """
    report = Report("born-reconstruction")
    if model.dimension != 2:
        raise InvalidModelError("reconstruction check requires a qubit model")
    if len(model.property_ids) != 1:
        raise InvalidModelError("reconstruction check requires exactly one projector")
    if segments < 1:
        raise ValueError("segment count must be >= 1")
    prop = model.properties[model.property_ids[0]]

    thetas = []
    born_values = []
    for sid in model.state_ids:
        state = model.states[sid]
        purity = complex(np.trace(state.rho @ state.rho)).real
        if abs(purity - 1) > 1e-9:
            raise InvalidModelError(f"state {sid!r} is not pure (purity {purity})")
        value = born(state, prop)
        born_values.append(value)
        thetas.append(2 * math.acos(min(1.0, math.sqrt(value))))

    band = build_band_model(thetas, segments, state_names=model.state_ids)
    bound = 1.0 / segments
    worst = 0.0
    for sid, value in zip(model.state_ids, born_values):
        mean = band.q_probability(sid, "up")
        gap = abs(float(mean) - value)
        worst = max(worst, gap)
        report.add(
            f"state {sid}",
            PASS if gap <= bound else FAIL,
            f"born={value:.6f}, band mean={float(mean):.6f}",
            witness={"born": value, "mean": float(mean)},
            gap=gap,
            tolerance=bound,
        )
    report.add(
        "max-gap",
        PASS if worst <= bound else FAIL,
        f"max |mean - born| = {worst:.6g} over {len(model.state_ids)} states",
        gap=worst,
        tolerance=bound,
    )
    return report
