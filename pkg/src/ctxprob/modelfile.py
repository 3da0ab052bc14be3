"""JSON model files (``format: 1``).

Layout::

    {
      "format": 1,
      "tolerance": 1e-9,                       # optional
      "entity": {"properties": [...], "states": [...], "contexts": [...]},
      "universe": [
        {"state": "S1" | null,                  # the single true state atom
         "props": [["E", "c1"], ...],           # true property atoms
         "weight": 0.25 | [1, 4]},              # float or exact rational
        ...
      ],
      "procedures": [
        {"id": "M1", "measures": [...], "contexts": [...],
         "context_weights": {"c1": 0.5 | [1, 2], ...}},
        ...
      ],
      "lattice": {"elements": [...],            # optional
                  "meet": {"a": {"b": "O", ...}, ...},
                  "join": {...}, "ortho": {"a": "a_perp", ...},
                  "bottom": "O", "top": "U"},
      "first_kind": {"F": {"S1": "S2", ...}},   # optional
      "backend": {"kind": "classical", "possession": {"S1": ["E"], ...}}
               | {"kind": "quantum", "dimension": 2,
                  "states": {"S1": [[[re, im], ...], ...], ...},
                  "properties": {...}}          # optional
    }

Matrices are row-major arrays of ``[re, im]`` pairs.  Loading enforces
referential integrity (every identifier declared before use) and raises
:class:`ModelFileError` with a JSON-path location; numeric invariants
such as weight normalization are left to the check reports.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import InvalidModelError, ModelFileError
from .language import Entity, PropertyAtom, StateAtom, TruthAssignment
from .lattice import FirstKindTransform, OrthoLattice
from .measurement import MeasurementCatalog, MeasurementProcedure
from .model import ContextualModel
from .probability import ProbabilitySpace
from .tolerances import COMPARISON_EPS

__all__ = ["load_model", "loads_model", "save_model", "dumps_model"]

FORMAT_VERSION = 1


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ModelFileError(f"missing required field {key!r}", where)
    return doc[key]


def _string_list(value, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ModelFileError("expected a list of strings", where)
    return value


def _weight(value, where: str):
    if isinstance(value, bool):
        raise ModelFileError("weight must be a number or [num, den]", where)
    if isinstance(value, (int, float)):
        return value
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(x, int) and not isinstance(x, bool) for x in value)
    ):
        if value[1] == 0:
            raise ModelFileError("rational weight has zero denominator", where)
        return Fraction(value[0], value[1])
    raise ModelFileError("weight must be a number or [num, den]", where)


def _encode_weight(value):
    if isinstance(value, Fraction):
        return [value.numerator, value.denominator]
    if isinstance(value, int):
        return [value, 1]
    return float(value)


def _complex_matrix(value, where: str):
    import numpy as np

    if not isinstance(value, list) or not value:
        raise ModelFileError("matrix must be a non-empty list of rows", where)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ModelFileError("matrix row must be a list", f"{where}[{i}]")
        entries = []
        for j, cell in enumerate(row):
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in cell)
            ):
                raise ModelFileError("matrix entry must be [re, im]", f"{where}[{i}][{j}]")
            entries.append(complex(cell[0], cell[1]))
        rows.append(entries)
    return np.array(rows, dtype=complex)


def _encode_matrix(matrix) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in matrix.tolist()]


def loads_model(text: str) -> ContextualModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFileError(
            f"invalid JSON: {err.msg}", f"line {err.lineno}, column {err.colno}"
        ) from err
    if not isinstance(doc, dict):
        raise ModelFileError("top level must be an object", "$")
    version = _require(doc, "format", "$")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported format {version!r}", "format")

    entity_doc = _require(doc, "entity", "$")
    if not isinstance(entity_doc, dict):
        raise ModelFileError("entity must be an object", "entity")
    try:
        entity = Entity(
            _string_list(_require(entity_doc, "properties", "entity"), "entity.properties"),
            _string_list(_require(entity_doc, "states", "entity"), "entity.states"),
            _string_list(_require(entity_doc, "contexts", "entity"), "entity.contexts"),
        )
    except InvalidModelError as err:
        raise ModelFileError(str(err), "entity") from err

    universe_doc = _require(doc, "universe", "$")
    if not isinstance(universe_doc, list) or not universe_doc:
        raise ModelFileError("universe must be a non-empty list", "universe")
    assignments = []
    weights = []
    for i, row in enumerate(universe_doc):
        where = f"universe[{i}]"
        if not isinstance(row, dict):
            raise ModelFileError("assignment must be an object", where)
        atoms = []
        state = row.get("state")
        if state is not None:
            if not isinstance(state, str):
                raise ModelFileError("state must be a string or null", f"{where}.state")
            if state not in entity.states:
                raise ModelFileError(f"unknown state {state!r}", f"{where}.state")
            atoms.append(StateAtom(state))
        for j, pair in enumerate(row.get("props", [])):
            pwhere = f"{where}.props[{j}]"
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
                raise ModelFileError("expected [property, context]", pwhere)
            prop, ctx = pair
            if prop not in entity.properties:
                raise ModelFileError(f"unknown property {prop!r}", pwhere)
            if ctx not in entity.contexts:
                raise ModelFileError(f"unknown context {ctx!r}", pwhere)
            atoms.append(PropertyAtom(prop, ctx))
        assignments.append(TruthAssignment(entity, atoms))
        weights.append(_weight(_require(row, "weight", where), f"{where}.weight"))
    try:
        space = ProbabilitySpace(assignments, weights, validate=False)
    except InvalidModelError as err:
        raise ModelFileError(str(err), "universe") from err

    procedures_doc = _require(doc, "procedures", "$")
    if not isinstance(procedures_doc, list):
        raise ModelFileError("procedures must be a list", "procedures")
    procedures = []
    for i, row in enumerate(procedures_doc):
        where = f"procedures[{i}]"
        if not isinstance(row, dict):
            raise ModelFileError("procedure must be an object", where)
        pid = _require(row, "id", where)
        if not isinstance(pid, str):
            raise ModelFileError("procedure id must be a string", f"{where}.id")
        weights_doc = _require(row, "context_weights", where)
        if not isinstance(weights_doc, dict):
            raise ModelFileError("context_weights must be an object", f"{where}.context_weights")
        context_weights = {
            ctx: _weight(w, f"{where}.context_weights.{ctx}") for ctx, w in weights_doc.items()
        }
        try:
            procedures.append(
                MeasurementProcedure(
                    pid,
                    _string_list(_require(row, "measures", where), f"{where}.measures"),
                    _string_list(_require(row, "contexts", where), f"{where}.contexts"),
                    context_weights,
                    validate=False,
                )
            )
        except InvalidModelError as err:
            raise ModelFileError(str(err), where) from err
    try:
        catalog = MeasurementCatalog(entity, procedures, validate=False)
    except InvalidModelError as err:
        raise ModelFileError(str(err), "procedures") from err

    lattice = None
    if "lattice" in doc:
        lat = doc["lattice"]
        if not isinstance(lat, dict):
            raise ModelFileError("lattice must be an object", "lattice")
        try:
            lattice = OrthoLattice(
                _string_list(_require(lat, "elements", "lattice"), "lattice.elements"),
                _require(lat, "meet", "lattice"),
                _require(lat, "join", "lattice"),
                _require(lat, "ortho", "lattice"),
                _require(lat, "bottom", "lattice"),
                _require(lat, "top", "lattice"),
                order=lat.get("order"),
            )
        except InvalidModelError as err:
            raise ModelFileError(str(err), "lattice") from err

    first_kind = {}
    for prop, mapping in (doc.get("first_kind") or {}).items():
        where = f"first_kind.{prop}"
        if prop not in entity.properties:
            raise ModelFileError(f"unknown property {prop!r}", where)
        if not isinstance(mapping, dict):
            raise ModelFileError("transform must map states to states", where)
        for src, dst in mapping.items():
            if src not in entity.states:
                raise ModelFileError(f"unknown state {src!r}", where)
            if dst not in entity.states:
                raise ModelFileError(f"unknown state {dst!r}", f"{where}.{src}")
        first_kind[prop] = FirstKindTransform(prop, mapping)

    kind = "generic"
    possession = None
    quantum = None
    if "backend" in doc:
        backend = doc["backend"]
        if not isinstance(backend, dict):
            raise ModelFileError("backend must be an object", "backend")
        kind = _require(backend, "kind", "backend")
        if kind == "classical":
            possession_doc = _require(backend, "possession", "backend")
            if not isinstance(possession_doc, dict):
                raise ModelFileError("possession must be an object", "backend.possession")
            possession = {}
            for state, props in possession_doc.items():
                where = f"backend.possession.{state}"
                if state not in entity.states:
                    raise ModelFileError(f"unknown state {state!r}", where)
                listed = _string_list(props, where)
                unknown = set(listed) - entity.properties
                if unknown:
                    raise ModelFileError(f"unknown properties {sorted(unknown)}", where)
                possession[state] = frozenset(listed)
        elif kind == "quantum":
            from .quantum import DensityState, HilbertModel, ProjectorProperty

            dimension = _require(backend, "dimension", "backend")
            states_doc = _require(backend, "states", "backend")
            props_doc = _require(backend, "properties", "backend")
            try:
                q_states = [
                    DensityState(sid, _complex_matrix(mat, f"backend.states.{sid}"))
                    for sid, mat in states_doc.items()
                ]
                q_props = [
                    ProjectorProperty(pid, _complex_matrix(mat, f"backend.properties.{pid}"))
                    for pid, mat in props_doc.items()
                ]
                quantum = HilbertModel(dimension, q_states, q_props)
            except InvalidModelError as err:
                raise ModelFileError(str(err), "backend") from err
            unknown = set(quantum.state_ids) - entity.states
            if unknown:
                raise ModelFileError(f"quantum states not declared: {sorted(unknown)}", "backend.states")
            unknown = set(quantum.property_ids) - entity.properties
            if unknown:
                raise ModelFileError(
                    f"quantum properties not declared: {sorted(unknown)}", "backend.properties"
                )
        else:
            raise ModelFileError(f"unknown backend kind {kind!r}", "backend.kind")

    tolerance = doc.get("tolerance", COMPARISON_EPS)
    if not isinstance(tolerance, (int, float)) or isinstance(tolerance, bool) or tolerance < 0:
        raise ModelFileError("tolerance must be a non-negative number", "tolerance")

    return ContextualModel(
        entity,
        space,
        catalog,
        lattice=lattice,
        first_kind=first_kind,
        kind=kind,
        possession=possession,
        quantum=quantum,
        tolerance=tolerance,
        validate=False,
    )


def load_model(path) -> ContextualModel:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ModelFileError(f"cannot read {path}: {err}") from err
    return loads_model(text)


def dumps_model(model: ContextualModel) -> str:
    doc: dict = {"format": FORMAT_VERSION}
    if model.tolerance != COMPARISON_EPS:
        doc["tolerance"] = model.tolerance
    doc["entity"] = {
        "properties": sorted(model.entity.properties),
        "states": sorted(model.entity.states),
        "contexts": sorted(model.entity.contexts),
    }
    universe = []
    for w, weight in zip(model.space.universe, model.space.weights):
        props = sorted(
            (a.property, a.context) for a in w.true_atoms if isinstance(a, PropertyAtom)
        )
        universe.append(
            {
                "state": w.state,
                "props": [list(p) for p in props],
                "weight": _encode_weight(weight),
            }
        )
    doc["universe"] = universe
    doc["procedures"] = [
        {
            "id": proc.id,
            "measures": sorted(proc.measures),
            "contexts": sorted(proc.contexts),
            "context_weights": {
                c: _encode_weight(proc.context_weights[c]) for c in sorted(proc.contexts)
            },
        }
        for proc in model.catalog.sorted_procedures()
    ]
    if model.lattice is not None:
        lat = model.lattice
        doc["lattice"] = {
            "elements": list(lat.elements),
            "meet": {a: {b: lat.meet_of(a, b) for b in lat.elements} for a in lat.elements},
            "join": {a: {b: lat.join_of(a, b) for b in lat.elements} for a in lat.elements},
            "ortho": {a: lat.ortho_of(a) for a in lat.elements},
            "bottom": lat.bottom,
            "top": lat.top,
        }
    if model.first_kind:
        doc["first_kind"] = {
            prop: dict(sorted(model.first_kind[prop].mapping.items()))
            for prop in sorted(model.first_kind)
        }
    if model.kind == "classical" and model.possession is not None:
        doc["backend"] = {
            "kind": "classical",
            "possession": {s: sorted(ps) for s, ps in sorted(model.possession.items())},
        }
    elif model.kind == "quantum" and model.quantum is not None:
        doc["backend"] = {
            "kind": "quantum",
            "dimension": model.quantum.dimension,
            "states": {
                sid: _encode_matrix(model.quantum.states[sid].rho)
                for sid in model.quantum.state_ids
            },
            "properties": {
                pid: _encode_matrix(model.quantum.properties[pid].proj)
                for pid in model.quantum.property_ids
            },
        }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def save_model(model: ContextualModel, path) -> None:
    Path(path).write_text(dumps_model(model))
