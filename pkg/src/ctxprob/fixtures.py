"""Shipped demonstration models; regenerate with ``python -m ctxprob.fixtures <dir>``."""

from __future__ import annotations

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .classical import build_classical_model
from .language import Entity, PropertyAtom, StateAtom, TruthAssignment
from .lattice import OrthoLattice
from .measurement import MeasurementCatalog, MeasurementProcedure
from .model import ContextualModel
from .modelfile import dumps_model
from .probability import ProbabilitySpace
from .quantum import (
    DensityState,
    HilbertModel,
    ProjectorProperty,
    build_band_model,
    luders_transform,
    projector_lattice,
)

__all__ = [
    "classical_basic",
    "classical_boolean",
    "bayes_mean_gap",
    "compat_triangle",
    "mo2_lattice",
    "mo2_gpm_model",
    "independence_gap",
    "band_small",
    "qubit_mo2_hilbert",
    "qubit_fan_hilbert",
    "write_all",
]


def classical_basic() -> ContextualModel:
    """Three states over two properties; passes every collapse clause."""
    entity = Entity(["E", "F"], ["S1", "S2", "S3"], ["c1", "c2"])
    possession = {"S1": {"E", "F"}, "S2": {"E"}, "S3": set()}
    weights = {"S1": Fraction(1, 2), "S2": Fraction(1, 4), "S3": Fraction(1, 4)}
    return build_classical_model(entity, possession, weights)


def classical_boolean() -> ContextualModel:
    """Possession patterns forming the four-element Boolean algebra:
    Z=(0,0), E=(1,0), Ec=(0,1), U=(1,1)."""
    entity = Entity(["Z", "E", "Ec", "U"], ["S1", "S2"], ["c1"])
    possession = {"S1": {"E", "U"}, "S2": {"Ec", "U"}}
    weights = {"S1": Fraction(1, 4), "S2": Fraction(3, 4)}
    return build_classical_model(entity, possession, weights)


def bayes_mean_gap() -> ContextualModel:
    """Two-context model whose mean probabilities break the product identity
    p(B)p(A|B) = p(A)p(B|A) by 3/32 for A = prop(E,c1), B = prop(F,c1)."""
    entity = Entity(["E", "F"], ["S1"], ["c1", "c2"])
    rows = [
        # (E@c1, F@c1, E@c2, F@c2)
        (1, 1, 1, 0),
        (1, 0, 0, 1),
        (0, 0, 0, 1),
        (0, 0, 0, 0),
    ]
    assignments = []
    for e1, f1, e2, f2 in rows:
        atoms = [StateAtom("S1")]
        if e1:
            atoms.append(PropertyAtom("E", "c1"))
        if f1:
            atoms.append(PropertyAtom("F", "c1"))
        if e2:
            atoms.append(PropertyAtom("E", "c2"))
        if f2:
            atoms.append(PropertyAtom("F", "c2"))
        assignments.append(TruthAssignment(entity, atoms))
    space = ProbabilitySpace(assignments, [Fraction(1, 4)] * 4)
    procedure = MeasurementProcedure(
        "M", ["E", "F"], ["c1", "c2"], {"c1": Fraction(1, 2), "c2": Fraction(1, 2)}
    )
    catalog = MeasurementCatalog(entity, [procedure])
    return ContextualModel(entity, space, catalog)


def compat_triangle() -> ContextualModel:
    """Catalog where E and F share a procedure, F and G share another, but
    no procedure measures E and G together."""
    entity = Entity(["E", "F", "G"], ["S1"], ["c1"])
    w1 = TruthAssignment(
        entity,
        [
            StateAtom("S1"),
            PropertyAtom("E", "c1"),
            PropertyAtom("F", "c1"),
            PropertyAtom("G", "c1"),
        ],
    )
    w2 = TruthAssignment(entity, [StateAtom("S1")])
    space = ProbabilitySpace([w1, w2], [Fraction(1, 2), Fraction(1, 2)])
    procedures = [
        MeasurementProcedure("M_EF", ["E", "F"], ["c1"], {"c1": Fraction(1)}),
        MeasurementProcedure("M_FG", ["F", "G"], ["c1"], {"c1": Fraction(1)}),
    ]
    catalog = MeasurementCatalog(entity, procedures)
    return ContextualModel(entity, space, catalog)


def mo2_lattice() -> OrthoLattice:
    """The six-element non-distributive ortholattice with two atom pairs."""
    elements = ["O", "U", "a", "a_perp", "b", "b_perp"]
    meet, join = {}, {}
    for x in elements:
        for y in elements:
            if x == y:
                meet[(x, y)], join[(x, y)] = x, x
            elif x == "O" or y == "O":
                meet[(x, y)], join[(x, y)] = "O", (y if x == "O" else x)
            elif x == "U" or y == "U":
                meet[(x, y)], join[(x, y)] = (y if x == "U" else x), "U"
            else:
                meet[(x, y)], join[(x, y)] = "O", "U"  # distinct atoms
    ortho = {"O": "U", "U": "O", "a": "a_perp", "a_perp": "a", "b": "b_perp", "b_perp": "b"}
    return OrthoLattice(elements, meet, join, ortho, "O", "U")


def mo2_gpm_model() -> ContextualModel:
    """Ten-point model whose table over the MO2 elements violates
    additivity on the (a, a_perp) pair: 0.7 + 0.2 != 1."""
    elements = ["O", "U", "a", "a_perp", "b", "b_perp"]
    entity = Entity(elements, ["S1"], ["c1"])
    assignments = []
    for i in range(10):
        atoms = [StateAtom("S1"), PropertyAtom("U", "c1")]
        if i < 7:
            atoms.append(PropertyAtom("a", "c1"))
        if i < 2:
            atoms.append(PropertyAtom("a_perp", "c1"))
        if i < 5:
            atoms.append(PropertyAtom("b", "c1"))
        else:
            atoms.append(PropertyAtom("b_perp", "c1"))
        assignments.append(TruthAssignment(entity, atoms))
    space = ProbabilitySpace(assignments, [Fraction(1, 10)] * 10)
    procedure = MeasurementProcedure("M", elements, ["c1"], {"c1": Fraction(1)})
    catalog = MeasurementCatalog(entity, [procedure])
    return ContextualModel(entity, space, catalog, lattice=mo2_lattice())


def independence_gap() -> ContextualModel:
    """Two procedures for the same property with opposite context weights;
    their means differ by 1/2, so the independence check fails."""
    entity = Entity(["E"], ["S1"], ["c1", "c2"])
    w1 = TruthAssignment(entity, [StateAtom("S1"), PropertyAtom("E", "c1")])
    space = ProbabilitySpace([w1], [Fraction(1)])
    procedures = [
        MeasurementProcedure("M1", ["E"], ["c1", "c2"], {"c1": Fraction(3, 4), "c2": Fraction(1, 4)}),
        MeasurementProcedure("M2", ["E"], ["c1", "c2"], {"c1": Fraction(1, 4), "c2": Fraction(3, 4)}),
    ]
    catalog = MeasurementCatalog(entity, procedures)
    return ContextualModel(entity, space, catalog)


def band_small() -> ContextualModel:
    """Eight-segment band model at the pole, equator, and antipode."""
    return build_band_model(
        [0.0, math.pi / 2, math.pi], 8, state_names=["S_north", "S_halfpi", "S_south"]
    )


def _qubit_projector(theta: float) -> np.ndarray:
    """Rank-1 projector onto cos(t/2)|0> + sin(t/2)|1>."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    vec = np.array([c, s], dtype=complex)
    return np.outer(vec, vec.conj())


def qubit_mo2_hilbert() -> HilbertModel:
    """Qubit family {0, |0>, |1>, |+>, |->, I} with its projector lattice
    and post-measurement transforms; states are the four eigenstates plus
    the maximally mixed one."""
    zero = _qubit_projector(0.0)
    one = _qubit_projector(math.pi)
    plus = _qubit_projector(math.pi / 2)
    minus = np.eye(2, dtype=complex) - plus
    props = [
        ProjectorProperty("O", np.zeros((2, 2), dtype=complex)),
        ProjectorProperty("U", np.eye(2, dtype=complex)),
        ProjectorProperty("zero", zero),
        ProjectorProperty("one", one),
        ProjectorProperty("plus", plus),
        ProjectorProperty("minus", minus),
    ]
    states = [
        DensityState("north", zero),
        DensityState("south", one),
        DensityState("east", plus),
        DensityState("west", minus),
        DensityState("mixed", np.eye(2, dtype=complex) / 2),
    ]
    model = HilbertModel(2, states, props, lattice=projector_lattice({p.id: p for p in props}))
    model.first_kind = {
        pid: luders_transform(model, pid) for pid in model.property_ids if pid != "O"
    }
    return model


def qubit_fan_hilbert(pairs: int = 9, state: str = "mixed") -> HilbertModel:
    """A fan of ``pairs`` orthogonal projector pairs plus 0 and I (so 20
    elements at the default), closed under the lattice operations."""
    props = [
        ProjectorProperty("O", np.zeros((2, 2), dtype=complex)),
        ProjectorProperty("U", np.eye(2, dtype=complex)),
    ]
    for i in range(pairs):
        theta = math.pi * i / pairs
        p = _qubit_projector(theta)
        props.append(ProjectorProperty(f"p{i}", p))
        props.append(ProjectorProperty(f"p{i}_perp", np.eye(2, dtype=complex) - p))
    if state == "mixed":
        rho = np.eye(2, dtype=complex) / 2
    else:
        rho = _qubit_projector(0.3)
    states = [DensityState(state, rho)]
    lattice = projector_lattice({p.id: p for p in props})
    return HilbertModel(2, states, props, lattice=lattice)


_BAD_UNKNOWN_ID = """{
  "format": 1,
  "entity": {"properties": ["E"], "states": ["S1"], "contexts": ["c1"]},
  "universe": [
    {"state": "S1", "props": [["E", "c1"]], "weight": [1, 2]},
    {"state": "S1", "props": [["F", "c1"]], "weight": [1, 2]}
  ],
  "procedures": [
    {"id": "M", "measures": ["E"], "contexts": ["c1"], "context_weights": {"c1": 1.0}}
  ]
}
"""


def _with_scaled_mass(model: ContextualModel, factor: float) -> str:
    doc = json.loads(dumps_model(model))
    for row in doc["universe"]:
        weight = row["weight"]
        if isinstance(weight, list):
            row["weight"] = weight[0] * factor / weight[1]
        else:
            row["weight"] = weight * factor
    return json.dumps(doc, indent=2) + "\n"


def write_all(directory) -> list[Path]:
    """Write every shipped fixture file into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    files = {
        "cm_basic.ctx.json": dumps_model(classical_basic()),
        "cm_boolean.ctx.json": dumps_model(classical_boolean()),
        "cm_bad_mass.ctx.json": _with_scaled_mass(classical_basic(), 0.9),
        "bayes_mean_gap.ctx.json": dumps_model(bayes_mean_gap()),
        "compat_triangle.ctx.json": dumps_model(compat_triangle()),
        "mo2_gpm_fail.ctx.json": dumps_model(mo2_gpm_model()),
        "independence_gap.ctx.json": dumps_model(independence_gap()),
        "band_small.ctx.json": dumps_model(band_small()),
        "bad_unknown_id.ctx.json": _BAD_UNKNOWN_ID,
    }
    for name, text in files.items():
        path = directory / name
        path.write_text(text)
        written.append(path)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "models"
    for path in write_all(target):
        print(path)
