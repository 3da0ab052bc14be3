"""Propositional language over states and context-indexed properties.

Formulas are immutable ASTs whose leaves either name a state or pair a
property with a micro-context; the connectives are negation, conjunction
and disjunction with classical two-valued semantics over explicit finite
universes of truth assignments.

Surface syntax (whitespace-insensitive, ``!`` binds tighter than ``&``
tighter than ``|``, binary connectives left-associative)::

    prop   := term { "|" term }
    term   := factor { "&" factor }
    factor := "!" factor | "(" prop ")" | atom
    atom   := "state(" IDENT ")" | "prop(" IDENT "," IDENT ")"
    IDENT  := [A-Za-z_][A-Za-z0-9_]*
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .errors import (
    InvalidModelError,
    NonUniformContextError,
    ParseError,
    UnknownAtomError,
)

__all__ = [
    "Entity",
    "StateAtom",
    "PropertyAtom",
    "Atom",
    "Not",
    "And",
    "Or",
    "Proposition",
    "TruthAssignment",
    "parse_proposition",
    "format_proposition",
    "evaluate",
    "extension",
    "entails",
    "equivalent",
    "atoms_of",
    "properties_of",
    "contexts_of",
    "has_state_atoms",
    "substitute_context",
    "atom_sort_key",
    "entity_atoms",
    "enumerate_formulas",
]


@dataclass(frozen=True)
class Entity:
    """Finite declaration of the property, state and context identifiers."""

    properties: frozenset[str]
    states: frozenset[str]
    contexts: frozenset[str]

    def __init__(self, properties: Iterable[str], states: Iterable[str], contexts: Iterable[str]):
        object.__setattr__(self, "properties", frozenset(properties))
        object.__setattr__(self, "states", frozenset(states))
        object.__setattr__(self, "contexts", frozenset(contexts))
        if not (self.properties and self.states and self.contexts):
            raise InvalidModelError("entity needs at least one property, state and context")
        if (self.properties & self.states) or (self.properties & self.contexts) or (
            self.states & self.contexts
        ):
            raise InvalidModelError("property, state and context identifiers must be disjoint")

    def declares(self, atom: Atom) -> bool:
        if isinstance(atom, StateAtom):
            return atom.state in self.states
        return atom.property in self.properties and atom.context in self.contexts


@dataclass(frozen=True)
class StateAtom:
    """Leaf proposition: the entity is in the named state."""

    state: str

    def __str__(self) -> str:
        return f"state({self.state})"


@dataclass(frozen=True)
class PropertyAtom:
    """Leaf proposition: the entity has the property in the given micro-context."""

    property: str
    context: str

    def __str__(self) -> str:
        return f"prop({self.property},{self.context})"


@dataclass(frozen=True)
class Not:
    operand: "Proposition"

    def __str__(self) -> str:
        return format_proposition(self)


@dataclass(frozen=True)
class And:
    left: "Proposition"
    right: "Proposition"

    def __str__(self) -> str:
        return format_proposition(self)


@dataclass(frozen=True)
class Or:
    left: "Proposition"
    right: "Proposition"

    def __str__(self) -> str:
        return format_proposition(self)


Atom = Union[StateAtom, PropertyAtom]
Proposition = Union[StateAtom, PropertyAtom, Not, And, Or]


def atom_sort_key(atom: Atom) -> tuple:
    """Deterministic ordering: state atoms first, then property atoms."""
    if isinstance(atom, StateAtom):
        return (0, atom.state)
    return (1, atom.property, atom.context)


def entity_atoms(entity: Entity) -> list[Atom]:
    """The entity's full atom set in deterministic order."""
    out: list[Atom] = [StateAtom(s) for s in sorted(entity.states)]
    for prop in sorted(entity.properties):
        for ctx in sorted(entity.contexts):
            out.append(PropertyAtom(prop, ctx))
    return out


@dataclass(frozen=True)
class TruthAssignment:
    """Total two-valued valuation of the entity's atoms, given by its true set.

    At most one state atom may be true (states are mutually exclusive).
    """

    entity: Entity
    true_atoms: frozenset[Atom]

    def __init__(self, entity: Entity, true_atoms: Iterable[Atom]):
        true_set = frozenset(true_atoms)
        for atom in true_set:
            if not entity.declares(atom):
                raise UnknownAtomError(f"atom {atom} is not declared by the entity")
        n_states = sum(1 for a in true_set if isinstance(a, StateAtom))
        if n_states > 1:
            raise InvalidModelError("at most one state atom may be true in an assignment")
        object.__setattr__(self, "entity", entity)
        object.__setattr__(self, "true_atoms", true_set)

    def value(self, atom: Atom) -> bool:
        if not self.entity.declares(atom):
            raise UnknownAtomError(f"atom {atom} is outside this assignment's domain")
        return atom in self.true_atoms

    @property
    def state(self) -> str | None:
        """The unique true state atom's identifier, if any."""
        for atom in self.true_atoms:
            if isinstance(atom, StateAtom):
                return atom.state
        return None


def evaluate(w: TruthAssignment, prop: Proposition) -> bool:
    """Classical recursive evaluation of ``prop`` under ``w``."""
    if isinstance(prop, (StateAtom, PropertyAtom)):
        return w.value(prop)
    if isinstance(prop, Not):
        return not evaluate(w, prop.operand)
    if isinstance(prop, And):
        return evaluate(w, prop.left) and evaluate(w, prop.right)
    if isinstance(prop, Or):
        return evaluate(w, prop.left) or evaluate(w, prop.right)
    raise TypeError(f"not a proposition: {prop!r}")


def extension(universe: Iterable[TruthAssignment], prop: Proposition) -> frozenset[TruthAssignment]:
    """The assignments in ``universe`` that make ``prop`` true."""
    return frozenset(w for w in universe if evaluate(w, prop))


def entails(universe: Iterable[TruthAssignment], a: Proposition, b: Proposition) -> bool:
    """Logical preorder over the universe: every model of ``a`` models ``b``."""
    universe = tuple(universe)
    return extension(universe, a) <= extension(universe, b)


def equivalent(universe: Iterable[TruthAssignment], a: Proposition, b: Proposition) -> bool:
    universe = tuple(universe)
    return extension(universe, a) == extension(universe, b)


def atoms_of(prop: Proposition) -> Iterator[Atom]:
    """All atom occurrences, left to right (duplicates included)."""
    if isinstance(prop, (StateAtom, PropertyAtom)):
        yield prop
    elif isinstance(prop, Not):
        yield from atoms_of(prop.operand)
    elif isinstance(prop, (And, Or)):
        yield from atoms_of(prop.left)
        yield from atoms_of(prop.right)
    else:
        raise TypeError(f"not a proposition: {prop!r}")


def properties_of(prop: Proposition) -> frozenset[str]:
    return frozenset(a.property for a in atoms_of(prop) if isinstance(a, PropertyAtom))


def contexts_of(prop: Proposition) -> frozenset[str]:
    return frozenset(a.context for a in atoms_of(prop) if isinstance(a, PropertyAtom))


def has_state_atoms(prop: Proposition) -> bool:
    return any(isinstance(a, StateAtom) for a in atoms_of(prop))


def substitute_context(prop: Proposition, context: str) -> Proposition:
    """Rewrite every property atom to the given context; state atoms untouched.

    The input must carry a single context index (or none at all).
    """
    ctxs = contexts_of(prop)
    if len(ctxs) > 1:
        raise NonUniformContextError(
            f"cannot substitute a context into a proposition mixing contexts {sorted(ctxs)}"
        )
    return _substitute(prop, context)


def _substitute(prop: Proposition, context: str) -> Proposition:
    if isinstance(prop, StateAtom):
        return prop
    if isinstance(prop, PropertyAtom):
        if prop.context == context:
            return prop
        return PropertyAtom(prop.property, context)
    if isinstance(prop, Not):
        return Not(_substitute(prop.operand, context))
    if isinstance(prop, And):
        return And(_substitute(prop.left, context), _substitute(prop.right, context))
    if isinstance(prop, Or):
        return Or(_substitute(prop.left, context), _substitute(prop.right, context))
    raise TypeError(f"not a proposition: {prop!r}")


# --- printing ---------------------------------------------------------------

# Precedence levels; a node is parenthesized when printed into a slot that
# requires a strictly tighter level.  Right operands of the left-associative
# binary connectives demand one level above the operator's own.
_LEVEL_OR = 0
_LEVEL_AND = 1
_LEVEL_NOT = 2
_LEVEL_ATOM = 3


def _level(prop: Proposition) -> int:
    if isinstance(prop, Or):
        return _LEVEL_OR
    if isinstance(prop, And):
        return _LEVEL_AND
    if isinstance(prop, Not):
        return _LEVEL_NOT
    return _LEVEL_ATOM


def format_proposition(prop: Proposition) -> str:
    """Render to the surface syntax; reparsing yields an equal AST."""
    return _format(prop, 0)


def _format(prop: Proposition, min_level: int) -> str:
    if isinstance(prop, StateAtom):
        text = f"state({prop.state})"
    elif isinstance(prop, PropertyAtom):
        text = f"prop({prop.property},{prop.context})"
    elif isinstance(prop, Not):
        text = "!" + _format(prop.operand, _LEVEL_NOT)
    elif isinstance(prop, And):
        text = _format(prop.left, _LEVEL_AND) + " & " + _format(prop.right, _LEVEL_AND + 1)
    elif isinstance(prop, Or):
        text = _format(prop.left, _LEVEL_OR) + " | " + _format(prop.right, _LEVEL_OR + 1)
    else:
        raise TypeError(f"not a proposition: {prop!r}")
    if _level(prop) < min_level:
        return "(" + text + ")"
    return text


# --- parsing ----------------------------------------------------------------

_PUNCT = {"(": "lparen", ")": "rparen", ",": "comma", "&": "and", "|": "or", "!": "not"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append((_PUNCT[ch], ch, i))
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(("ident", text[start:i], start))
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, entity: Entity):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.entity = entity

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {what}", tok[2])
        return self.advance()

    def parse(self) -> Proposition:
        node = self.parse_or()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return node

    def parse_or(self) -> Proposition:
        node = self.parse_and()
        while self.peek()[0] == "or":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Proposition:
        node = self.parse_factor()
        while self.peek()[0] == "and":
            self.advance()
            node = And(node, self.parse_factor())
        return node

    def parse_factor(self) -> Proposition:
        kind, value, pos = self.peek()
        if kind == "not":
            self.advance()
            return Not(self.parse_factor())
        if kind == "lparen":
            self.advance()
            node = self.parse_or()
            self.expect("rparen", "')'")
            return node
        if kind == "ident":
            return self.parse_atom()
        raise ParseError("expected '!', '(' or an atom", pos)

    def parse_atom(self) -> Proposition:
        kind, head, pos = self.advance()
        if head not in ("state", "prop"):
            raise ParseError(f"expected 'state(' or 'prop(', got {head!r}", pos)
        self.expect("lparen", "'('")
        if head == "state":
            _, name, npos = self.expect("ident", "a state identifier")
            self._check_role(name, "state", npos)
            self.expect("rparen", "')'")
            return StateAtom(name)
        _, prop_name, ppos = self.expect("ident", "a property identifier")
        self._check_role(prop_name, "property", ppos)
        self.expect("comma", "','")
        _, ctx_name, cpos = self.expect("ident", "a context identifier")
        self._check_role(ctx_name, "context", cpos)
        self.expect("rparen", "')'")
        return PropertyAtom(prop_name, ctx_name)

    def _check_role(self, name: str, role: str, pos: int) -> None:
        entity = self.entity
        pools = {"state": entity.states, "property": entity.properties, "context": entity.contexts}
        if name in pools[role]:
            return
        for other, pool in pools.items():
            if other != role and name in pool:
                raise ParseError(f"{name!r} names a {other}, not a {role}", pos)
        raise ParseError(f"undeclared identifier {name!r}", pos)


def parse_proposition(text: str, entity: Entity) -> Proposition:
    """Parse surface syntax into an AST, checking identifiers against the entity."""
    return _Parser(text, entity).parse()


# --- bounded enumeration ----------------------------------------------------


def enumerate_formulas(atoms: Iterable[Atom], depth: int) -> list[Proposition]:
    """All structurally distinct formulas of nesting depth <= ``depth``.

    Atoms have depth 1; each connective adds one.  Deterministic order:
    the given atom order, then closure rounds (negations before
    conjunctions before disjunctions, operands in enumeration order).
    Counts grow roughly as 2 * |F|^2 per round.
    """
    seen: dict[Proposition, None] = dict.fromkeys(atoms)
    for _ in range(max(depth, 0) - 1):
        snapshot = list(seen)
        for f in snapshot:
            seen.setdefault(Not(f), None)
        for f in snapshot:
            for g in snapshot:
                seen.setdefault(And(f, g), None)
                seen.setdefault(Or(f, g), None)
    return list(seen) if depth >= 1 else []
