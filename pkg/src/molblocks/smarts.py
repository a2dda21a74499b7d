"""A small SMARTS subset matcher for environment patterns.

Supports exactly the constructs used by the shipped fragmentation rule
table: bracket atom expressions with ``;`` (and) ``,`` (or) ``!`` (not)
logic over element symbols, aromatic lowercase symbols, ``#n`` atomic
numbers, ``Dn`` degree, ``R`` ring membership, ``+n``/``-n`` charge,
``*``, and recursive ``$(...)`` environments; bond expressions over
``- = # : ~ @`` with the same logic; branches. Ring-closure digits and
component-level operators are not supported.

Patterns are matched *anchored*: the first pattern atom is tested against
a given molecule atom, and remaining pattern atoms must map injectively
onto distinct neighbors.  Recursive environments restart with a fresh
atom mapping, mirroring standard SMARTS semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .mol import Bond, Molecule

_SYMBOL_FOR_NUMBER = {
    0: "*", 1: "H", 5: "B", 6: "C", 7: "N", 8: "O", 9: "F",
    14: "Si", 15: "P", 16: "S", 17: "Cl", 34: "Se", 35: "Br", 53: "I",
}

_AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_BOND_PRIMITIVES = "-=#:~@"


class SmartsParseError(ValueError):
    """Raised when a pattern uses unsupported or malformed syntax."""


AtomTest = Callable[[Molecule, int], bool]
BondTest = Callable[[Molecule, Bond], bool]


@dataclass
class PatternAtom:
    test: AtomTest
    branches: list[tuple[BondTest, "PatternAtom"]] = field(default_factory=list)


@dataclass(frozen=True)
class Pattern:
    """A parsed anchored pattern."""

    source: str
    root: PatternAtom = field(compare=False)

    def matches_at(self, mol: Molecule, atom_idx: int) -> bool:
        return _match_from(mol, atom_idx, self.root, set())


def _match_from(mol: Molecule, idx: int, pat: PatternAtom, used: set[int]) -> bool:
    if idx in used or not pat.test(mol, idx):
        return False
    used.add(idx)
    if _match_branches(mol, idx, pat.branches, 0, used):
        return True
    used.discard(idx)
    return False


def _match_branches(mol: Molecule, center: int,
                    branches: list[tuple[BondTest, PatternAtom]],
                    k: int, used: set[int]) -> bool:
    if k == len(branches):
        return True
    bond_test, child = branches[k]
    for j, bond in mol.neighbors(center):
        if j in used or not bond_test(mol, bond):
            continue
        snapshot = set(used)
        if _match_from(mol, j, child, used):
            if _match_branches(mol, center, branches, k + 1, used):
                return True
        used.clear()
        used.update(snapshot)
    return False


# -- parsing ---------------------------------------------------------------


class _Cursor:
    __slots__ = ("text", "pos")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        c = self.peek()
        self.pos += 1
        return c

    def expect(self, c: str) -> None:
        if self.take() != c:
            raise SmartsParseError(
                f"expected {c!r} at position {self.pos - 1} in {self.text!r}")

    def take_digits(self) -> str:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        return self.text[start:self.pos]


def parse(pattern: str) -> Pattern:
    cur = _Cursor(pattern.strip())
    root = _parse_chain(cur)
    if cur.pos != len(cur.text):
        raise SmartsParseError(
            f"trailing characters at position {cur.pos} in {pattern!r}")
    return Pattern(source=pattern, root=root)


def _parse_chain(cur: _Cursor) -> PatternAtom:
    atom = _parse_atom(cur)
    node = atom
    while True:
        c = cur.peek()
        if c == "(":
            cur.take()
            bond = _parse_bond_expr(cur)
            child = _parse_chain(cur)
            cur.expect(")")
            node.branches.append((bond, child))
        elif c and c != ")":
            bond = _parse_bond_expr(cur)
            child = _parse_chain(cur)
            node.branches.append((bond, child))
            break
        else:
            break
    return atom


def _parse_atom(cur: _Cursor) -> PatternAtom:
    c = cur.peek()
    if c == "[":
        cur.take()
        test = _parse_atom_expr(cur, closing="]")
        cur.expect("]")
        return PatternAtom(test=test)
    if c == "*":
        cur.take()
        return PatternAtom(test=lambda mol, i: True)
    if c.isupper():
        sym = cur.take()
        if sym + cur.peek() in ("Cl", "Br", "Se", "Si", "As"):
            sym += cur.take()
        return PatternAtom(test=_element_test(sym, aromatic=False))
    if c in _AROMATIC_SYMBOLS:
        cur.take()
        return PatternAtom(test=_element_test(_AROMATIC_SYMBOLS[c], aromatic=True))
    raise SmartsParseError(f"expected atom at position {cur.pos} in {cur.text!r}")


def _element_test(symbol: str, aromatic: bool) -> AtomTest:
    def test(mol: Molecule, i: int) -> bool:
        a = mol.atoms[i]
        return a.element == symbol and a.aromatic == aromatic
    return test


def _parse_atom_expr(cur: _Cursor, closing: str) -> AtomTest:
    """`;`-separated AND over `,`-separated OR over juxtaposed primitives."""
    and_terms: list[AtomTest] = []
    while True:
        or_terms = [_parse_juxtaposed(cur, closing)]
        while cur.peek() == ",":
            cur.take()
            or_terms.append(_parse_juxtaposed(cur, closing))
        and_terms.append(_any_of(or_terms))
        if cur.peek() == ";":
            cur.take()
            continue
        if cur.peek() == closing:
            return _all_of(and_terms)
        raise SmartsParseError(f"unterminated atom expression in {cur.text!r}")


def _parse_juxtaposed(cur: _Cursor, closing: str) -> AtomTest:
    """One or more factors written back to back; an implicit AND."""
    terms = [_parse_atom_factor(cur)]
    while cur.peek() not in (";", ",", closing, ""):
        terms.append(_parse_atom_factor(cur))
    return _all_of(terms)


def _any_of(tests: list[AtomTest]) -> AtomTest:
    if len(tests) == 1:
        return tests[0]
    return lambda mol, i: any(t(mol, i) for t in tests)


def _all_of(tests: list[AtomTest]) -> AtomTest:
    if len(tests) == 1:
        return tests[0]
    return lambda mol, i: all(t(mol, i) for t in tests)


def _parse_atom_factor(cur: _Cursor) -> AtomTest:
    if cur.peek() == "!":
        cur.take()
        inner = _parse_atom_factor(cur)
        return lambda mol, i: not inner(mol, i)
    return _parse_atom_primitive(cur)


def _parse_atom_primitive(cur: _Cursor) -> AtomTest:
    c = cur.peek()
    if c == "$":
        cur.take()
        cur.expect("(")
        depth = 1
        start = cur.pos
        while depth:
            ch = cur.take()
            if ch == "":
                raise SmartsParseError(f"unterminated $(...) in {cur.text!r}")
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
        sub = parse(cur.text[start:cur.pos - 1])
        return lambda mol, i: sub.matches_at(mol, i)
    if c == "#":
        cur.take()
        digits = cur.take_digits()
        if not digits:
            raise SmartsParseError("'#' without atomic number")
        symbol = _SYMBOL_FOR_NUMBER.get(int(digits))
        if symbol is None:
            raise SmartsParseError(f"unsupported atomic number {digits}")
        return lambda mol, i: mol.atoms[i].element == symbol
    if c == "D":
        cur.take()
        digits = cur.take_digits()
        count = int(digits) if digits else 1
        return lambda mol, i: mol.degree(i) == count
    if c == "R":
        cur.take()
        if cur.peek().isdigit():
            raise SmartsParseError("ring-count R<n> is not supported")
        return lambda mol, i: mol.atoms[i].in_ring
    if c == "H":
        cur.take()
        digits = cur.take_digits()
        count = int(digits) if digits else 1
        return lambda mol, i: mol.atoms[i].total_hs == count
    if c and c in "+-":
        cur.take()
        digits = cur.take_digits()
        if digits:
            value = int(digits)
        else:
            value = 1
            while cur.peek() == c:
                cur.take()
                value += 1
        charge = value if c == "+" else -value
        return lambda mol, i: mol.atoms[i].charge == charge
    if c == "*":
        cur.take()
        return lambda mol, i: True
    if c.isupper():
        sym = cur.take()
        if sym + cur.peek() in ("Cl", "Br", "Se", "Si", "As"):
            sym += cur.take()
        return _element_test(sym, aromatic=False)
    if c in _AROMATIC_SYMBOLS:
        cur.take()
        return _element_test(_AROMATIC_SYMBOLS[c], aromatic=True)
    raise SmartsParseError(
        f"unsupported atom primitive {c!r} at position {cur.pos} in {cur.text!r}")


def _parse_bond_expr(cur: _Cursor) -> BondTest:
    """Bond logic with the same `;`/`,`/`!` connectors; empty = default."""
    and_terms: list[BondTest] = []
    while True:
        negate = False
        while cur.peek() == "!":
            cur.take()
            negate = not negate
        c = cur.peek()
        if c and c in _BOND_PRIMITIVES:
            cur.take()
            prim = _bond_primitive(c)
            if negate:
                inner = prim
                prim = lambda mol, b, _t=inner: not _t(mol, b)
            or_terms = [prim]
            while cur.peek() == ",":
                cur.take()
                or_terms.append(_parse_bond_factor(cur))
            and_terms.append(_bond_any(or_terms))
            if cur.peek() == ";":
                cur.take()
                continue
        elif negate:
            raise SmartsParseError(f"dangling '!' in bond expression of {cur.text!r}")
        break
    if not and_terms:
        return _default_bond
    if len(and_terms) == 1:
        return and_terms[0]
    return lambda mol, b: all(t(mol, b) for t in and_terms)


def _parse_bond_factor(cur: _Cursor) -> BondTest:
    negate = False
    while cur.peek() == "!":
        cur.take()
        negate = not negate
    c = cur.take()
    if not c or c not in _BOND_PRIMITIVES:
        raise SmartsParseError(f"expected bond primitive, got {c!r}")
    prim = _bond_primitive(c)
    if negate:
        inner = prim
        return lambda mol, b: not inner(mol, b)
    return prim


def _bond_any(tests: list[BondTest]) -> BondTest:
    if len(tests) == 1:
        return tests[0]
    return lambda mol, b: any(t(mol, b) for t in tests)


def _bond_primitive(c: str) -> BondTest:
    if c == "-":
        return lambda mol, b: b.order == 1 and not b.aromatic
    if c == "=":
        return lambda mol, b: b.order == 2
    if c == "#":
        return lambda mol, b: b.order == 3
    if c == ":":
        return lambda mol, b: b.aromatic
    if c == "~":
        return lambda mol, b: True
    if c == "@":
        return lambda mol, b: b.in_ring
    raise SmartsParseError(f"unknown bond primitive {c!r}")


def _default_bond(mol: Molecule, b: Bond) -> bool:
    return b.aromatic or (b.order == 1 and not b.aromatic)
