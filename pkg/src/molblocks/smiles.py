"""SMILES reading and writing.

The parser accepts a practical subset: organic-subset shorthand atoms,
bracket atoms with isotope/charge/hydrogen counts, branches, ring closures
(including ``%nn``), and aromatic lowercase notation.  Tetrahedral stereo
marks are parsed and stored but never emitted; directional bond marks are
read as plain single bonds.  Dot-separated component lists are rejected:
every input must be a single connected molecule.

The writer emits one deterministic SMILES for a given atom ranking; callers
wanting canonical output should rank atoms with :mod:`molblocks.canon`.
"""

from __future__ import annotations

import heapq
import re

from .mol import DEFAULT_BOND, Atom, Molecule, SanitizeError
from .periodic import (
    AROMATIC_ELEMENTS,
    DEFAULT_VALENCES,
    KNOWN_ELEMENTS,
    ORGANIC_SUBSET,
    WILDCARD,
)


class SmilesError(ValueError):
    """Raised on malformed SMILES input."""


_BRACKET_RE = re.compile(
    r"""\[
    (?P<isotope>\d+)?
    (?P<symbol>[A-Z][a-z]?|[a-z]{1,2}|\*)
    (?P<stereo>@@|@)?
    (?P<hcount>H\d*)?
    (?P<charge>\+\d+|-\d+|\++|-+)?
    (?::\d+)?
    \]""",
    re.VERBOSE,
)

_TWO_LETTER_ORGANIC = ("Cl", "Br")
_ONE_LETTER_ORGANIC = set("BCNOPSFI")
_AROMATIC_ORGANIC = set("bcnops")
_BOND_CHARS = {"-": 1, "=": 2, "#": 3, ":": DEFAULT_BOND, "/": 1, "\\": 1}


def _parse_bracket(token: re.Match) -> Atom:
    symbol = token.group("symbol")
    aromatic = False
    if symbol != WILDCARD and symbol[0].islower():
        aromatic = True
        symbol = symbol.capitalize()
        if symbol not in AROMATIC_ELEMENTS:
            raise SmilesError(f"element {symbol} cannot be aromatic")
    if symbol not in KNOWN_ELEMENTS:
        raise SmilesError(f"unknown element {symbol!r}")
    hcount = token.group("hcount")
    if hcount is None:
        hs = 0
    elif hcount == "H":
        hs = 1
    else:
        hs = int(hcount[1:])
    charge_str = token.group("charge")
    if charge_str is None:
        charge = 0
    elif charge_str[0] == "+" and charge_str.strip("+") == "":
        charge = len(charge_str)
    elif charge_str[0] == "-" and charge_str.strip("-") == "":
        charge = -len(charge_str)
    else:
        charge = int(charge_str)
    isotope = token.group("isotope")
    return Atom(
        element=symbol,
        charge=charge,
        isotope=int(isotope) if isotope is not None else None,
        aromatic=aromatic,
        explicit_hs=hs,
        stereo=token.group("stereo"),
    )


def parse_smiles(text: str) -> Molecule:
    """Parse one SMILES string into a sanitized molecule."""
    s = text.strip()
    if not s:
        raise SmilesError("empty SMILES")
    mol = Molecule()
    prev: int | None = None
    pending: int | None = None
    pending_aromatic = False
    branch_stack: list[int] = []
    # open ring closures: number -> (atom index, bond order or None, aromatic?)
    ring_open: dict[int, tuple[int, int | None, bool]] = {}
    i = 0
    n = len(s)

    def attach(idx: int) -> None:
        nonlocal prev, pending, pending_aromatic
        if prev is not None:
            order = pending if pending is not None else DEFAULT_BOND
            mol.add_bond(prev, idx, order, aromatic_requested=pending_aromatic)
        elif pending is not None:
            raise SmilesError(f"dangling bond symbol before position {i}")
        prev = idx
        pending = None
        pending_aromatic = False

    def close_ring(num: int) -> None:
        nonlocal pending, pending_aromatic
        if prev is None:
            raise SmilesError(f"ring closure {num} before any atom")
        if num in ring_open:
            other, other_order, other_arom = ring_open.pop(num)
            order = pending if pending is not None else other_order
            if (pending is not None and other_order is not None
                    and pending != other_order):
                raise SmilesError(f"conflicting bond orders on ring closure {num}")
            mol.add_bond(prev, other,
                         order if order is not None else DEFAULT_BOND,
                         aromatic_requested=pending_aromatic or other_arom)
        else:
            ring_open[num] = (prev, pending, pending_aromatic)
        pending = None
        pending_aromatic = False

    try:
        while i < n:
            c = s[i]
            if c in _BOND_CHARS:
                if pending is not None:
                    raise SmilesError(f"consecutive bond symbols at position {i}")
                pending = _BOND_CHARS[c]
                pending_aromatic = c == ":"
                i += 1
            elif c == "(":
                if prev is None:
                    raise SmilesError("branch before any atom")
                branch_stack.append(prev)
                i += 1
            elif c == ")":
                if not branch_stack:
                    raise SmilesError(f"unmatched ')' at position {i}")
                prev = branch_stack.pop()
                i += 1
            elif c.isdigit():
                close_ring(int(c))
                i += 1
            elif c == "%":
                m = re.match(r"%(\d{2})", s[i:])
                if not m:
                    raise SmilesError(f"malformed %nn ring closure at position {i}")
                close_ring(int(m.group(1)))
                i += 3
            elif c == "[":
                m = _BRACKET_RE.match(s, i)
                if not m:
                    raise SmilesError(f"malformed bracket atom at position {i}")
                attach(mol.add_atom(_parse_bracket(m)))
                i = m.end()
            elif c == ".":
                raise SmilesError("multi-component SMILES are not supported")
            elif s[i:i + 2] in _TWO_LETTER_ORGANIC:
                attach(mol.add_atom(Atom(element=s[i:i + 2])))
                i += 2
            elif c in _ONE_LETTER_ORGANIC:
                attach(mol.add_atom(Atom(element=c)))
                i += 1
            elif c in _AROMATIC_ORGANIC:
                attach(mol.add_atom(Atom(element=c.upper(), aromatic=True)))
                i += 1
            else:
                raise SmilesError(f"unexpected character {c!r} at position {i}")
    except SanitizeError as exc:
        raise SmilesError(str(exc)) from exc

    if pending is not None:
        raise SmilesError("trailing bond symbol")
    if branch_stack:
        raise SmilesError("unclosed branch")
    if ring_open:
        nums = ", ".join(str(k) for k in sorted(ring_open))
        raise SmilesError(f"unclosed ring closure(s): {nums}")
    try:
        return mol.sanitize()
    except SanitizeError as exc:
        raise SmilesError(str(exc)) from exc


# -- writing ---------------------------------------------------------------


def _inferred_hs(mol: Molecule, idx: int) -> int:
    """Hydrogens a reader would assign to this atom written bare."""
    atom = mol.atoms[idx]
    valences = DEFAULT_VALENCES.get(atom.element)
    if valences is None:
        return -1
    sigma = sum(b.order_value for _, b in mol.neighbors(idx))
    if atom.aromatic:
        return max(valences[0] - 1 - sigma, 0)
    for v in valences:
        if v >= sigma:
            return v - sigma
    return -1


def _atom_token(mol: Molecule, idx: int, mask_wildcard_isotopes: bool) -> str:
    atom = mol.atoms[idx]
    if atom.is_wildcard:
        if mask_wildcard_isotopes or atom.isotope is None:
            return "[*]"
        return f"[{atom.isotope}*]"
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_ok = (
        atom.element in ORGANIC_SUBSET
        and atom.charge == 0
        and atom.isotope is None
        and _inferred_hs(mol, idx) == atom.total_hs
    )
    if bare_ok:
        return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    hs = atom.total_hs
    if hs == 1:
        parts.append("H")
    elif hs > 1:
        parts.append(f"H{hs}")
    if atom.charge == 1:
        parts.append("+")
    elif atom.charge == -1:
        parts.append("-")
    elif atom.charge > 1:
        parts.append(f"+{atom.charge}")
    elif atom.charge < -1:
        parts.append(f"-{atom.charge}")
    parts.append("]")
    return "".join(parts)


def _bond_token(mol: Molecule, bond) -> str:
    if bond.aromatic:
        return ""
    if bond.order == 2:
        return "="
    if bond.order == 3:
        return "#"
    # Single bond between two aromatic atoms must be written explicitly,
    # otherwise a reader would treat it as aromatic.
    if mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic:
        return "-"
    return ""


def write_smiles(mol: Molecule, ranks: list[int],
                 mask_wildcard_isotopes: bool = False) -> str:
    """Serialize a sanitized molecule following the given atom ranking.

    Traversal starts at the rank-0 atom and always prefers the
    lowest-ranked unvisited neighbor; ring closure digits are allocated
    lowest-first and reused once closed.
    """
    n = mol.num_atoms
    if n == 0:
        raise ValueError("cannot write empty molecule")
    order = sorted(range(n), key=lambda i: ranks[i])
    start = order[0]

    visited = [False] * n
    visit_pos = [0] * n
    tree_children: list[list[int]] = [[] for _ in range(n)]
    closures: list[tuple[int, int]] = []  # (opening atom, closing atom)
    counter = 0

    def explore(idx: int, parent: int) -> None:
        nonlocal counter
        visited[idx] = True
        visit_pos[idx] = counter
        counter += 1
        for j, _ in sorted(mol.neighbors(idx), key=lambda t: ranks[t[0]]):
            if j == parent:
                continue
            if visited[j]:
                if visit_pos[j] < visit_pos[idx]:
                    closures.append((j, idx))
                continue
            tree_children[idx].append(j)
            explore(j, idx)

    explore(start, -1)

    # Digit bookkeeping: openings listed per atom in the order their
    # closures were discovered, so allocation is deterministic.
    opens_at: list[list[int]] = [[] for _ in range(n)]
    closes_at: list[list[int]] = [[] for _ in range(n)]
    for ci, (a, b) in enumerate(closures):
        opens_at[a].append(ci)
        closes_at[b].append(ci)
    digit_of: dict[int, int] = {}
    free_digits: list[int] = []
    next_digit = 1

    def take_digit() -> int:
        nonlocal next_digit
        if free_digits:
            return heapq.heappop(free_digits)
        d = next_digit
        next_digit += 1
        return d

    def fmt_digit(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def closure_token(ci: int) -> str:
        a, b = closures[ci]
        bond = mol.bond_between(a, b)
        assert bond is not None
        if ci in digit_of:
            d = digit_of.pop(ci)
            heapq.heappush(free_digits, d)
        else:
            d = take_digit()
            digit_of[ci] = d
        return _bond_token(mol, bond) + fmt_digit(d)

    def render(idx: int) -> str:
        parts = [_atom_token(mol, idx, mask_wildcard_isotopes)]
        for ci in closes_at[idx]:
            parts.append(closure_token(ci))
        for ci in opens_at[idx]:
            parts.append(closure_token(ci))
        children = tree_children[idx]
        for pos, child in enumerate(children):
            bond = mol.bond_between(idx, child)
            assert bond is not None
            piece = _bond_token(mol, bond) + render(child)
            parts.append(piece if pos == len(children) - 1 else f"({piece})")
        return "".join(parts)

    return render(start)
