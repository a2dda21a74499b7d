"""Molecular graph container: atoms, bonds, rings, aromaticity, valence.

A :class:`Molecule` is built incrementally (usually by the SMILES parser),
then :meth:`Molecule.sanitize` validates it and freezes it.  Sanitization
performs ring perception, an electron-counting aromatization pass over
five- to seven-membered rings, implicit hydrogen assignment, and valence
checking.  Frozen molecules are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .periodic import (
    AROMATIC_ELEMENTS,
    DEFAULT_VALENCES,
    WILDCARD,
    allowed_valences,
)

# Sentinel order for bonds written without an explicit symbol; resolved to
# single or aromatic during sanitization.
DEFAULT_BOND = 0

_ORDER_FOR_SYMBOL = {"-": 1, "=": 2, "#": 3, ":": DEFAULT_BOND}


class SanitizeError(ValueError):
    """Raised when a molecular graph fails chemical validation."""


@dataclass(slots=True)
class Atom:
    element: str
    charge: int = 0
    isotope: int | None = None
    aromatic: bool = False
    explicit_hs: int | None = None
    stereo: str | None = None
    implicit_hs: int = 0
    in_ring: bool = False

    @property
    def total_hs(self) -> int:
        if self.explicit_hs is not None:
            return self.explicit_hs
        return self.implicit_hs

    @property
    def is_wildcard(self) -> bool:
        return self.element == WILDCARD

    def clone(self) -> "Atom":
        return Atom(
            element=self.element,
            charge=self.charge,
            isotope=self.isotope,
            aromatic=self.aromatic,
            explicit_hs=self.explicit_hs,
            stereo=self.stereo,
            implicit_hs=self.implicit_hs,
            in_ring=self.in_ring,
        )


@dataclass(slots=True)
class Bond:
    a: int
    b: int
    order: int = DEFAULT_BOND
    aromatic: bool = False
    aromatic_requested: bool = False
    in_ring: bool = False

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    @property
    def order_value(self) -> int:
        """Integer order with aromatic bonds counted as one."""
        return 1 if self.aromatic else max(self.order, 1)

    def clone(self) -> "Bond":
        return Bond(
            a=self.a,
            b=self.b,
            order=self.order,
            aromatic=self.aromatic,
            aromatic_requested=self.aromatic_requested,
            in_ring=self.in_ring,
        )


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    _adj: list[list[int]] = field(default_factory=list)
    _frozen: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    def add_atom(self, atom: Atom) -> int:
        self._check_mutable()
        self.atoms.append(atom)
        self._adj.append([])
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: int = DEFAULT_BOND,
                 aromatic_requested: bool = False) -> int:
        self._check_mutable()
        if a == b:
            raise SanitizeError("self-bond")
        if not (0 <= a < len(self.atoms) and 0 <= b < len(self.atoms)):
            raise SanitizeError("bond references missing atom")
        if self.bond_between(a, b) is not None:
            raise SanitizeError(f"duplicate bond between atoms {a} and {b}")
        bond = Bond(a=a, b=b, order=order, aromatic_requested=aromatic_requested)
        self.bonds.append(bond)
        idx = len(self.bonds) - 1
        self._adj[a].append(idx)
        self._adj[b].append(idx)
        return idx

    def add_inherited_bond(self, a: int, b: int, template: Bond) -> int:
        """Add a bond copying order and ring/aromatic flags from a template.

        Used when carving fragments out of a sanitized molecule, where the
        perception results are inherited rather than recomputed.
        """
        self._check_mutable()
        bond = template.clone()
        bond.a, bond.b = a, b
        bond.aromatic_requested = False
        self.bonds.append(bond)
        idx = len(self.bonds) - 1
        self._adj[a].append(idx)
        self._adj[b].append(idx)
        return idx

    def freeze_inherited(self) -> "Molecule":
        """Freeze without running perception passes.

        Only valid when every atom and bond was copied from an already
        sanitized molecule (ring membership, aromaticity and hydrogen
        counts inherited), plus wildcard attachment points, so repeating
        sanitization could not change anything.
        """
        self._frozen = True
        return self

    def _check_mutable(self) -> None:
        if self._frozen:
            raise RuntimeError("molecule is frozen; copy() before editing")

    def copy(self) -> "Molecule":
        """Mutable deep copy, sanitization state discarded."""
        out = Molecule()
        out.atoms = [a.clone() for a in self.atoms]
        out.bonds = [b.clone() for b in self.bonds]
        out._adj = [list(entry) for entry in self._adj]
        return out

    # -- queries -----------------------------------------------------------

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def degree(self, idx: int) -> int:
        return len(self._adj[idx])

    def neighbors(self, idx: int):
        """Yield (neighbor index, bond) pairs."""
        for bi in self._adj[idx]:
            bond = self.bonds[bi]
            yield bond.other(idx), bond

    def bond_indices_of(self, idx: int) -> list[int]:
        return self._adj[idx]

    def bond_between(self, a: int, b: int) -> Bond | None:
        for bi in self._adj[a]:
            bond = self.bonds[bi]
            if bond.other(a) == b:
                return bond
        return None

    def heavy_degree(self, idx: int) -> int:
        return sum(1 for j, _ in self.neighbors(idx) if not self.atoms[j].is_wildcard)

    def to_smiles(self, mask_wildcard_isotopes: bool = False) -> str:
        """Canonical SMILES; requires a sanitized molecule."""
        from .canon import canonical_smiles

        if not self._frozen:
            raise RuntimeError("sanitize() before serializing")
        return canonical_smiles(self, mask_wildcard_isotopes)

    # -- sanitization ------------------------------------------------------

    def sanitize(self) -> "Molecule":
        if self._frozen:
            return self
        if not self.atoms:
            raise SanitizeError("empty molecule")
        self._check_connected()
        self._perceive_rings()
        cycles = self._simple_cycles(5, 7)
        self._aromatize(cycles)
        self._resolve_default_bonds()
        self._assign_implicit_hydrogens()
        self._validate_aromatic_flags()
        self._validate_valences()
        self._frozen = True
        return self

    def _check_connected(self) -> None:
        seen = {0}
        stack = [0]
        while stack:
            cur = stack.pop()
            for j, _ in self.neighbors(cur):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != len(self.atoms):
            raise SanitizeError("disconnected molecular graph")

    def _perceive_rings(self) -> None:
        """Mark ring bonds (non-bridges) and their endpoint atoms."""
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges: set[int] = set()
        timer = 0
        for root in range(n):
            if disc[root] != -1:
                continue
            # iterative DFS; entries are (atom, incoming bond index, neighbor cursor)
            stack = [(root, -1, iter(self._adj[root]))]
            disc[root] = low[root] = timer
            timer += 1
            while stack:
                cur, in_bond, it = stack[-1]
                advanced = False
                for bi in it:
                    if bi == in_bond:
                        continue
                    nxt = self.bonds[bi].other(cur)
                    if disc[nxt] == -1:
                        disc[nxt] = low[nxt] = timer
                        timer += 1
                        stack.append((nxt, bi, iter(self._adj[nxt])))
                        advanced = True
                        break
                    low[cur] = min(low[cur], disc[nxt])
                if not advanced:
                    stack.pop()
                    if stack:
                        parent = stack[-1][0]
                        low[parent] = min(low[parent], low[cur])
                        if low[cur] > disc[parent]:
                            bridges.add(in_bond)
        # Every non-bridge edge of a connected graph lies on a cycle.
        for bi, bond in enumerate(self.bonds):
            bond.in_ring = bi not in bridges
            if bond.in_ring:
                self.atoms[bond.a].in_ring = True
                self.atoms[bond.b].in_ring = True

    def _simple_cycles(self, min_size: int, max_size: int) -> list[tuple[int, ...]]:
        """Simple cycles with min_size..max_size atoms, one tuple each."""
        ring_adj: list[list[int]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            if bond.in_ring:
                ring_adj[bond.a].append(bond.b)
                ring_adj[bond.b].append(bond.a)
        found: dict[frozenset[int], tuple[int, ...]] = {}
        for start in range(len(self.atoms)):
            if not ring_adj[start]:
                continue
            path = [start]
            on_path = {start}

            def extend() -> None:
                cur = path[-1]
                for nxt in ring_adj[cur]:
                    if nxt == start and len(path) >= min_size:
                        key = frozenset(path)
                        if key not in found:
                            found[key] = tuple(path)
                    if nxt <= start or nxt in on_path or len(path) >= max_size:
                        continue
                    path.append(nxt)
                    on_path.add(nxt)
                    extend()
                    path.pop()
                    on_path.remove(nxt)

            extend()
        return list(found.values())

    # -- aromatization -----------------------------------------------------

    def _estimated_hs(self, idx: int) -> int:
        """Hydrogen count estimate usable before implicit assignment."""
        atom = self.atoms[idx]
        if atom.explicit_hs is not None:
            return atom.explicit_hs
        if atom.is_wildcard:
            return 0
        valences = DEFAULT_VALENCES.get(atom.element)
        if valences is None:
            return 0
        if atom.aromatic:
            return max(valences[0] - 1 - self.degree(idx), 0)
        bsum = sum(max(b.order, 1) for _, b in self.neighbors(idx))
        for v in valences:
            if v >= bsum:
                return v - bsum
        return 0

    def _pi_contribution(self, idx: int) -> int | None:
        """Electrons an atom donates to a candidate aromatic ring.

        None means the atom cannot sit in an aromatic ring at all.
        """
        atom = self.atoms[idx]
        elem = atom.element
        if elem not in AROMATIC_ELEMENTS:
            return None
        ring_double = exo_double = False
        for j, bond in self.neighbors(idx):
            if bond.order == 3:
                return None
            if bond.order == 2:
                if self.atoms[j].in_ring:
                    ring_double = True
                else:
                    exo_double = True
        charge = atom.charge
        if elem == "C":
            if ring_double:
                return 1
            if exo_double:
                return 0
            if charge == -1:
                return 2
            if charge == 1:
                return 0
            return 1 if atom.aromatic else None
        if elem in ("N", "P", "As"):
            if ring_double or exo_double:
                return 1
            conn = self.degree(idx) + self._estimated_hs(idx)
            if charge == 1:
                return 1 if conn == 3 else None
            if charge == -1:
                return 2 if conn == 2 else None
            if conn == 3:
                return 2
            if conn == 2:
                # Lone pair stays in plane; only valid for pre-flagged input.
                return 1 if atom.aromatic else None
            return None
        if elem in ("O", "S", "Se"):
            if ring_double or exo_double:
                return None if charge == 0 else 1
            return 1 if charge == 1 else 2
        if elem == "B":
            return 0
        return None

    def _aromatize(self, cycles: list[tuple[int, ...]]) -> None:
        for cycle in cycles:
            total = 0
            ok = True
            for idx in cycle:
                pi = self._pi_contribution(idx)
                if pi is None:
                    ok = False
                    break
                total += pi
            if not ok or total != 6:
                continue
            for pos, idx in enumerate(cycle):
                atom = self.atoms[idx]
                if not atom.aromatic and atom.explicit_hs is None:
                    # Pin hydrogens counted from the original bond orders so
                    # aromatization cannot silently drop one (pyrrole N-H).
                    atom.explicit_hs = self._estimated_hs(idx)
                atom.aromatic = True
                nxt = cycle[(pos + 1) % len(cycle)]
                bond = self.bond_between(idx, nxt)
                assert bond is not None
                bond.aromatic = True
        for bond in self.bonds:
            if bond.aromatic:
                bond.order = 1

    def _resolve_default_bonds(self) -> None:
        for bond in self.bonds:
            if bond.order == DEFAULT_BOND:
                bond.order = 1

    def _assign_implicit_hydrogens(self) -> None:
        for idx, atom in enumerate(self.atoms):
            if atom.explicit_hs is not None or atom.is_wildcard:
                atom.implicit_hs = 0
                continue
            valences = DEFAULT_VALENCES.get(atom.element)
            if valences is None:
                atom.implicit_hs = 0
                continue
            if atom.aromatic:
                sigma = sum(b.order_value for _, b in self.neighbors(idx))
                atom.implicit_hs = max(valences[0] - 1 - sigma, 0)
                continue
            bsum = sum(b.order_value for _, b in self.neighbors(idx))
            for v in valences:
                if v >= bsum:
                    atom.implicit_hs = v - bsum
                    break
            else:
                raise SanitizeError(
                    f"bond order sum {bsum} exceeds valence of {atom.element}")
            atom.implicit_hs = max(atom.implicit_hs, 0)

    def _validate_aromatic_flags(self) -> None:
        in_aromatic_ring = [False] * len(self.atoms)
        for bond in self.bonds:
            if bond.aromatic:
                in_aromatic_ring[bond.a] = True
                in_aromatic_ring[bond.b] = True
        for idx, atom in enumerate(self.atoms):
            if atom.aromatic and not in_aromatic_ring[idx]:
                raise SanitizeError(
                    f"atom {idx} flagged aromatic but no aromatic ring found")
        for bond in self.bonds:
            if bond.aromatic_requested and not bond.aromatic:
                raise SanitizeError("explicit aromatic bond outside aromatic ring")

    def _validate_valences(self) -> None:
        for idx, atom in enumerate(self.atoms):
            allowed = allowed_valences(atom.element, atom.charge)
            if allowed is None:
                continue
            s = sum(b.order_value for _, b in self.neighbors(idx)) + atom.total_hs
            if atom.aromatic:
                if not any(s == v or s == v - 1 for v in allowed):
                    raise SanitizeError(
                        f"aromatic atom {idx} ({atom.element}) has invalid "
                        f"valence sum {s}")
            elif s > max(allowed):
                raise SanitizeError(
                    f"atom {idx} ({atom.element}, charge {atom.charge:+d}) has "
                    f"valence sum {s} above maximum {max(allowed)}")
