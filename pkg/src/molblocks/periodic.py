"""Element tables: atomic masses, valence models, organic subset membership.

Masses are 2021 IUPAC standard atomic weights, abridged to three decimals.
The wildcard pseudo-element ``*`` is massless and exempt from valence rules.
"""

from __future__ import annotations

WILDCARD = "*"

ATOMIC_MASSES: dict[str, float] = {
    "H": 1.008,
    "He": 4.003,
    "Li": 6.94,
    "Be": 9.012,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "Ne": 20.180,
    "Na": 22.990,
    "Mg": 24.305,
    "Al": 26.982,
    "Si": 28.085,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.45,
    "Ar": 39.95,
    "K": 39.098,
    "Ca": 40.078,
    "Fe": 55.845,
    "Co": 58.933,
    "Ni": 58.693,
    "Cu": 63.546,
    "Zn": 65.38,
    "As": 74.922,
    "Se": 78.971,
    "Br": 79.904,
    "I": 126.904,
    WILDCARD: 0.0,
}

# Default valence sets used to infer hydrogen counts on bare organic-subset
# atoms.  Multiple entries mean hypervalent states are tolerated (N, P, S).
DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "Si": (4,),
    "Se": (2, 4, 6),
    "As": (3, 5),
}

# Valence sets for charged atoms, keyed by (symbol, formal charge).  Pairs
# not listed here skip validation rather than fail it.
CHARGED_VALENCES: dict[tuple[str, int], tuple[int, ...]] = {
    ("C", 1): (3,),
    ("C", -1): (3,),
    ("N", 1): (4,),
    ("N", -1): (2,),
    ("O", 1): (3,),
    ("O", -1): (1,),
    ("S", 1): (3, 5),
    ("S", -1): (1,),
    ("P", 1): (4,),
    ("B", -1): (4,),
    ("F", -1): (0,),
    ("Cl", -1): (0,),
    ("Br", -1): (0,),
    ("I", -1): (0,),
}

KNOWN_ELEMENTS = frozenset(ATOMIC_MASSES)

# Elements writable without brackets when neutral, isotope-free, and carrying
# the default hydrogen count.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Elements that may carry the aromatic flag (lowercase SMILES symbols).
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})


def mass_of(symbol: str) -> float:
    try:
        return ATOMIC_MASSES[symbol]
    except KeyError:
        raise ValueError(f"no atomic mass tabulated for element {symbol!r}") from None


def allowed_valences(symbol: str, charge: int) -> tuple[int, ...] | None:
    """Valence set for an atom, or None when no rule applies."""
    if symbol == WILDCARD:
        return None
    if charge == 0:
        return DEFAULT_VALENCES.get(symbol)
    return CHARGED_VALENCES.get((symbol, charge))
