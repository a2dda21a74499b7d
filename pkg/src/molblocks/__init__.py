"""molblocks: fragment tokenization, pocket hotspot mapping, screening."""

from .mol import Atom, Bond, Molecule, SanitizeError
from .smiles import SmilesError, parse_smiles
from .canon import canonical_ranks, canonical_smiles

__version__ = "1.0.0"

__all__ = [
    "Atom",
    "Bond",
    "Molecule",
    "SanitizeError",
    "SmilesError",
    "parse_smiles",
    "canonical_ranks",
    "canonical_smiles",
    "__version__",
]
