"""Distance kernels: JIT-compiled fast path with a pure-NumPy fallback.

Setting ``MOLBLOCKS_DISABLE_NUMBA=1`` (or any value other than ``0``)
forces the NumPy path; it is also taken automatically when numba is not
importable.  Both paths evaluate the same squared-distance expression in
the same order, so their outputs are bit-identical, which the test suite
asserts.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

NUMBA_AVAILABLE = njit is not None

# NumPy broadcasting over points x atoms is chunked to bound temporaries;
# chunking never reorders the per-element arithmetic.
_CHUNK = 256


def use_jit() -> bool:
    if not NUMBA_AVAILABLE:
        return False
    return os.environ.get("MOLBLOCKS_DISABLE_NUMBA", "0") == "0"


def _count_clear_py(points: np.ndarray, receptor: np.ndarray,
                    ligand: np.ndarray, rc2: float, lc2: float) -> int:
    total = 0
    for p in range(points.shape[0]):
        px, py, pz = points[p, 0], points[p, 1], points[p, 2]
        clear = True
        for r in range(receptor.shape[0]):
            dx = px - receptor[r, 0]
            dy = py - receptor[r, 1]
            dz = pz - receptor[r, 2]
            if dx * dx + dy * dy + dz * dz <= rc2:
                clear = False
                break
        if not clear:
            continue
        for q in range(ligand.shape[0]):
            dx = px - ligand[q, 0]
            dy = py - ligand[q, 1]
            dz = pz - ligand[q, 2]
            if dx * dx + dy * dy + dz * dz <= lc2:
                clear = False
                break
        if clear:
            total += 1
    return total


def _within_mask_py(center: np.ndarray, coords: np.ndarray,
                    cutoff2: float) -> np.ndarray:
    out = np.empty(coords.shape[0], dtype=np.bool_)
    cx, cy, cz = center[0], center[1], center[2]
    for i in range(coords.shape[0]):
        dx = cx - coords[i, 0]
        dy = cy - coords[i, 1]
        dz = cz - coords[i, 2]
        out[i] = dx * dx + dy * dy + dz * dz <= cutoff2
    return out


if NUMBA_AVAILABLE:
    _count_clear_jit = njit(cache=False)(_count_clear_py)
    _within_mask_jit = njit(cache=False)(_within_mask_py)


def _count_clear_np(points: np.ndarray, receptor: np.ndarray,
                    ligand: np.ndarray, rc2: float, lc2: float) -> int:
    total = 0
    for start in range(0, points.shape[0], _CHUNK):
        block = points[start:start + _CHUNK]
        keep = np.ones(block.shape[0], dtype=np.bool_)
        for coords, cutoff2 in ((receptor, rc2), (ligand, lc2)):
            if coords.shape[0] == 0:
                continue
            delta = block[:, None, :] - coords[None, :, :]
            dist2 = (delta * delta).sum(axis=2)
            keep &= (dist2 > cutoff2).all(axis=1)
        total += int(np.count_nonzero(keep))
    return total


def _within_mask_np(center: np.ndarray, coords: np.ndarray,
                    cutoff2: float) -> np.ndarray:
    delta = center[None, :] - coords
    dist2 = (delta * delta).sum(axis=1)
    return dist2 <= cutoff2


def count_clear_points(points: np.ndarray, receptor: np.ndarray,
                       ligand: np.ndarray, rc2: float, lc2: float) -> int:
    """Grid points farther than the clearances from every listed atom."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    receptor = np.ascontiguousarray(receptor, dtype=np.float64).reshape(-1, 3)
    ligand = np.ascontiguousarray(ligand, dtype=np.float64).reshape(-1, 3)
    if use_jit():
        return int(_count_clear_jit(points, receptor, ligand,
                                    float(rc2), float(lc2)))
    return _count_clear_np(points, receptor, ligand, float(rc2), float(lc2))


def within_mask(center: np.ndarray, coords: np.ndarray,
                cutoff2: float) -> np.ndarray:
    """Boolean mask of atoms within the inclusive squared cutoff."""
    center = np.ascontiguousarray(center, dtype=np.float64)
    coords = np.ascontiguousarray(coords, dtype=np.float64).reshape(-1, 3)
    if coords.shape[0] == 0:
        return np.zeros(0, dtype=np.bool_)
    if use_jit():
        return _within_mask_jit(center, coords, float(cutoff2))
    return _within_mask_np(center, coords, float(cutoff2))
