"""Butina clustering with deterministic centroid selection."""

from __future__ import annotations

from dataclasses import dataclass

from .fingerprints import (
    DEFAULT_BITS,
    DEFAULT_RADIUS,
    circular_fingerprint,
    tanimoto,
)
from .mol import Molecule

DEFAULT_DISTANCE_CUTOFF = 0.7


@dataclass(frozen=True)
class Cluster:
    """One cluster over input indices; the representative is its centroid."""

    representative: int
    members: tuple[int, ...]


def butina_cluster(mols: list[Molecule],
                   distance_cutoff: float = DEFAULT_DISTANCE_CUTOFF,
                   *,
                   radius: int = DEFAULT_RADIUS,
                   bits: int = DEFAULT_BITS) -> list[Cluster]:
    """Greedy sphere exclusion over Tanimoto distance.

    Neighbor lists use strict distance < cutoff. The unassigned molecule
    with the most unassigned neighbors becomes the next centroid (ties go
    to the lower input index) and absorbs those neighbors. Clusters come
    back in formation order; members are ascending input indices.
    """
    if not mols:
        raise ValueError("no molecules to cluster")
    if not 0.0 < distance_cutoff <= 1.0:
        raise ValueError("distance cutoff must lie in (0, 1]")
    fps = [circular_fingerprint(m, radius=radius, bits=bits) for m in mols]
    n = len(fps)
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if 1.0 - tanimoto(fps[i], fps[j]) < distance_cutoff:
                neighbors[i].append(j)
                neighbors[j].append(i)
    unassigned = [True] * n
    remaining = n
    clusters: list[Cluster] = []
    while remaining:
        best = -1
        best_count = -1
        for i in range(n):
            if not unassigned[i]:
                continue
            count = sum(1 for j in neighbors[i] if unassigned[j])
            if count > best_count:
                best, best_count = i, count
        members = [best] + [j for j in neighbors[best] if unassigned[j]]
        for j in members:
            unassigned[j] = False
        remaining -= len(members)
        clusters.append(Cluster(representative=best,
                                members=tuple(sorted(members))))
    return clusters
