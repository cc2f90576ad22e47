"""Normal forms of lattice point sets and one-vertex moves for the search.

The symmetry group used is generated by lattice translations, rotation by
pi/3 (multiplication by w1) and the reflection swapping 1 <-> w1*w3 and
w1 <-> w3.  On Moser coefficients both act as the integer matrices below.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .field import Coeffs, MoserPoint, UNIT_STEPS, is_unit_distance, mul_conj_omega1, mul_omega1

Canon = tuple[MoserPoint, ...]

ROT = np.array([[0, -1, 0, 0],
                [1, 1, 0, 0],
                [0, 0, 0, -1],
                [0, 0, 1, 1]], dtype=np.int64)

REFL = np.array([[0, 0, 0, 1],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [1, 0, 0, 0]], dtype=np.int64)


def _group() -> list[np.ndarray]:
    out = []
    for base in (np.eye(4, dtype=np.int64), REFL):
        m = base
        for _ in range(6):
            out.append(m)
            m = ROT @ m
    return out


#: Rot^i and Rot^i Refl for i = 0..5
TRANSFORMS: list[np.ndarray] = _group()


def apply(T: np.ndarray, p: Coeffs) -> MoserPoint:
    return MoserPoint(*(int(v) for v in T @ np.asarray(p, dtype=np.int64)))


_STACK = np.stack(TRANSFORMS)  # (12, 4, 4)


def canonize(X: Iterable[Coeffs]) -> Canon:
    """Lexicographically least of the 12 transformed copies, each shifted so
    every coefficient column has minimum 0.  Returned as a sorted tuple."""
    rows = [tuple(p) for p in X]
    if not rows:
        raise ValueError("cannot canonize an empty point set")
    if len(set(rows)) != len(rows):
        raise ValueError("point set has duplicates")
    pts = np.array(rows, dtype=np.int64)
    imgs = np.einsum("tij,nj->tni", _STACK, pts)
    imgs -= imgs.min(axis=1, keepdims=True)
    best = None
    for img in imgs:
        # rows in lexicographic order: lexsort keys go last-column-first
        key = img[np.lexsort(img.T[::-1])].ravel().tolist()
        if best is None or key < best:
            best = key
    return tuple(MoserPoint(*best[k:k + 4]) for k in range(0, len(best), 4))


def is_canonical(X: Iterable[Coeffs]) -> bool:
    pts = tuple(sorted(MoserPoint(*p) for p in X))
    return canonize(pts) == pts


def extension_points(X: Iterable[Coeffs]) -> set[MoserPoint]:
    """New points x admissible for a child of X.

    (a) x is a unit lattice step from a vertex, (b) x completes a unit
    equilateral triangle on an edge, (c) x completes a unit rhombus on a
    vertex and two of its neighbours.
    """
    pts = [MoserPoint(*p) for p in X]
    present = set(pts)
    out: set[MoserPoint] = set()
    for p in pts:
        for s in UNIT_STEPS:
            out.add(p + s)
    nbrs: dict[MoserPoint, list[MoserPoint]] = {p: [] for p in pts}
    for p, q in combinations(pts, 2):
        if is_unit_distance(p, q):
            nbrs[p].append(q)
            nbrs[q].append(p)
            d = q - p
            out.add(p + mul_omega1(d))
            out.add(p + mul_conj_omega1(d))
    for k, adj in nbrs.items():
        for i, j in combinations(adj, 2):
            x = i + j - k
            # sides k-i, k-j are unit, and x - i = j - k, x - j = i - k
            if is_unit_distance(x, i) and is_unit_distance(x, j):
                out.add(x)
    return out - present


def children(X: Iterable[Coeffs]) -> set[Canon]:
    pts = [MoserPoint(*p) for p in X]
    if not pts:
        raise ValueError("children of an empty set")
    return {canonize(pts + [x]) for x in extension_points(pts)}


def children_with_points(X: Iterable[Coeffs]) -> dict[Canon, MoserPoint]:
    """Like :func:`children`, remembering one added point per child."""
    pts = [MoserPoint(*p) for p in X]
    out: dict[Canon, MoserPoint] = {}
    for x in sorted(extension_points(pts)):
        out.setdefault(canonize(pts + [x]), x)
    return out


def parents(X: Iterable[Coeffs]) -> set[Canon]:
    pts = [MoserPoint(*p) for p in X]
    if len(pts) <= 1:
        raise ValueError("parents need at least two vertices")
    return {canonize(pts[:i] + pts[i + 1:]) for i in range(len(pts))}
