"""Handcrafted walkable meshes for scenarios, demos, and tests.

Two families: plain rectangles triangulated as two triangles (cheap, convex,
used by scenario grounds) and unit-cell grid meshes for rectilinear shapes
(corridors, L/U/H plans, rings) where every cell contributes two triangles
and seams share vertices so adjacency is watertight.
"""

from __future__ import annotations

from .navmesh import NavMesh, build_navmesh


def rect_mesh(x0: float, z0: float, x1: float, z1: float, y: float = 0.0) -> NavMesh:
    """Axis-aligned rectangle as two triangles."""
    verts = [(x0, y, z0), (x1, y, z0), (x1, y, z1), (x0, y, z1)]
    tris = [(0, 1, 2), (0, 2, 3)]
    return build_navmesh(verts, tris)


def grid_mesh(
    cells: set[tuple[int, int]], cell: float = 1.0, y: float = 0.0
) -> NavMesh:
    """Mesh from unit cells at integer coordinates, two triangles per cell."""
    verts: list[tuple[float, float, float]] = []
    index: dict[tuple[int, int], int] = {}

    def vid(ix: int, iz: int) -> int:
        key = (ix, iz)
        if key not in index:
            index[key] = len(verts)
            verts.append((ix * cell, y, iz * cell))
        return index[key]

    tris: list[tuple[int, int, int]] = []
    for ix, iz in sorted(cells):
        v00 = vid(ix, iz)
        v10 = vid(ix + 1, iz)
        v01 = vid(ix, iz + 1)
        v11 = vid(ix + 1, iz + 1)
        tris.append((v00, v10, v11))
        tris.append((v00, v11, v01))
    return build_navmesh(verts, tris)


def corridor_mesh(length: float, width: float = 2.0) -> NavMesh:
    """Straight corridor along +Z starting at the origin."""
    return rect_mesh(-width / 2.0, 0.0, width / 2.0, length)


def quad_strip(cells_long: int) -> NavMesh:
    """1 m wide strip of unit cells along +X (two triangles per cell)."""
    return grid_mesh({(i, 0) for i in range(cells_long)})


def convex_mesh() -> NavMesh:
    """10 x 6 m convex rectangle on unit cells."""
    return grid_mesh({(i, j) for i in range(10) for j in range(6)})


def l_mesh() -> NavMesh:
    """L-shaped corridor, arms 10 m long and 2 m wide."""
    cells = {(i, j) for i in range(10) for j in range(2)}
    cells |= {(i, j) for i in range(8, 10) for j in range(2, 10)}
    return grid_mesh(cells)


def u_mesh() -> NavMesh:
    """U-shaped corridor: two 10 m uprights joined by a bottom bar."""
    cells = {(i, j) for i in range(2) for j in range(10)}
    cells |= {(i, j) for i in range(8, 10) for j in range(10)}
    cells |= {(i, j) for i in range(2, 8) for j in range(2)}
    return grid_mesh(cells)


def h_mesh() -> NavMesh:
    """H-shaped plan: two uprights with a middle crossbar."""
    cells = {(i, j) for i in range(2) for j in range(10)}
    cells |= {(i, j) for i in range(8, 10) for j in range(10)}
    cells |= {(i, j) for i in range(2, 8) for j in range(4, 6)}
    return grid_mesh(cells)


def ring_mesh() -> NavMesh:
    """Square annulus: 12 x 12 m outside, 8 x 8 m hole."""
    cells = {
        (i, j)
        for i in range(12)
        for j in range(12)
        if not (2 <= i < 10 and 2 <= j < 10)
    }
    return grid_mesh(cells)


def handcrafted_test_set() -> dict[str, NavMesh]:
    """The named mesh set used by the pathfinding oracle checks."""
    return {
        "convex": convex_mesh(),
        "l": l_mesh(),
        "u": u_mesh(),
        "h": h_mesh(),
        "ring": ring_mesh(),
    }
