"""Walkable triangle meshes, point location, projection, and pathfinding.

A NavMesh is immutable once built and safe to share across sessions. Paths
are found with A* over triangle adjacency (costs between shared-edge
midpoints) followed by a funnel pass that pulls the corridor into a taut
waypoint polyline. All tie-breaks use the lowest triangle index so that
identical inputs produce bit-identical paths.

Pathfinding cost uses XZ distance only; vertex heights are carried through
to waypoints but never influence the route.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

from .geometry import Vec3, cross2, dist3, dist_xz

_EPS_AREA = 1e-12
_EPS_CONTAIN = 1e-9


class NavMeshError(Exception):
    """Base class for mesh construction and query failures."""


class DegenerateTriangle(NavMeshError):
    pass


class InvalidIndex(NavMeshError):
    pass


class NonManifoldEdge(NavMeshError):
    pass


class NoPath(NavMeshError):
    pass


class OffMesh(NavMeshError):
    pass


class MeshFormatError(NavMeshError):
    pass


@dataclass(frozen=True)
class NavMesh:
    """Triangulated walkable surface with symmetric edge adjacency."""

    vertices: tuple[Vec3, ...]
    triangles: tuple[tuple[int, int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Path:
    """Result of find_path: triangle corridor plus taut waypoints."""

    corridor: tuple[int, ...]
    waypoints: tuple[Vec3, ...]
    total_length: float

    @property
    def goal(self) -> Vec3:
        return self.waypoints[-1]


def _signed_area_xz(a: Vec3, b: Vec3, c: Vec3) -> float:
    # Y component of cross(b - a, c - a); sign encodes winding in XZ.
    return (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2])


def build_navmesh(
    vertices: list[Vec3] | tuple[Vec3, ...],
    triangles: list[tuple[int, int, int]] | tuple[tuple[int, int, int], ...],
) -> NavMesh:
    """Validate geometry, normalize winding to +Y normals, compute adjacency.

    Raises InvalidIndex, DegenerateTriangle, or NonManifoldEdge. Triangles
    wound the wrong way are flipped rather than rejected so the walkable
    orientation invariant always holds on the result.
    """
    verts = tuple((float(v[0]), float(v[1]), float(v[2])) for v in vertices)
    if not triangles:
        raise InvalidIndex("mesh needs at least one triangle")

    fixed: list[tuple[int, int, int]] = []
    for t, tri in enumerate(triangles):
        i, j, k = (int(tri[0]), int(tri[1]), int(tri[2]))
        for idx in (i, j, k):
            if idx < 0 or idx >= len(verts):
                raise InvalidIndex(f"triangle {t} references vertex {idx}")
        if i == j or j == k or i == k:
            raise InvalidIndex(f"triangle {t} repeats a vertex index")
        area = _signed_area_xz(verts[i], verts[j], verts[k])
        if abs(area) < _EPS_AREA:
            raise DegenerateTriangle(f"triangle {t} has zero walkable area")
        if area < 0.0:
            j, k = k, j
        fixed.append((i, j, k))

    edge_owners: dict[tuple[int, int], list[int]] = {}
    for t, (i, j, k) in enumerate(fixed):
        for a, b in ((i, j), (j, k), (k, i)):
            key = (a, b) if a < b else (b, a)
            owners = edge_owners.setdefault(key, [])
            owners.append(t)
            if len(owners) > 2:
                raise NonManifoldEdge(f"edge {key} shared by {len(owners)} triangles")

    adjacency: list[tuple[int, ...]] = []
    for t, (i, j, k) in enumerate(fixed):
        neighbors = []
        for a, b in ((i, j), (j, k), (k, i)):
            key = (a, b) if a < b else (b, a)
            for other in edge_owners[key]:
                if other != t:
                    neighbors.append(other)
        adjacency.append(tuple(neighbors))

    return NavMesh(vertices=verts, triangles=tuple(fixed), adjacency=tuple(adjacency))


def _contains_xz(mesh: NavMesh, tri: int, x: float, z: float) -> bool:
    i, j, k = mesh.triangles[tri]
    a, b, c = mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]
    # After winding normalization the interior lies on the non-positive side
    # of every directed edge; the epsilon keeps shared edges inclusive.
    for p, q in ((a, b), (b, c), (c, a)):
        if cross2((q[0] - p[0], q[2] - p[2]), (x - p[0], z - p[2])) > _EPS_CONTAIN:
            return False
    return True


def locate(mesh: NavMesh, p: Vec3) -> int | None:
    """Index of the triangle whose XZ projection contains p, or None.

    Points on shared edges resolve to the lowest triangle index.
    """
    x, z = p[0], p[2]
    for t in range(len(mesh.triangles)):
        if _contains_xz(mesh, t, x, z):
            return t
    return None


def _surface_height(mesh: NavMesh, tri: int, x: float, z: float) -> float:
    i, j, k = mesh.triangles[tri]
    a, b, c = mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]
    denom = _signed_area_xz(a, b, c)
    # Barycentric interpolation of vertex heights at (x, z).
    wa = ((b[2] - z) * (c[0] - x) - (b[0] - x) * (c[2] - z)) / denom
    wb = ((c[2] - z) * (a[0] - x) - (c[0] - x) * (a[2] - z)) / denom
    wc = 1.0 - wa - wb
    return wa * a[1] + wb * b[1] + wc * c[1]


def _closest_on_segment_xz(
    a: Vec3, b: Vec3, x: float, z: float
) -> tuple[float, float, float]:
    ax, az = a[0], a[2]
    dx, dz = b[0] - ax, b[2] - az
    den = dx * dx + dz * dz
    t = 0.0 if den == 0.0 else ((x - ax) * dx + (z - az) * dz) / den
    t = min(1.0, max(0.0, t))
    cx, cz = ax + dx * t, az + dz * t
    d2 = (x - cx) * (x - cx) + (z - cz) * (z - cz)
    return d2, cx, cz


def project_to_mesh(mesh: NavMesh, p: Vec3) -> Vec3:
    """Closest point on the mesh by XZ distance; idempotent for on-mesh points."""
    x, z = p[0], p[2]
    best_d2 = math.inf
    best_tri = -1
    best_xz = (x, z)
    for t, (i, j, k) in enumerate(mesh.triangles):
        if _contains_xz(mesh, t, x, z):
            best_d2, best_tri, best_xz = 0.0, t, (x, z)
            break
        a, b, c = mesh.vertices[i], mesh.vertices[j], mesh.vertices[k]
        for pa, pb in ((a, b), (b, c), (c, a)):
            d2, cx, cz = _closest_on_segment_xz(pa, pb, x, z)
            if d2 < best_d2:
                best_d2, best_tri, best_xz = d2, t, (cx, cz)
    y = _surface_height(mesh, best_tri, best_xz[0], best_xz[1])
    return (best_xz[0], y, best_xz[1])


def _shared_edge(
    mesh: NavMesh, tri: int, neighbor: int
) -> tuple[Vec3, Vec3]:
    """Shared edge endpoints ordered by tri's winding (left, right when exiting)."""
    i, j, k = mesh.triangles[tri]
    other = set(mesh.triangles[neighbor])
    for a, b in ((i, j), (j, k), (k, i)):
        if a in other and b in other:
            return mesh.vertices[a], mesh.vertices[b]
    raise NavMeshError(f"triangles {tri} and {neighbor} share no edge")


def _edge_midpoint(a: Vec3, b: Vec3) -> Vec3:
    return ((a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5, (a[2] + b[2]) * 0.5)


def _astar_corridor(mesh: NavMesh, start: Vec3, goal: Vec3, s_tri: int, g_tri: int) -> list[int]:
    goal_xz = (goal[0], goal[2])
    entry: dict[int, Vec3] = {s_tri: start}
    g_score: dict[int, float] = {s_tri: 0.0}
    came: dict[int, int] = {}
    counter = 0
    open_heap: list[tuple[float, int, int]] = [
        (dist_xz(start, goal), s_tri, counter)
    ]
    closed: set[int] = set()
    while open_heap:
        _, tri, _ = heapq.heappop(open_heap)
        if tri in closed:
            continue
        if tri == g_tri:
            corridor = [tri]
            while tri in came:
                tri = came[tri]
                corridor.append(tri)
            corridor.reverse()
            return corridor
        closed.add(tri)
        pos = entry[tri]
        base = g_score[tri]
        for n in mesh.adjacency[tri]:
            if n in closed:
                continue
            a, b = _shared_edge(mesh, tri, n)
            mid = _edge_midpoint(a, b)
            tentative = base + dist_xz(pos, mid)
            if tentative < g_score.get(n, math.inf):
                g_score[n] = tentative
                entry[n] = mid
                came[n] = tri
                counter += 1
                f = tentative + math.hypot(mid[0] - goal_xz[0], mid[2] - goal_xz[1])
                heapq.heappush(open_heap, (f, n, counter))
    raise NoPath("no corridor between start and goal triangles")


def _raycast_corridor(
    mesh: NavMesh, start: Vec3, goal: Vec3, s_tri: int, g_tri: int
) -> list[int] | None:
    """Triangle corridor crossed by the straight XZ segment, or None if it
    leaves the mesh (or grazes geometry too awkwardly to resolve)."""
    sx, sz = start[0], start[2]
    dx, dz = goal[0] - sx, goal[2] - sz
    cur = s_tri
    corridor = [cur]
    for _ in range(2 * len(mesh.triangles) + 8):
        if cur == g_tri:
            return corridor
        i, j, k = mesh.triangles[cur]
        verts = (mesh.vertices[i], mesh.vertices[j], mesh.vertices[k])
        best_t = math.inf
        exit_edge: tuple[int, int] | None = None
        for a_i, b_i in ((i, j), (j, k), (k, i)):
            a = mesh.vertices[a_i]
            b = mesh.vertices[b_i]
            # Interior is where cross2(edge, p - a) <= 0; the ray exits
            # where that value climbs through zero.
            fd = cross2((b[0] - a[0], b[2] - a[2]), (dx, dz))
            if fd <= 0.0:
                continue
            f0 = cross2((b[0] - a[0], b[2] - a[2]), (sx - a[0], sz - a[2]))
            t_hit = max(0.0, -f0 / fd)
            if t_hit < best_t:
                best_t = t_hit
                exit_edge = (a_i, b_i)
        del verts
        if best_t >= 1.0 - 1e-12:
            # Goal point reached while still inside this triangle.
            return corridor
        if exit_edge is None:
            return None
        a_i, b_i = exit_edge
        key = {a_i, b_i}
        nxt = None
        for n in mesh.adjacency[cur]:
            if key <= set(mesh.triangles[n]) and n != cur:
                nxt = n
                break
        if nxt is None or nxt in corridor:
            return None
        corridor.append(nxt)
        cur = nxt
    return None


def _triarea2(a: Vec3, b: Vec3, c: Vec3) -> float:
    return (b[0] - a[0]) * (c[2] - a[2]) - (c[0] - a[0]) * (b[2] - a[2])


def _same_xz(a: Vec3, b: Vec3) -> bool:
    return a[0] == b[0] and a[2] == b[2]


def _string_pull(portals: list[tuple[Vec3, Vec3]]) -> list[Vec3]:
    """Funnel pass over portal edges; returns taut waypoints start..goal."""
    apex, pleft, pright = portals[0][0], portals[0][0], portals[0][1]
    apex_i = left_i = right_i = 0
    pts: list[Vec3] = [apex]

    i = 1
    while i < len(portals):
        left, right = portals[i]
        # Tighten the right side of the funnel. Collinear cases tighten
        # rather than emit a corner; only a strict crossover does that.
        if _triarea2(apex, pright, right) >= 0.0:
            if _same_xz(apex, pright) or _triarea2(apex, pleft, right) <= 0.0:
                pright, right_i = right, i
            else:
                # Right crossed over left: left endpoint becomes a waypoint.
                if not _same_xz(pts[-1], pleft):
                    pts.append(pleft)
                apex, apex_i = pleft, left_i
                pleft, pright = apex, apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        # Tighten the left side of the funnel.
        if _triarea2(apex, pleft, left) <= 0.0:
            if _same_xz(apex, pleft) or _triarea2(apex, pright, left) >= 0.0:
                pleft, left_i = left, i
            else:
                if not _same_xz(pts[-1], pright):
                    pts.append(pright)
                apex, apex_i = pright, right_i
                pleft, pright = apex, apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        i += 1

    goal = portals[-1][0]
    if not _same_xz(pts[-1], goal) or len(pts) == 1:
        pts.append(goal)
    return pts


def _shortcut(
    mesh: NavMesh, pts: list[Vec3], fallback_corridor: list[int]
) -> tuple[list[Vec3], list[int]]:
    """Drop funnel waypoints whose straight bypass stays on the mesh.

    The corridor is rebuilt from the raycasts so waypoints always lie
    within it; if any segment cannot be raycast (grazing geometry), the
    untouched funnel result is returned with the A* corridor.
    """
    tri_of = [locate(mesh, p) for p in pts]
    if any(t is None for t in tri_of):
        return pts, fallback_corridor
    final = [pts[0]]
    corridor: list[int] = []
    i = 0
    while i < len(pts) - 1:
        hop = None
        for j in range(len(pts) - 1, i, -1):
            rc = _raycast_corridor(mesh, pts[i], pts[j], tri_of[i], tri_of[j])
            if rc is not None:
                hop = (j, rc)
                break
        if hop is None:
            return pts, fallback_corridor
        j, rc = hop
        for t in rc:
            if not corridor or corridor[-1] != t:
                corridor.append(t)
        final.append(pts[j])
        i = j
    return final, corridor


def find_path(mesh: NavMesh, start: Vec3, goal: Vec3) -> Path:
    """Shortest taut path between two on-mesh points.

    A* over triangle adjacency picks the corridor, the funnel pass pulls
    it taut, and a raycast shortcut pass removes corner artifacts the
    corridor choice may have introduced. Raises OffMesh when either
    endpoint does not locate on the mesh and NoPath when the endpoints
    sit in disconnected components.
    """
    s_tri = locate(mesh, start)
    g_tri = locate(mesh, goal)
    if s_tri is None or g_tri is None:
        raise OffMesh("start and goal must locate on the mesh")

    if s_tri == g_tri:
        waypoints = (start, goal)
        return Path((s_tri,), waypoints, dist3(start, goal))

    corridor = _astar_corridor(mesh, start, goal, s_tri, g_tri)

    portals: list[tuple[Vec3, Vec3]] = [(start, start)]
    for a, b in zip(corridor, corridor[1:]):
        left, right = _shared_edge(mesh, a, b)
        portals.append((left, right))
    portals.append((goal, goal))

    pulled = _string_pull(portals)
    waypoints, corridor = _shortcut(mesh, pulled, corridor)
    total = 0.0
    for a, b in zip(waypoints, waypoints[1:]):
        total += dist3(a, b)
    return Path(tuple(corridor), tuple(waypoints), total)


def mesh_to_dict(mesh: NavMesh) -> dict:
    return {
        "vertices": [list(v) for v in mesh.vertices],
        "triangles": [list(t) for t in mesh.triangles],
    }


def mesh_from_dict(data: object) -> NavMesh:
    """Build a mesh from the JSON object form, rejecting malformed input."""
    if not isinstance(data, dict):
        raise MeshFormatError("mesh file must contain a JSON object")
    verts = data.get("vertices")
    tris = data.get("triangles")
    if not isinstance(verts, list) or not isinstance(tris, list):
        raise MeshFormatError("mesh object needs 'vertices' and 'triangles' lists")
    parsed_verts: list[Vec3] = []
    for n, v in enumerate(verts):
        if not isinstance(v, list) or len(v) != 3:
            raise MeshFormatError(f"vertex {n} is not an [x, y, z] triple")
        try:
            parsed_verts.append((float(v[0]), float(v[1]), float(v[2])))
        except (TypeError, ValueError) as exc:
            raise MeshFormatError(f"vertex {n} has non-numeric coordinates") from exc
    parsed_tris: list[tuple[int, int, int]] = []
    for n, t in enumerate(tris):
        if not isinstance(t, list) or len(t) != 3:
            raise MeshFormatError(f"triangle {n} is not an [i, j, k] triple")
        for idx in t:
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise MeshFormatError(f"triangle {n} has non-integer indices")
        parsed_tris.append((t[0], t[1], t[2]))
    return build_navmesh(parsed_verts, parsed_tris)


def load_mesh(path: str) -> NavMesh:
    """Load a mesh JSON file (units meters, Y-up)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeshFormatError(f"invalid JSON in {path}: {exc}") from exc
    return mesh_from_dict(data)


def save_mesh(mesh: NavMesh, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(mesh_to_dict(mesh), fh, indent=2)
        fh.write("\n")
