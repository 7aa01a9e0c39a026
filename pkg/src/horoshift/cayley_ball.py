"""Finite windows of a Cayley graph: balls, geodesics, projections, tripods."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ContainmentError, PreconditionError, ResourceCapError
from .group_model import IDENTITY, Element, GroupSpec

DEFAULT_VERTEX_CAP = 5_000_000
DEFAULT_GEODESIC_CAP = 100_000


class Ball:
    """The radius-R ball of Cay(G, S) around ``center``.

    Vertices are numbered in breadth-first order (generators in declared
    order).  ``nbr[v, i]`` is the index of ``v * letter_i`` or -1 when that
    vertex lies outside the ball.
    """

    def __init__(self, group: GroupSpec, center: Element, radius: int,
                 vertices: list, dist: np.ndarray, nbr: np.ndarray):
        self.group = group
        self.center = center
        self.radius = radius
        self.vertices = vertices
        self.index = {v: i for i, v in enumerate(vertices)}
        self.dist_from_center = dist
        self.nbr = nbr
        self._row_cache: dict[int, np.ndarray] = {}

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Ball({self.group!r}, radius={self.radius}, n={len(self)})"

    def __contains__(self, element):
        return element in self.index

    def vertex(self, element_or_text) -> int:
        """Index of an element given as normal form tuple or text."""
        if isinstance(element_or_text, str):
            element_or_text = self.group.parse_element(element_or_text)
        try:
            return self.index[element_or_text]
        except KeyError:
            raise PreconditionError(
                f"{self.group.format(element_or_text)} is outside the ball"
            ) from None

    def label(self, v: int) -> str:
        return self.group.format(self.vertices[v])

    def neighbors(self, v: int) -> Iterable[tuple[int, int]]:
        """(letter, neighbor) pairs inside the ball, in letter order."""
        row = self.nbr[v]
        return [(i, int(w)) for i, w in enumerate(row) if w >= 0]

    def is_interior(self, v: int) -> bool:
        return self.dist_from_center[v] < self.radius

    def distance(self, u: int, v: int) -> int:
        """Exact word-metric distance (global, not restricted to the ball)."""
        return self.group.distance(self.vertices[u], self.vertices[v])

    def dist_row(self, u: int) -> np.ndarray:
        """Global distances from ``u`` to every ball vertex (cached)."""
        row = self._row_cache.get(u)
        if row is None:
            g = self.group
            inv = g.inverse(self.vertices[u])
            row = np.fromiter(
                (g.length(g.multiply(inv, w)) for w in self.vertices),
                dtype=np.int64, count=len(self.vertices),
            )
            self._row_cache[u] = row
        return row

    def bfs(self, source: int | Iterable[int]) -> np.ndarray:
        """Graph distances inside the ball (-1 where unreachable)."""
        out = np.full(len(self), -1, dtype=np.int64)
        sources = [source] if isinstance(source, (int, np.integer)) else list(source)
        q = deque()
        for s in sources:
            out[s] = 0
            q.append(s)
        nbr = self.nbr
        while q:
            v = q.popleft()
            d = out[v] + 1
            for w in nbr[v]:
                if w >= 0 and out[w] < 0:
                    out[w] = d
                    q.append(w)
        return out

    def translate_index(self, g: Element, v: int) -> int:
        """Index of ``g * v`` or -1 when outside the ball."""
        return self.index.get(self.group.multiply(g, self.vertices[v]), -1)

    @cached_property
    def edges(self) -> list[tuple[int, int, int]]:
        """Directed in-ball edges (v, letter, w)."""
        out = []
        for v in range(len(self)):
            for i, w in enumerate(self.nbr[v]):
                if w >= 0:
                    out.append((v, i, int(w)))
        return out

    # -- exports ------------------------------------------------------------
    def to_dot(self, highlight: dict | None = None) -> str:
        """DOT text; ``highlight`` maps vertex -> color class name."""
        highlight = highlight or {}
        lines = ["graph ball {"]
        for v in range(len(self)):
            attrs = f'label="{self.label(v)} ({self.dist_from_center[v]})"'
            if v in highlight:
                attrs += f', class="{highlight[v]}", color="{highlight[v]}"'
            lines.append(f"  v{v} [{attrs}];")
        names = self.group.letter_names
        for v, i, w in self.edges:
            if i % 2 == 0:
                lines.append(f'  v{v} -- v{w} [label="{names[i]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def distance_csv(self) -> str:
        rows = ["normal_form,dist_from_center"]
        rows += [f"{self.label(v)},{self.dist_from_center[v]}" for v in range(len(self))]
        return "\n".join(rows) + "\n"


def build_ball(group: GroupSpec, center: Element = IDENTITY, radius: int = 1,
               cap: int = DEFAULT_VERTEX_CAP) -> Ball:
    if radius < 0:
        raise PreconditionError("radius must be nonnegative")
    vertices = [center]
    index = {center: 0}
    dist = [0]
    q = deque([0])
    k = group.num_letters
    while q:
        v = q.popleft()
        if dist[v] == radius:
            continue
        x = vertices[v]
        for i in range(k):
            y = group.mul_letter(x, i)
            if y not in index:
                if len(vertices) >= cap:
                    raise ResourceCapError(
                        f"ball of radius {radius} exceeds the vertex cap {cap}"
                    )
                index[y] = len(vertices)
                vertices.append(y)
                dist.append(dist[v] + 1)
                q.append(index[y])
    nbr = np.full((len(vertices), k), -1, dtype=np.int64)
    for v, x in enumerate(vertices):
        for i in range(k):
            w = index.get(group.mul_letter(x, i))
            if w is not None:
                nbr[v, i] = w
    return Ball(group, center, radius, vertices, np.asarray(dist, dtype=np.int64), nbr)


# --------------------------------------------------------------------------
# geodesics

@dataclass
class GeodesicSet:
    paths: list = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def geodesic_interval(ball: Ball, x: int, y: int) -> set[int]:
    """Vertices on some geodesic x -> y; raises if any such geodesic leaves the ball."""
    g = ball.group
    target = ball.vertices[y]
    dy = {}

    def d_to_y(elem):
        if elem not in dy:
            dy[elem] = g.distance(elem, target)
        return dy[elem]

    start = ball.vertices[x]
    seen = {x}
    frontier = [x]
    while frontier:
        nxt = []
        for v in frontier:
            elem = ball.vertices[v]
            d = d_to_y(elem)
            if d == 0:
                continue
            for i in range(g.num_letters):
                w_elem = g.mul_letter(elem, i)
                if d_to_y(w_elem) == d - 1:
                    w = ball.index.get(w_elem)
                    if w is None:
                        raise ContainmentError(
                            f"a geodesic {g.format(start)} -> {g.format(target)} "
                            f"leaves the radius-{ball.radius} ball"
                        )
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
        frontier = nxt
    return seen


def geodesics_contained(ball: Ball, x: int, y: int) -> bool:
    try:
        geodesic_interval(ball, x, y)
    except ContainmentError:
        return False
    return True


def all_geodesics(ball: Ball, x: int, y: int, cap: int = DEFAULT_GEODESIC_CAP) -> GeodesicSet:
    """Every geodesic vertex path x -> y, lexicographic in letter order."""
    interval = geodesic_interval(ball, x, y)
    dy = ball.dist_row(y)
    out = GeodesicSet()
    path = [x]

    def rec(v):
        if len(out.paths) >= cap:
            out.truncated = True
            return
        if v == y:
            out.paths.append(tuple(path))
            return
        d = dy[v]
        for _, w in ball.neighbors(v):
            if w in interval and dy[w] == d - 1:
                path.append(w)
                rec(w)
                path.pop()
                if out.truncated:
                    return

    rec(x)
    return out


def first_geodesic(ball: Ball, x: int, y: int) -> tuple:
    """The lexicographically-first geodesic x -> y."""
    return all_geodesics(ball, x, y, cap=1).paths[0]


def is_geodesic_path(ball: Ball, path: Sequence[int]) -> bool:
    for u, v in zip(path, path[1:]):
        if v not in ball.nbr[u]:
            return False
    return ball.distance(path[0], path[-1]) == len(path) - 1


def project(ball: Ball, x: int, target: Iterable[int]) -> set[int]:
    """All target vertices nearest to ``x`` in the global word metric."""
    target = list(target)
    if not target:
        raise PreconditionError("projection onto an empty set")
    row = ball.dist_row(x)
    dists = row[target]
    m = dists.min()
    return {t for t, d in zip(target, dists) if d == m}


def project_elements(group: GroupSpec, x: Element, target: Sequence[Element]) -> tuple[int, list[int]]:
    """(distance, indices into ``target``) of the nearest target elements."""
    if not target:
        raise PreconditionError("projection onto an empty set")
    inv = group.inverse(x)
    ds = [group.length(group.multiply(inv, t)) for t in target]
    m = min(ds)
    return m, [i for i, d in enumerate(ds) if d == m]


# --------------------------------------------------------------------------
# tripods

@dataclass(frozen=True)
class Tripod:
    """Tripod lengths stored doubled (``a2 = 2a``); points at floor positions."""
    a2: int
    b2: int
    c2: int
    i_x: int
    i_y: int
    i_z: int
    sides: tuple

    @property
    def half_integer(self) -> bool:
        return self.a2 % 2 == 1

    @property
    def abc(self) -> tuple[int, int, int]:
        return self.a2 // 2, self.b2 // 2, self.c2 // 2


def default_sides(ball: Ball, x: int, y: int, z: int) -> tuple:
    """Lexicographically-first sides ([x,y], [y,z], [x,z])."""
    return first_geodesic(ball, x, y), first_geodesic(ball, y, z), first_geodesic(ball, x, z)


def internal_points(ball: Ball, x: int, y: int, z: int, sides=None) -> Tripod:
    """Solve a+b=d(x,y), a+c=d(x,z), b+c=d(y,z) and locate the internal points.

    With odd perimeter the solution is half-integral; positions round down.
    """
    if sides is None:
        sides = default_sides(ball, x, y, z)
    sxy, syz, sxz = sides
    dxy, dyz, dxz = len(sxy) - 1, len(syz) - 1, len(sxz) - 1
    a2 = dxy + dxz - dyz
    b2 = dxy + dyz - dxz
    c2 = dxz + dyz - dxy
    a, b = a2 // 2, b2 // 2
    return Tripod(a2, b2, c2, i_x=syz[b], i_y=sxz[a], i_z=sxy[a], sides=tuple(sides))


def side_triples(ball: Ball, x: int, y: int, z: int, cap: int = DEFAULT_GEODESIC_CAP):
    """Iterate every choice of geodesic sides (capped per side)."""
    gxy = all_geodesics(ball, x, y, cap)
    gyz = all_geodesics(ball, y, z, cap)
    gxz = all_geodesics(ball, x, z, cap)
    truncated = gxy.truncated or gyz.truncated or gxz.truncated
    return itertools.product(gxy.paths, gyz.paths, gxz.paths), truncated
