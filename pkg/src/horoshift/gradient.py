"""Gradient arcs and rays of integer fields, and fellow-travel profiles."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .cayley_ball import Ball
from .errors import InvariantBreach, PreconditionError
from .group_model import RayWalk
from .rays_fields import ScalarField

DEFAULT_LEAF_CAP = 10_000


@dataclass(frozen=True)
class GradientPath:
    vertices: tuple

    def __len__(self):
        return len(self.vertices) - 1

    def __getitem__(self, t):
        return self.vertices[t]

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]


@dataclass
class GradientTree:
    paths: list = field(default_factory=list)
    truncated: bool = False


def gradient_successors(h: ScalarField, v: int) -> list[int]:
    """Neighbors w of v with h(w) = h(v) - 1, in letter order."""
    ball = h.ball
    if not ball.is_interior(v):
        raise PreconditionError(f"{ball.label(v)} is on the ball boundary")
    target = h(v) - 1
    out = [w for _, w in ball.neighbors(v) if h.values[w] == target]
    if not out:
        raise PreconditionError(f"field is not distance-like at {ball.label(v)}: no descending neighbor")
    return out


def is_gradient_arc(h: ScalarField, path: Sequence[int]) -> bool:
    ball = h.ball
    for u, v in zip(path, path[1:]):
        if v not in ball.nbr[u]:
            raise PreconditionError(f"{ball.label(u)} and {ball.label(v)} are not adjacent")
    n = len(path) - 1
    return h(path[0]) - h(path[-1]) == n and ball.distance(path[0], path[-1]) == n


def concatenate(p: GradientPath, q: GradientPath) -> GradientPath:
    if p.end != q.start:
        raise PreconditionError("arcs do not share an endpoint")
    return GradientPath(p.vertices + q.vertices[1:])


def _stop(ball: Ball, v: int, margin: int) -> bool:
    return ball.dist_from_center[v] >= ball.radius - margin


def gradient_ray(h: ScalarField, start: int, policy: str = "first", seed: int | None = None,
                 margin: int = 0, cap: int = DEFAULT_LEAF_CAP):
    """Descend from ``start`` one unit per step until the ball margin.

    ``policy`` is "first" (letter order), "random" (needs ``seed``) or "all"
    (returns a :class:`GradientTree` of every maximal descent, capped).
    """
    ball = h.ball
    if policy == "all":
        tree = GradientTree()
        stack = [(start,)]
        while stack:
            path = stack.pop()
            v = path[-1]
            if _stop(ball, v, margin):
                tree.paths.append(GradientPath(path))
                if len(tree.paths) >= cap and stack:
                    tree.truncated = True
                    break
                continue
            for w in reversed(gradient_successors(h, v)):
                stack.append(path + (w,))
        for p in tree.paths:
            _assert_arc(h, p)
        return tree
    if policy == "random":
        if seed is None:
            raise PreconditionError("random policy needs a seed")
        rng = random.Random(seed)
        choose = rng.choice
    elif policy == "first":
        choose = lambda succ: succ[0]  # noqa: E731
    else:
        raise PreconditionError(f"unknown policy {policy!r}")
    path = [start]
    while not _stop(ball, path[-1], margin):
        path.append(choose(gradient_successors(h, path[-1])))
    out = GradientPath(tuple(path))
    _assert_arc(h, out)
    return out


def _assert_arc(h, p):
    if not is_gradient_arc(h, p.vertices):
        raise InvariantBreach(f"descent from {h.ball.label(p.start)} is not a geodesic gradient arc")


def path_from_ray(ball: Ball, c: RayWalk, length: int, start: int | None = None) -> GradientPath:
    """Vertices start*c(0..length); start defaults to the ball center."""
    g = ball.group
    base = ball.vertices[ball.index[ball.center] if start is None else start]
    verts = []
    for x in c.points(length):
        idx = ball.index.get(g.multiply(base, x))
        if idx is None:
            raise PreconditionError(f"ray leaves the ball before t={length}")
        verts.append(idx)
    return GradientPath(tuple(verts))


@dataclass
class FellowTravelProfile:
    distances: tuple
    shift: int = 0

    @property
    def max(self) -> int:
        return max(self.distances)

    def tail_max(self, t0: int) -> int:
        tail = self.distances[t0:]
        return max(tail) if tail else 0

    def nondecreasing_between(self, t0: int, t1: int) -> bool:
        seg = self.distances[t0:t1 + 1]
        return all(a <= b for a, b in zip(seg, seg[1:]))

    def __getitem__(self, t):
        return self.distances[t]

    def to_csv(self) -> str:
        return "t,distance\n" + "".join(f"{t},{d}\n" for t, d in enumerate(self.distances))


def fellow_travel_profile(alpha: GradientPath, beta: GradientPath, ball: Ball,
                          h: ScalarField | None = None) -> FellowTravelProfile:
    """d(alpha(t), beta(t)) for t up to the shorter length.

    With ``h`` given, the path starting higher is advanced until both start
    on the same level (shift recorded, positive when alpha was advanced).
    """
    a, b = alpha.vertices, beta.vertices
    shift = 0
    if h is not None:
        shift = h(a[0]) - h(b[0])
        if shift > 0:
            a = a[shift:]
        elif shift < 0:
            b = b[-shift:]
    n = min(len(a), len(b))
    if n == 0:
        raise PreconditionError("paths too short to align")
    return FellowTravelProfile(tuple(ball.distance(a[t], b[t]) for t in range(n)), shift)
