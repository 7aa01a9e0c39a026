"""Horospheres, horoballs and their convergence / convexity experiments.

Boundary convergence cannot be observed in a finite window.  The surrogate
used here is the fellow-travel depth: how long every geodesic from the
center to a horosphere point stays within distance 1 of the ray.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cayley_ball import Ball, all_geodesics, build_ball
from .errors import ContainmentError, PreconditionError
from .group_model import GroupSpec, RayWalk
from .rays_fields import ScalarField, busemann


@dataclass(frozen=True)
class Horosphere:
    r: int
    members: frozenset

    @property
    def empty(self) -> bool:
        return not self.members


@dataclass(frozen=True)
class Horoball:
    r: int
    members: frozenset

    @property
    def empty(self) -> bool:
        return not self.members


def horosphere(h: ScalarField, r: int) -> Horosphere:
    return Horosphere(r, frozenset(int(v) for v in np.flatnonzero((h.values == -r) & h.domain)))


def horoball(h: ScalarField, r: int) -> Horoball:
    return Horoball(r, frozenset(int(v) for v in np.flatnonzero((h.values <= -r) & h.domain)))


def ray_vertices(ball: Ball, c: RayWalk, t_max: int | None = None) -> list[int]:
    """Ball indices of center*c(t) for t = 0..t_max (default: the radius)."""
    g = ball.group
    t_max = ball.radius if t_max is None else t_max
    return [ball.index[g.multiply(ball.center, x)] for x in c.points(t_max)]


def near_ray(ball: Ball, c: RayWalk) -> np.ndarray:
    """Vertices within distance 1 of the ray image."""
    g = ball.group
    t_max = ball.radius + 1
    if c.finite:
        t_max = min(t_max, c.max_t)
    pts = {g.multiply(ball.center, x) for x in c.points(t_max)}
    near = np.zeros(len(ball), dtype=bool)
    for v, x in enumerate(ball.vertices):
        if x in pts or any(g.mul_letter(x, i) in pts for i in range(g.num_letters)):
            near[v] = True
    return near


def fellow_travel_depth(ball: Ball, c: RayWalk) -> np.ndarray:
    """Per vertex v: the minimum over geodesics [center, v] of the length of
    their longest initial segment staying within distance 1 of the ray."""
    near = near_ray(ball, c)
    n = len(ball)
    dist = ball.dist_from_center
    order = np.argsort(dist, kind="stable")
    reach = np.zeros(n, dtype=bool)
    first_exit = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    for v in order:
        d = dist[v]
        if d == 0:
            reach[v] = near[v]
            if not near[v]:
                first_exit[v] = -1
            continue
        parents = [w for w in ball.nbr[v] if w >= 0 and dist[w] == d - 1]
        any_reach = any(reach[p] for p in parents)
        reach[v] = near[v] and any_reach
        fe = min(first_exit[p] for p in parents)
        if not near[v] and any_reach:
            fe = min(fe, d - 1)
        first_exit[v] = fe
    return np.minimum(first_exit, dist)


@dataclass
class WitnessReport:
    rows: list  # (n, horosphere size, m(n), argmin vertex label)
    verdict: str
    witness: list = field(default_factory=list)

    def to_csv(self) -> str:
        out = "n,horosphere_size,m,verdict\n"
        return out + "".join(f"{n},{size},{m},{self.verdict}\n" for n, size, m, _ in self.rows)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict,
                "rows": [{"n": n, "size": s, "m": m, "argmin": a} for n, s, m, a in self.rows],
                "witness": self.witness}


def convergence_witness(h: ScalarField, c: RayWalk, horizon: int, const: int = 0) -> WitnessReport:
    """Check m(n) >= n/2 - const for the horospheres H_n, n = 1..horizon.

    m(n) is the least fellow-travel depth over H_n inside the ball.  A failure
    yields a witness sequence (one minimizing vertex per n).
    """
    ball = h.ball
    if horizon > ball.radius:
        raise PreconditionError(f"horizon {horizon} exceeds the usable radius {ball.radius}")
    depth = fellow_travel_depth(ball, c)
    rows = []
    ok = True
    for n in range(1, horizon + 1):
        hs = horosphere(h, n)
        if hs.empty:
            raise PreconditionError(f"horosphere H_{n} is empty in the window")
        members = sorted(hs.members)
        m_idx = min(members, key=lambda v: (depth[v], v))
        m = int(depth[m_idx])
        rows.append((n, len(members), m, ball.label(m_idx)))
        if 2 * m < n - 2 * const:
            ok = False
    if ok:
        return WitnessReport(rows, "convergent-evidence")
    return WitnessReport(rows, "divergence-witness", [r[3] for r in rows])


# --------------------------------------------------------------------------
# horoballs

@dataclass
class ConvexityReport:
    passed: bool
    pairs_checked: int
    pairs_skipped: int
    findings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "pairs_checked": self.pairs_checked,
                "pairs_skipped": self.pairs_skipped, "findings": self.findings}


def horoball_convexity(h: ScalarField, hb: Horoball, cap: int = 10_000) -> ConvexityReport:
    """Do geodesics between members stay inside the horoball?

    Exits are findings, not errors: Cayley graphs are not CAT(0).  Pairs
    whose geodesics could leave the window are skipped and counted.
    """
    ball = h.ball
    members = sorted(hb.members)
    checked = skipped = 0
    findings = []
    for u, v in itertools.combinations(members, 2):
        try:
            geos = all_geodesics(ball, u, v, cap)
        except ContainmentError:
            skipped += 1
            continue
        checked += 1
        for path in geos:
            out = [w for w in path if w not in hb.members]
            if out:
                findings.append({"pair": [ball.label(u), ball.label(v)],
                                 "exit": ball.label(out[0]), "h": h(out[0])})
                break
    return ConvexityReport(not findings, checked, skipped, findings)


def _diameter(ball: Ball, members) -> int | None:
    members = sorted(members)
    if not members:
        return None
    return max(int(ball.dist_row(u)[members].max()) for u in members)


@dataclass
class IntersectionReport:
    rows: list  # (radius, size, diameter, min of h1+h2)
    bounded_evidence: bool

    def to_dict(self) -> dict:
        return {"bounded_evidence": self.bounded_evidence,
                "rows": [{"radius": R, "size": s, "diameter": d, "min_sum": m}
                         for R, s, d, m in self.rows]}


def rays_distinct(group: GroupSpec, c1: RayWalk, c2: RayWalk, t: int) -> bool:
    """Separation evidence: the rays end farther apart than they start."""
    return group.distance(c1(t), c2(t)) > group.distance(c1(0), c2(0))


def horoball_intersection(group: GroupSpec, c1: RayWalk, c2: RayWalk, r1: int, r2: int,
                          radii) -> IntersectionReport:
    radii = sorted(radii)
    if not rays_distinct(group, c1, c2, radii[-1]):
        raise PreconditionError("rays do not separate within the window")
    rows = []
    for R in radii:
        ball = build_ball(group, radius=R)
        h1, h2 = busemann(ball, c1), busemann(ball, c2)
        both = horoball(h1, r1).members & horoball(h2, r2).members
        rows.append((R, len(both), _diameter(ball, both), int((h1.values + h2.values).min())))
    diams = [r[2] for r in rows]
    bounded = len(rows) < 2 or diams[-1] == diams[-2]
    return IntersectionReport(rows, bounded)


@dataclass
class DivergenceReport:
    values: list
    evidence: bool

    def to_dict(self) -> dict:
        return {"values": self.values, "divergence_evidence": self.evidence}


def divergence_along_other_ray(h: ScalarField, own: RayWalk, other: RayWalk) -> DivergenceReport:
    """h(c'(t)) for t <= radius; evidence iff strictly increasing on the second half."""
    ball = h.ball
    R = ball.radius
    if all(own(t) == other(t) for t in range(R + 1)):
        raise PreconditionError("the other ray coincides with the defining ray in the window")
    verts = ray_vertices(ball, other)
    values = [h(v) for v in verts]
    tail = values[R // 2:]
    evidence = len(tail) >= 2 and all(a < b for a, b in zip(tail, tail[1:]))
    return DivergenceReport(values, evidence)


# --------------------------------------------------------------------------
# CAT(0)-flavoured expectations

def sphere_minimizers(h: ScalarField, x0: int, r: int) -> tuple[int, list[int]]:
    """Minimum of h on the sphere S_r(x0) and the vertices attaining it."""
    ball = h.ball
    if ball.dist_from_center[x0] + r > ball.radius:
        raise ContainmentError("sphere leaves the window")
    row = ball.dist_row(x0)
    sphere = np.flatnonzero(row == r)
    vals = h.values[sphere]
    m = int(vals.min())
    return m, [int(v) for v in sphere[vals == m]]


def projection_inequality(h: ScalarField, c: RayWalk) -> list:
    """Vertices v with some nearest ray point p (t <= radius) where h(p) > h(v)."""
    ball = h.ball
    g = ball.group
    rv = ray_vertices(ball, c)
    ray_elems = [ball.vertices[t] for t in rv]
    bad = []
    for v, x in enumerate(ball.vertices):
        inv = g.inverse(x)
        row = [g.length(g.multiply(inv, y)) for y in ray_elems]
        m = min(row)
        if any(d == m and h(rv[t]) > h(v) for t, d in enumerate(row)):
            bad.append(ball.label(v))
    return bad
