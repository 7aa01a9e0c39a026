"""Finite-scale metrology: thin triangles, convexity, contraction, Morse gauges.

All Morse-type quantities are lower bounds found by witness search; nothing
here decides that a geodesic is Morse.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .cayley_ball import Ball, all_geodesics, default_sides, internal_points, side_triples
from .errors import ContainmentError, InvariantBreach, PreconditionError
from .group_model import FREE_ABELIAN, Element, GroupSpec
from .rays_fields import ScalarField


# --------------------------------------------------------------------------
# thin triangles

def _one_sided(ball: Ball, src: Sequence[int], dst: Sequence[int]) -> int:
    dst = list(dst)
    return max(int(ball.dist_row(u)[dst].min()) for u in src)


def _slim1(ball: Ball, sides) -> int:
    sxy, syz, sxz = sides
    return max(
        _one_sided(ball, sxy, syz + sxz),
        _one_sided(ball, syz, sxy + sxz),
        _one_sided(ball, sxz, sxy + syz),
    )


def _slim2(ball: Ball, x, y, z, sides) -> int:
    tri = internal_points(ball, x, y, z, sides)
    sxy, syz, sxz = sides
    # subgeodesics reach the rounded-up internal point so they cover each side
    ca, cb, cc = ((v + 1) // 2 for v in (tri.a2, tri.b2, tri.c2))
    legs = [
        (sxy[: ca + 1], sxz[: ca + 1]),
        (sxy[len(sxy) - 1 - cb:], syz[: cb + 1]),
        (sxz[len(sxz) - 1 - cc:], syz[len(syz) - 1 - cc:]),
    ]
    return max(max(_one_sided(ball, p, q), _one_sided(ball, q, p)) for p, q in legs)


def slim_constant(ball: Ball, x: int, y: int, z: int, condition: int = 1, sides=None) -> int:
    """Least delta for which the triangle satisfies slim condition 1 or 2.

    ``sides`` is None (lexicographically-first geodesics), an explicit
    ``([x,y], [y,z], [x,z])`` triple, or "all" for the maximum over every
    choice of sides.
    """
    if condition not in (1, 2):
        raise PreconditionError("slim condition must be 1 or 2")
    if sides == "all":
        triples, _ = side_triples(ball, x, y, z)
        return max(slim_constant(ball, x, y, z, condition, tuple(s)) for s in triples)
    if sides is None:
        sides = default_sides(ball, x, y, z)
    sides = tuple(list(s) for s in sides)
    if condition == 1:
        return _slim1(ball, sides)
    return _slim2(ball, x, y, z, sides)


def rectangle_slim(ball: Ball, p: int, q: int, r: int, s: int, condition: int = 1) -> int:
    """Thinness of the rectangle p,q,r,s measured through the diagonal [p, r]."""
    return max(slim_constant(ball, p, q, r, condition), slim_constant(ball, p, r, s, condition))


def convexity_defect(ball: Ball, x: int, y: int, z: int, t_num: int, t_den: int, side=None) -> int:
    """d(x,x_t)*t_den - ((t_den-t_num) d(x,y) + t_num d(x,z)) for x_t on [y,z].

    x_t sits at distance t*d(y,z) from y (rounded down when fractional).  The
    thin-triangle bound ``<= 2 delta' t_den`` is asserted at the realized t.
    """
    if t_den <= 0 or not 0 <= t_num <= t_den:
        raise PreconditionError("need 0 <= t_num <= t_den, t_den > 0")
    sxy, syz, sxz = default_sides(ball, x, y, z)
    if side is not None:
        syz = tuple(side)
    dyz = len(syz) - 1
    pos = (t_num * dyz) // t_den
    xt = syz[pos]
    dxy, dxz = len(sxy) - 1, len(sxz) - 1
    dxxt = ball.distance(x, xt)
    value = dxxt * t_den - ((t_den - t_num) * dxy + t_num * dxz)
    delta2 = slim_constant(ball, x, y, z, 2, (sxy, syz, sxz))
    if dyz:
        exact = dxxt * dyz - ((dyz - pos) * dxy + pos * dxz)
        if exact > 2 * delta2 * dyz:
            raise InvariantBreach(
                f"convexity defect {exact}/{dyz} exceeds 2*delta'={2 * delta2}"
            )
    return value


# --------------------------------------------------------------------------
# convexity of fields

@dataclass
class KConvexity:
    k_hat: int
    witness: tuple | None
    samples: int


def k_convexity(h: ScalarField, family: Iterable[Sequence[int]]) -> KConvexity:
    """Least K with h(x_t) <= (1-t) h(x_0) + t h(x_1) + K on every sampled segment."""
    best, witness, n = None, None, 0
    for seg in family:
        L = len(seg) - 1
        h0, h1 = h(seg[0]), h(seg[-1])
        n += 1
        for k in range(L + 1):
            lhs = L * h(seg[k]) - (L - k) * h0 - k * h1
            need = -((-lhs) // L) if L else 0
            if best is None or need > best:
                best, witness = need, (tuple(seg), k)
    if n == 0:
        raise PreconditionError("empty geodesic family")
    return KConvexity(best, witness, n)


def geodesic_family(ball: Ball, vertices: Sequence[int] | None = None, cap: int = 1000):
    """All geodesics (capped per pair) between contained pairs of ``vertices``."""
    if vertices is None:
        vertices = range(len(ball))
    vertices = list(vertices)
    for i, x in enumerate(vertices):
        for y in vertices[i + 1:]:
            try:
                gs = all_geodesics(ball, x, y, cap)
            except ContainmentError:
                continue
            yield from gs.paths


# --------------------------------------------------------------------------
# contraction

def group_ball(group: GroupSpec, center: Element, radius: int) -> list[Element]:
    seen = {center: 0}
    q = deque([center])
    while q:
        x = q.popleft()
        if seen[x] == radius:
            continue
        for i in range(group.num_letters):
            y = group.mul_letter(x, i)
            if y not in seen:
                seen[y] = seen[x] + 1
                q.append(y)
    return list(seen)


def _as_elements(space, gamma) -> tuple[GroupSpec, list[Element]]:
    if isinstance(space, Ball):
        group = space.group
        gamma = [space.vertices[v] if isinstance(v, (int,)) else v for v in gamma]
    else:
        group = space
    gamma = list(gamma)
    for i in range(len(gamma) - 1):
        if group.distance(gamma[i], gamma[i + 1]) != 1:
            raise PreconditionError("geodesic segment has non-adjacent consecutive vertices")
    if group.distance(gamma[0], gamma[-1]) != len(gamma) - 1:
        raise PreconditionError("segment is not geodesic")
    return group, gamma


def _distances_to(group, x, gamma):
    inv = group.inverse(x)
    return [group.length(group.multiply(inv, g)) for g in gamma]


def projection_diameter(group: GroupSpec, gamma: Sequence[Element], center: Element, radius: int) -> int:
    """Diameter of the nearest-point projection of B(center, radius) to a geodesic segment."""
    lo, hi = None, None
    for u in group_ball(group, center, radius):
        ds = _distances_to(group, u, gamma)
        m = min(ds)
        idx = [i for i, d in enumerate(ds) if d == m]
        lo = idx[0] if lo is None else min(lo, idx[0])
        hi = idx[-1] if hi is None else max(hi, idx[-1])
    return hi - lo


@dataclass
class ContractionProfile:
    geodesic: tuple
    samples: list = field(default_factory=list)  # (center label, radius, diameter)

    @property
    def d_hat(self) -> int:
        return max(s[2] for s in self.samples)

    @property
    def growing(self) -> bool:
        xs = [s[1] for s in self.samples]
        ys = [s[2] for s in self.samples]
        n = len(xs)
        return n * sum(x * y for x, y in zip(xs, ys)) - sum(xs) * sum(ys) > 0

    @property
    def strictly_growing(self) -> bool:
        rows = sorted(self.samples, key=lambda s: s[1])
        return len(rows) >= 2 and all(a[2] < b[2] for a, b in zip(rows, rows[1:]))

    @property
    def verdict(self) -> str:
        return "growing" if self.growing else "bounded-so-far"

    def to_csv(self) -> str:
        return "center,radius,diameter\n" + "".join(f"{c},{r},{d}\n" for c, r, d in self.samples)


def contraction_profile(space, gamma, radii: Sequence[int] = (), samples=None,
                        probe_letters: Sequence[int] | None = None) -> ContractionProfile:
    """Projection diameters of metric balls disjoint from a geodesic segment.

    Either pass explicit ``samples`` as (center element, radius) pairs, or
    ``radii``: for each radius r every center ``gamma[i] * s^(r+1)`` at
    distance exactly r+1 from the segment is tried and the largest diameter is
    kept (lower-bound semantics).
    """
    group, gamma = _as_elements(space, gamma)
    prof = ContractionProfile(tuple(group.format(g) for g in gamma))
    todo = []
    if samples is not None:
        for center, r in samples:
            if min(_distances_to(group, center, gamma)) <= r:
                raise PreconditionError(f"sample ball at {group.format(center)} meets the geodesic")
            todo.append([(center, r)])
    else:
        letters = range(group.num_letters) if probe_letters is None else probe_letters
        for r in radii:
            cands = []
            for g in gamma:
                for s in letters:
                    c = g
                    for _ in range(r + 1):
                        c = group.mul_letter(c, s)
                    if min(_distances_to(group, c, gamma)) == r + 1:
                        cands.append((c, r))
            todo.append(list(dict.fromkeys(cands)))
    for cands in todo:
        best = None
        for center, r in cands:
            d = projection_diameter(group, gamma, center, r)
            if best is None or d > best[2]:
                best = (group.format(center), r, d)
        if best is not None:
            prof.samples.append(best)
    if not prof.samples:
        raise PreconditionError("no sample ball disjoint from the geodesic")
    return prof


# --------------------------------------------------------------------------
# quasi-geodesic excursions

@dataclass
class GaugeEntry:
    lam: Fraction
    eps: int
    n_hat: int
    witness: list
    scope: str
    partial: bool = False

    def to_dict(self) -> dict:
        return {"lambda": str(self.lam), "epsilon": self.eps, "n_hat": self.n_hat,
                "witness": self.witness, "scope": self.scope, "partial": self.partial}


@dataclass
class GaugeEstimate:
    pairs: list = field(default_factory=list)

    def add(self, entry: GaugeEntry):
        self.pairs.append(entry)

    def to_dict(self) -> dict:
        return {"pairs": [e.to_dict() for e in self.pairs]}


def is_quasi_geodesic(group: GroupSpec, path: Sequence[Element], lam, eps: int) -> bool:
    """|i - j| <= lam (d(path_i, path_j) + eps) for all i, j (unit-speed paths)."""
    lam = Fraction(lam)
    p, q = lam.numerator, lam.denominator
    for i in range(len(path)):
        inv = group.inverse(path[i])
        for j in range(i + 1, len(path)):
            d = group.length(group.multiply(inv, path[j]))
            if q * (j - i) > p * (d + eps):
                return False
    return True


def quasigeodesic_excursion(space, gamma, lam, eps: int, budget: int,
                            dfs_budget: int | None = None, node_cap: int = 200_000) -> GaugeEntry:
    """Largest distance to ``gamma`` of a found (lam, eps)-quasi-geodesic with endpoints on it.

    Two witness families: exhaustive DFS over paths between segment vertices
    at separation <= ``dfs_budget``, and conjugated detours ``s^k w s^-k``
    for letters s of free-abelian factors at separation <= ``budget``.
    """
    group, gamma = _as_elements(space, gamma)
    lam = Fraction(lam)
    if lam < 1 or eps < 0 or budget < 0:
        raise PreconditionError("need lambda >= 1, epsilon >= 0, budget >= 0")
    p, q = lam.numerator, lam.denominator
    if dfs_budget is None:
        dfs_budget = budget if group.is_tree else min(budget, 3)
    on_gamma = {g: i for i, g in enumerate(gamma)}
    best, witness = 0, [group.format(gamma[0])]
    partial = False

    def excursion(path):
        return max(min(_distances_to(group, x, gamma)) for x in path)

    # exhaustive DFS
    max_len = (p * (dfs_budget + eps)) // q
    nodes = 0
    for i0, start in enumerate(gamma):
        path = [start]
        invs = [group.inverse(start)]

        def rec():
            nonlocal best, witness, nodes, partial
            nodes += 1
            if nodes > node_cap:
                partial = True
                return
            k = len(path) - 1
            cur = path[-1]
            j = on_gamma.get(cur)
            if k > 0 and j is not None and j != i0 and abs(j - i0) <= dfs_budget:
                e = excursion(path)
                if e > best:
                    best, witness = e, [group.format(x) for x in path]
            if k == max_len:
                return
            # some endpoint must stay reachable within the quasi-geodesic bound from the start
            dcur = _distances_to(group, cur, gamma)
            lo_j, hi_j = max(0, i0 - dfs_budget), min(len(gamma) - 1, i0 + dfs_budget)
            if not any(j != i0 and q * (k + dcur[j]) <= p * (abs(j - i0) + eps)
                       for j in range(lo_j, hi_j + 1)):
                return
            for s in range(group.num_letters):
                nxt = group.mul_letter(cur, s)
                ok = True
                for i, inv in enumerate(invs):
                    d = group.length(group.multiply(inv, nxt))
                    if q * (k + 1 - i) > p * (d + eps):
                        ok = False
                        break
                if not ok:
                    continue
                path.append(nxt)
                invs.append(group.inverse(nxt))
                rec()
                path.pop()
                invs.pop()
                if partial:
                    return

        rec()
        if partial:
            break

    # structured flat detours
    flat_letters = [i for i, (fi, _, _) in enumerate(group.letter_info)
                    if group.factors[fi].kind == FREE_ABELIAN]
    for i0, j0 in itertools.combinations(range(len(gamma)), 2):
        dd = j0 - i0
        if dd > budget:
            continue
        seg = gamma[i0:j0 + 1]
        kmax = (p * (dd + eps) // q - dd) // 2
        for s in flat_letters:
            sinv = group.inverse_letter(s)
            for k in range(1, kmax + 1):
                up = [group.multiply(seg[0], group.word_element([s] * m)) for m in range(k + 1)]
                top = [group.multiply(up[-1], group.multiply(group.inverse(seg[0]), x)) for x in seg[1:]]
                down = []
                cur = top[-1] if top else up[-1]
                for _ in range(k):
                    cur = group.mul_letter(cur, sinv)
                    down.append(cur)
                path = up + top + down
                if path[-1] != seg[-1] or not is_quasi_geodesic(group, path, lam, eps):
                    continue
                e = excursion(path)
                if e > best:
                    best, witness = e, [group.format(x) for x in path]
    scope = (f"DFS over all paths between segment vertices at separation <= {dfs_budget} "
             f"(node cap {node_cap}); flat detours s^k w s^-k at separation <= {budget}")
    return GaugeEntry(lam, eps, best, witness, scope, partial)


def gauge_estimate(space, gamma, gauges: Sequence[tuple], budget: int, **kw) -> GaugeEstimate:
    if not gauges:
        raise PreconditionError("empty (lambda, epsilon) list")
    est = GaugeEstimate()
    for lam, eps in gauges:
        est.add(quasigeodesic_excursion(space, gamma, lam, eps, budget, **kw))
    return est


def fellow_travel_bound(n_hat: int, k_hat: int) -> int:
    """C = 2(4N(3,0) + 4N(3,0) + K) from the Morse-gradient fellow-travel argument."""
    return 2 * (8 * n_hat + k_hat)


# --------------------------------------------------------------------------
# contracting-word experiment

def geodesic_words(group: GroupSpec, length: int):
    """All geodesic words of the given length (as letter-index tuples)."""
    frontier = [((), ())]
    for n in range(length):
        nxt = []
        for word, elem in frontier:
            for s in range(group.num_letters):
                e = group.mul_letter(elem, s)
                if group.length(e) == n + 1:
                    nxt.append((word + (s,), e))
        frontier = nxt
    return [w for w, _ in frontier]


def contracting_words(group: GroupSpec, D: int, length: int, radii: Sequence[int]):
    """Split geodesic words of ``length`` by measured contraction diameter <= D."""
    good, bad = [], []
    for w in geodesic_words(group, length):
        gamma = [group.word_element(w[:k]) for k in range(len(w) + 1)]
        prof = contraction_profile(group, gamma, radii)
        (good if prof.d_hat <= D else bad).append(w)
    return good, bad


def separating_factors(good, bad, k: int):
    """Subwords of length <= k seen in ``bad`` words but never in ``good`` ones.

    Returns (forbidden factors, bad words not caught by any of them).
    """
    def factors(w):
        return {w[i:i + m] for m in range(1, k + 1) for i in range(len(w) - m + 1)}

    allowed = set().union(*(factors(w) for w in good)) if good else set()
    forbidden = set().union(*(factors(w) for w in bad)) - allowed if bad else set()
    missed = [w for w in bad if not (factors(w) & forbidden)]
    return sorted(forbidden), missed
