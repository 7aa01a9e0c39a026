"""Derivative coding of integer fields into the shift space over {-1,0,1}^S.

A derivative field stores one letter per vertex: the increments
``h(v s) - h(v)`` along every symmetrized generator ``s``.  Entries whose
edge leaves the window are ``ABSENT`` and take part in no check.
"""
from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cayley_ball import Ball
from .errors import ConfigError, IntegrationError, InvariantBreach, LipschitzError, PreconditionError
from .group_model import FREE_ABELIAN, Element, GroupSpec, RayWalk
from .rays_fields import ScalarField, busemann, check_distance_like, check_lipschitz, normalize

ABSENT = -128


class Alphabet:
    """Letters are maps S -> {-1,0,1}; never materialized as a table."""

    def __init__(self, letter_names: Sequence[str]):
        self.letter_names = tuple(letter_names)

    def __len__(self):
        return 3 ** len(self.letter_names)

    def index(self, letter: Sequence[int]) -> int:
        """Canonical base-3 rank of a letter (first generator most significant)."""
        n = 0
        for x in letter:
            if x not in (-1, 0, 1):
                raise PreconditionError(f"letter entry {x} outside {{-1,0,1}}")
            n = 3 * n + (x + 1)
        return n

    def letter(self, index: int) -> tuple:
        if not 0 <= index < len(self):
            raise PreconditionError("letter index out of range")
        out = []
        for _ in self.letter_names:
            index, r = divmod(index, 3)
            out.append(r - 1)
        return tuple(reversed(out))

    def as_dict(self, letter: Sequence[int]) -> dict:
        return {n: (None if x == ABSENT else int(x)) for n, x in zip(self.letter_names, letter)}


@dataclass(eq=False)
class DerivativeField:
    ball: Ball
    letters: np.ndarray  # (n, |S|) int8, ABSENT where undefined
    domain: np.ndarray | None = None  # vertices carrying a letter at all

    def __post_init__(self):
        self.letters = np.asarray(self.letters, dtype=np.int8)
        if self.domain is None:
            self.domain = np.ones(len(self.ball), dtype=bool)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.ball.group.letter_names)

    def letter(self, v: int) -> tuple:
        return tuple(int(x) for x in self.letters[v])

    def symbol(self, v: int):
        if not self.domain[v]:
            return None
        return tuple(None if x == ABSENT else int(x) for x in self.letters[v])

    def equal_on_overlap(self, other: "DerivativeField") -> bool:
        a, b = self.letters, other.letters
        both = (a != ABSENT) & (b != ABSENT)
        return bool(np.array_equal(a[both], b[both]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["normal_form", *self.ball.group.letter_names])
        for v in range(len(self.ball)):
            if not self.domain[v]:
                continue
            w.writerow([self.ball.label(v)] + ["" if x == ABSENT else int(x) for x in self.letters[v]])
        return buf.getvalue()


def load_derivative_csv(ball: Ball, text: str) -> DerivativeField:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    names = list(ball.group.letter_names)
    if header is None or header[0] != "normal_form" or header[1:] != names:
        raise ConfigError(f"derivative CSV header must be normal_form,{','.join(names)}")
    letters = np.full((len(ball), len(names)), ABSENT, dtype=np.int8)
    domain = np.zeros(len(ball), dtype=bool)
    for row in reader:
        v = ball.vertex(row[0])
        domain[v] = True
        for i, cell in enumerate(row[1:]):
            if cell.strip() == "":
                continue
            x = int(cell)
            if x not in (-1, 0, 1):
                raise ConfigError(f"letter value {x} outside {{-1,0,1}}")
            letters[v, i] = x
    return DerivativeField(ball, letters, domain)


def derivative(h: ScalarField) -> DerivativeField:
    rep = check_lipschitz(h)
    if not rep.passed:
        raise LipschitzError(f"field is not 1-Lipschitz: {rep.violations[0]}")
    ball = h.ball
    nbr = ball.nbr
    dom = h.domain
    vals = h.values
    ok = (nbr >= 0) & dom[:, None]
    safe = np.where(nbr >= 0, nbr, 0)
    ok &= dom[safe]
    letters = np.where(ok, vals[safe] - vals[:, None], ABSENT).astype(np.int8)
    return DerivativeField(ball, letters, dom.copy())


def constant_letter_field(ball: Ball, letter: Sequence[int]) -> DerivativeField:
    """Same letter at every vertex (boundary edges marked absent)."""
    letters = np.tile(np.asarray(letter, dtype=np.int8), (len(ball), 1))
    letters[ball.nbr < 0] = ABSENT
    return DerivativeField(ball, letters)


# --------------------------------------------------------------------------
# local consistency

@dataclass
class LoopReport:
    passed: bool
    value_violations: list = field(default_factory=list)
    edge_violations: list = field(default_factory=list)
    loop_violations: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"pass": self.passed, "violations": {
            "values": self.value_violations, "edges": self.edge_violations,
            "loops": self.loop_violations}}


def relator_squares(group: GroupSpec) -> list[tuple[int, int]]:
    """(letter s, letter t) for every commuting pair of generators s, t."""
    out = []
    for fi, f in enumerate(group.factors):
        if f.kind != FREE_ABELIAN:
            continue
        pos = [i for i, (fj, _, sign) in enumerate(group.letter_info) if fj == fi and sign > 0]
        out.extend((s, t) for k, s in enumerate(pos) for t in pos[k + 1:])
    return out


def square_sums(sigma: DerivativeField, s: int, t: int):
    """Yield (v, increment sum) around v -s-> . -t-> . -s'-> . -t'-> v."""
    nbr, L = sigma.ball.nbr, sigma.letters
    for v in range(len(sigma.ball)):
        v1 = nbr[v, s]
        v3 = nbr[v, t]
        if v1 < 0 or v3 < 0:
            continue
        v2 = nbr[v1, t]
        if v2 < 0:
            continue
        terms = (L[v, s], L[v1, t], L[v2, s ^ 1], L[v3, t ^ 1])
        if ABSENT in terms:
            continue
        yield v, int(sum(int(x) for x in terms))


def loop_check(sigma: DerivativeField) -> LoopReport:
    ball = sigma.ball
    names = ball.group.letter_names
    L = sigma.letters
    rep = LoopReport(True)
    bad_vals = np.argwhere((L != ABSENT) & ((L < -1) | (L > 1)))
    for v, i in bad_vals:
        rep.value_violations.append([ball.label(int(v)), names[int(i)], int(L[v, i])])
    for v, i, w in ball.edges:
        if i % 2:
            continue
        a, b = L[v, i], L[w, i ^ 1]
        if a == ABSENT or b == ABSENT:
            continue
        if a != -b:
            rep.edge_violations.append([ball.label(v), names[i], int(a), ball.label(w), names[i ^ 1], int(b)])
    for s, t in relator_squares(ball.group):
        for v, total in square_sums(sigma, s, t):
            if total:
                rep.loop_violations.append([ball.label(v), names[s], names[t], total])
    rep.passed = not (rep.value_violations or rep.edge_violations or rep.loop_violations)
    return rep


def integrate(sigma: DerivativeField, base: int, base_value: int) -> ScalarField:
    """Sum increments along paths from ``base``; requires a passing loop check."""
    rep = loop_check(sigma)
    if not rep.passed:
        cycle = (rep.value_violations or rep.edge_violations or rep.loop_violations)[0]
        raise IntegrationError(f"derivative field is path dependent at {cycle}", cycle)
    ball = sigma.ball
    if not sigma.domain[base]:
        raise PreconditionError("base vertex outside the field's domain")
    values = np.zeros(len(ball), dtype=np.int64)
    reached = np.zeros(len(ball), dtype=bool)
    values[base] = base_value
    reached[base] = True
    q = deque([base])
    while q:
        v = q.popleft()
        for i, w in ball.neighbors(v):
            x = sigma.letters[v, i]
            if x == ABSENT or reached[w]:
                continue
            values[w] = values[v] + x
            reached[w] = True
            q.append(w)
    return ScalarField(ball, values, "integrated", None if reached.all() else reached)


# --------------------------------------------------------------------------
# patterns and the shift action

@dataclass(frozen=True)
class Pattern:
    """Assignment on a finite support; ``None`` entries (or letter components) match anything."""
    support: tuple
    assignment: tuple

    def __post_init__(self):
        if not self.support:
            raise PreconditionError("pattern support must be nonempty")
        if len(self.support) != len(self.assignment):
            raise PreconditionError("pattern assignment does not cover its support")


@dataclass
class ForbiddenSet:
    support: tuple
    patterns: list

    def __post_init__(self):
        self.support = tuple(self.support)
        for p in self.patterns:
            if tuple(p.support) != self.support:
                raise PreconditionError("forbidden patterns must share one support")

    @classmethod
    def from_assignments(cls, support, assignments):
        support = tuple(support)
        return cls(support, [Pattern(support, tuple(a)) for a in assignments])

    def to_json(self, group: GroupSpec) -> str:
        def enc(x):
            return list(x) if isinstance(x, tuple) else x
        return json.dumps({
            "support": [group.format(f) for f in self.support],
            "patterns": [[enc(x) for x in p.assignment] for p in self.patterns],
        }, indent=1)


def load_forbidden_json(group: GroupSpec, text: str) -> ForbiddenSet:
    try:
        data = json.loads(text)
        support = [group.parse_element(s) for s in data["support"]]
        raw = data["patterns"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed forbidden-pattern file: {exc}") from exc

    def dec(x):
        return tuple(x) if isinstance(x, list) else x

    return ForbiddenSet.from_assignments(support, [[dec(x) for x in p] for p in raw])


@dataclass(eq=False)
class SymbolField:
    """Arbitrary hashable symbols on a ball (e.g. a two-symbol board)."""
    ball: Ball
    symbols: list

    def symbol(self, v: int):
        return self.symbols[v]


def _matches(pattern_entry, symbol) -> bool:
    if pattern_entry is None:
        return True
    if symbol is None:
        return False
    if isinstance(pattern_entry, tuple):
        if not isinstance(symbol, tuple) or len(symbol) != len(pattern_entry):
            return False
        return all(p is None or (s is not None and p == s) for p, s in zip(pattern_entry, symbol))
    return pattern_entry == symbol


@dataclass
class ScanReport:
    positions_tested: int
    matches: list  # (anchor vertex, pattern index)

    @property
    def consistent(self) -> bool:
        return not self.matches


def forbidden_scan(config, forbidden: ForbiddenSet) -> ScanReport:
    """Anchors p at which some forbidden pattern P has config(p f) = P(f) for all f.

    In the left-action convention this is a match of ``(g sigma)|_F`` for
    ``g = p^-1``.
    """
    ball = config.ball
    g = ball.group
    tested = 0
    matches = []
    for p in range(len(ball)):
        base = ball.vertices[p]
        idx = [ball.index.get(g.multiply(base, f), -1) for f in forbidden.support]
        if any(i < 0 for i in idx):
            continue
        symbols = [config.symbol(i) for i in idx]
        if any(s is None for s in symbols):
            continue
        tested += 1
        for k, pat in enumerate(forbidden.patterns):
            if all(_matches(e, s) for e, s in zip(pat.assignment, symbols)):
                matches.append((p, k))
    if tested == 0:
        raise PreconditionError("pattern support does not fit in the window at any position")
    return ScanReport(tested, matches)


def shift_act(g: Element, sigma, group: GroupSpec | None = None):
    """Left shift: (g sigma)(v) = sigma(g^-1 v), restricted to the window.

    Patterns have no window; their support moves to ``g F`` (needs ``group``).
    """
    if isinstance(sigma, Pattern):
        if group is None:
            raise PreconditionError("shifting a pattern needs its group")
        return shift_pattern(group, g, sigma)
    ball = sigma.ball
    ginv = ball.group.inverse(g)
    src = np.array([ball.translate_index(ginv, v) for v in range(len(ball))], dtype=np.int64)
    if isinstance(sigma, SymbolField):
        syms = [sigma.symbols[u] if u >= 0 else None for u in src]
        if all(s is None for s in syms):
            raise PreconditionError("translated window does not overlap the ball")
        return SymbolField(ball, syms)
    inside = src >= 0
    domain = np.zeros(len(ball), dtype=bool)
    domain[inside] = sigma.domain[src[inside]]
    if not domain.any():
        raise PreconditionError("translated window does not overlap the ball")
    letters = np.full_like(sigma.letters, ABSENT)
    letters[domain] = sigma.letters[src[domain]]
    return DerivativeField(ball, letters, domain)


def shift_pattern(group: GroupSpec, g: Element, pattern: Pattern) -> Pattern:
    return Pattern(tuple(group.multiply(g, f) for f in pattern.support), pattern.assignment)


# --------------------------------------------------------------------------

def coding_pipeline(ball: Ball, c: RayWalk, margin: int = 2):
    """Busemann field of ``c`` and its derivative, with every consistency check run."""
    if ball.group.length(ball.center) != 0 or c(0) != ball.center:
        raise PreconditionError("ray must start at the ball center")
    h = busemann(ball, c)
    if ball.radius > margin:
        rep = check_distance_like(h, margin)
        if not rep.passed:
            raise InvariantBreach(f"Busemann field failed the distance-like check: {rep.violations}")
    sigma = derivative(h)
    lrep = loop_check(sigma)
    if not lrep.passed:
        raise InvariantBreach(f"derivative failed the loop check: {lrep.to_dict()}")
    center = ball.index[ball.center]
    return normalize(h, center), sigma
