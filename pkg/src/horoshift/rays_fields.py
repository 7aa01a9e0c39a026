"""Integer scalar fields on a ball: Busemann functions and axiom checkers."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .cayley_ball import Ball
from .errors import ConfigError, InvariantBreach, PreconditionError, StabilizationError
from .group_model import Element, RayWalk


@dataclass(eq=False)
class ScalarField:
    """Integer values on the vertices of a ball.

    ``defined`` masks a partial field (e.g. a translate); None means total.
    """
    ball: Ball
    values: np.ndarray
    provenance: str = "synthetic"
    defined: np.ndarray | None = None
    t_stab: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if self.values.shape != (len(self.ball),):
            raise PreconditionError("field length does not match the ball")

    def __call__(self, v: int) -> int:
        return int(self.values[v])

    def is_defined(self, v: int) -> bool:
        return self.defined is None or bool(self.defined[v])

    @property
    def domain(self) -> np.ndarray:
        if self.defined is None:
            return np.ones(len(self.ball), dtype=bool)
        return self.defined

    def equal_on_overlap(self, other: "ScalarField") -> bool:
        mask = self.domain & other.domain
        return bool(np.array_equal(self.values[mask], other.values[mask]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["normal_form", "h_value"])
        for v in range(len(self.ball)):
            w.writerow([self.ball.label(v), int(self.values[v]) if self.is_defined(v) else ""])
        return buf.getvalue()


def field_from_function(ball: Ball, fn, provenance="synthetic") -> ScalarField:
    return ScalarField(ball, np.array([fn(x) for x in ball.vertices], dtype=np.int64), provenance)


def load_field_csv(ball: Ball, text: str) -> ScalarField:
    values = np.zeros(len(ball), dtype=np.int64)
    defined = np.zeros(len(ball), dtype=bool)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "normal_form" not in reader.fieldnames or "h_value" not in reader.fieldnames:
        raise ConfigError("field CSV needs columns normal_form,h_value")
    for row in reader:
        v = ball.vertex(row["normal_form"])
        if row["h_value"].strip() == "":
            continue
        try:
            values[v] = int(row["h_value"])
        except ValueError as exc:
            raise ConfigError(f"non-integer field value {row['h_value']!r}") from exc
        defined[v] = True
    return ScalarField(ball, values, "file", None if defined.all() else defined)


def normalize(h: ScalarField, p: int) -> ScalarField:
    """Representative of the class of ``h`` modulo constants with value 0 at ``p``."""
    return ScalarField(h.ball, h.values - h.values[p], h.provenance, h.defined)


def translate(h: ScalarField, g: Element) -> ScalarField:
    """(g.h)(v) = h(g^-1 v) on the vertices where that is inside the ball."""
    ball = h.ball
    ginv = ball.group.inverse(g)
    values = np.zeros(len(ball), dtype=np.int64)
    defined = np.zeros(len(ball), dtype=bool)
    for v in range(len(ball)):
        u = ball.translate_index(ginv, v)
        if u >= 0 and h.is_defined(u):
            values[v] = h.values[u]
            defined[v] = True
    return ScalarField(ball, values, h.provenance, defined)


# --------------------------------------------------------------------------
# Busemann functions

def busemann(ball: Ball, c: RayWalk, window: int | None = None, t_max: int | None = None) -> ScalarField:
    """h(v) = lim d(v, c(t)) - t, certified by window constancy.

    The sequence is nonincreasing and bounded below, so once it has been
    constant over ``window`` consecutive steps the limit is reached (for
    eventually periodic rays).  Per-vertex stabilization times are kept in
    ``t_stab``.
    """
    g = ball.group
    R = ball.radius
    if window is None:
        window = 2 * R + len(c.period)
    if t_max is None:
        t_max = 10 * max(R, 1)
        if c.finite:
            t_max = min(t_max, c.max_t)
    pts = c.points(t_max)
    letters = [c.letter(t) for t in range(1, t_max + 1)]
    values = np.zeros(len(ball), dtype=np.int64)
    tstab = np.zeros(len(ball), dtype=np.int64)
    failed = []
    for v, x in enumerate(ball.vertices):
        u = g.multiply(g.inverse(x), pts[0])
        prev = g.length(u)
        lower = -prev
        start, run = 0, 0
        done = False
        for t in range(1, t_max + 1):
            u = g.mul_letter(u, letters[t - 1])
            val = g.length(u) - t
            if val > prev or val < lower:
                raise InvariantBreach(
                    f"Busemann sequence misbehaves at {ball.label(v)}, t={t}"
                )
            if val == prev:
                run += 1
                if run >= window:
                    done = True
                    break
            else:
                start, run = t, 0
            prev = val
        if not done:
            failed.append(ball.label(v))
            continue
        values[v] = prev
        tstab[v] = start
    if failed:
        raise StabilizationError(
            f"Busemann values did not stabilize within t <= {t_max} "
            f"(window {window}) at {len(failed)} vertices", failed
        )
    return ScalarField(ball, values, "busemann-of-ray", t_stab=tstab)


# --------------------------------------------------------------------------
# checkers

@dataclass
class Report:
    passed: bool
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"pass": self.passed, "violations": self.violations, "notes": self.notes}


def check_lipschitz(h: ScalarField) -> Report:
    bad = []
    for v, i, w in h.ball.edges:
        if v < w and h.is_defined(v) and h.is_defined(w):
            if abs(int(h.values[v]) - int(h.values[w])) > 1:
                bad.append({"edge": [h.ball.label(v), h.ball.group.letter_names[i], h.ball.label(w)],
                            "jump": int(h.values[w] - h.values[v])})
    return Report(not bad, bad)


@dataclass(frozen=True)
class LevelSet:
    level: int
    members: frozenset

    @property
    def empty(self) -> bool:
        return not self.members


def level_set(h: ScalarField, level: int) -> LevelSet:
    return LevelSet(level, frozenset(int(v) for v in np.flatnonzero((h.values == level) & h.domain)))


def check_distance_like(h: ScalarField, margin: int) -> Report:
    """Check h(x) = lam + d(x, h^-1(lam)) for x in the inner ball, lam >= min h + margin.

    Distances to the level set are global word-metric distances, restricted
    to level-set members inside the ball.
    """
    ball = h.ball
    if margin < 0:
        raise PreconditionError("margin must be nonnegative")
    if margin >= ball.radius and ball.radius > 0:
        raise PreconditionError(f"margin {margin} leaves no inner ball at radius {ball.radius}")
    vals = h.values
    dom = h.domain
    lo = int(vals[dom].min()) + margin
    hi = int(vals[dom].max())
    inner = [v for v in range(len(ball)) if dom[v] and ball.dist_from_center[v] <= ball.radius - margin]
    levels = {lam: np.flatnonzero((vals == lam) & dom) for lam in range(lo, hi + 1)}
    worst = None
    count = 0
    for x in inner:
        hx = int(vals[x])
        if hx < lo:
            continue
        row = ball.dist_row(x)
        for lam in range(lo, hx + 1):
            members = levels[lam]
            count += 1
            if len(members) == 0:
                v = {"x": ball.label(x), "level": lam, "h(x)": hx, "distance": None}
                worst = worst or v
                continue
            d = int(row[members].min())
            if hx != lam + d:
                gap = abs(hx - lam - d)
                v = {"x": ball.label(x), "level": lam, "h(x)": hx, "lam+d": lam + d, "gap": gap}
                if worst is None or worst.get("gap") is None or gap > worst["gap"]:
                    worst = v
    notes = [f"checked {count} (x, level) pairs"]
    if hi == lo - margin:
        notes.append("degenerate range: single-level field")
    if lo - margin == int(vals[dom].min()):
        notes.append("field is bounded below on the window; unbounded-below behavior not witnessed")
    return Report(worst is None, [] if worst is None else [worst], notes)
