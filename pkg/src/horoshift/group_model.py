"""Exact word problem for free products of free-abelian and free groups.

An element is stored in its alternating normal form: a tuple of syllables
``(factor_index, payload)``.  For a free-abelian factor the payload is the
integer coordinate vector; for a free factor it is the freely reduced word,
one signed int per letter (``+(k+1)`` for the k-th generator, ``-(k+1)`` for
its inverse).  Adjacent syllables always come from different factors, so the
tuple is unique per group element and hashable.

Generators are symmetrized in declared order: ``a, a', b, b', ...``.  Letter
``i`` has inverse ``i ^ 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, PreconditionError

Element = tuple
IDENTITY: Element = ()

FREE_ABELIAN = "free_abelian"
FREE = "free"


@dataclass(frozen=True)
class Factor:
    kind: str
    rank: int
    generator_names: tuple

    def __post_init__(self):
        if self.kind not in (FREE_ABELIAN, FREE):
            raise ConfigError(f"unknown factor kind {self.kind!r}")
        if self.rank < 1:
            raise ConfigError("every factor needs at least one generator")
        if len(self.generator_names) != self.rank:
            raise ConfigError(
                f"factor of rank {self.rank} lists {len(self.generator_names)} generator names"
            )


class GroupSpec:
    """A free product ``A_1 * ... * A_k`` of copies of Z^d and F_m."""

    def __init__(self, factors: Sequence[Factor]):
        if not factors:
            raise ConfigError("a group needs at least one factor")
        self.factors = tuple(factors)
        names = [n for f in self.factors for n in f.generator_names]
        if len(set(names)) != len(names):
            raise ConfigError(f"generator names must be unique: {names}")
        for n in names:
            if not n or "'" in n or "^" in n or " " in n or n == "1":
                raise ConfigError(f"invalid generator name {n!r}")

        self.generator_names = tuple(names)
        self.letter_names: list[str] = []
        # (factor, local index, sign) per letter
        self.letter_info: list[tuple[int, int, int]] = []
        self.letters: list[Element] = []
        self._letter_index: dict[str, int] = {}
        for fi, f in enumerate(self.factors):
            for k, n in enumerate(f.generator_names):
                for sign, label in ((1, n), (-1, n + "'")):
                    self._letter_index[label] = len(self.letter_names)
                    self.letter_names.append(label)
                    self.letter_info.append((fi, k, sign))
                    if f.kind == FREE_ABELIAN:
                        vec = [0] * f.rank
                        vec[k] = sign
                        payload = tuple(vec)
                    else:
                        payload = (sign * (k + 1),)
                    self.letters.append(((fi, payload),))
        self._gen_lookup = {n: i for i, n in enumerate(self.generator_names)}

    # -- construction -----------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "GroupSpec":
        try:
            raw = data["factors"]
            factors = [
                Factor(f["kind"], int(f["rank"]), tuple(f["generator_names"]))
                for f in raw
            ]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed group spec: {exc}") from exc
        return cls(factors)

    def to_dict(self) -> dict:
        return {
            "factors": [
                {"kind": f.kind, "rank": f.rank, "generator_names": list(f.generator_names)}
                for f in self.factors
            ]
        }

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        parts = []
        for f in self.factors:
            tag = "Z^%d" % f.rank if f.kind == FREE_ABELIAN else "F_%d" % f.rank
            parts.append(f"{tag}<{','.join(f.generator_names)}>")
        return "GroupSpec(" + " * ".join(parts) + ")"

    @property
    def num_letters(self) -> int:
        return len(self.letters)

    @property
    def is_tree(self) -> bool:
        """True when the Cayley graph is a tree (every factor free)."""
        return all(f.kind == FREE for f in self.factors)

    def inverse_letter(self, i: int) -> int:
        return i ^ 1

    # -- arithmetic -------------------------------------------------------
    def _combine(self, s1, s2):
        fi = s1[0]
        if self.factors[fi].kind == FREE_ABELIAN:
            vec = tuple(x + y for x, y in zip(s1[1], s2[1]))
            return (fi, vec) if any(vec) else None
        word = list(s1[1])
        other = s2[1]
        j = 0
        while word and j < len(other) and word[-1] == -other[j]:
            word.pop()
            j += 1
        word.extend(other[j:])
        return (fi, tuple(word)) if word else None

    def multiply(self, a: Element, b: Element) -> Element:
        if not a:
            return b
        if not b:
            return a
        left = list(a)
        i = 0
        while i < len(b) and left and left[-1][0] == b[i][0]:
            merged = self._combine(left.pop(), b[i])
            i += 1
            if merged is not None:
                left.append(merged)
                break
        left.extend(b[i:])
        return tuple(left)

    def inverse(self, a: Element) -> Element:
        out = []
        for fi, p in reversed(a):
            if self.factors[fi].kind == FREE_ABELIAN:
                out.append((fi, tuple(-x for x in p)))
            else:
                out.append((fi, tuple(-x for x in reversed(p))))
        return tuple(out)

    def length(self, a: Element) -> int:
        n = 0
        for fi, p in a:
            if self.factors[fi].kind == FREE_ABELIAN:
                n += sum(abs(x) for x in p)
            else:
                n += len(p)
        return n

    def distance(self, a: Element, b: Element) -> int:
        return self.length(self.multiply(self.inverse(a), b))

    def mul_letter(self, a: Element, i: int) -> Element:
        return self.multiply(a, self.letters[i])

    def word_element(self, word: Iterable[int]) -> Element:
        g = IDENTITY
        for i in word:
            g = self.multiply(g, self.letters[i])
        return g

    def element_word(self, a: Element) -> list[int]:
        """A geodesic word (letter indices) spelling ``a``."""
        word = []
        for fi, p in a:
            base = sum(2 * f.rank for f in self.factors[:fi])
            if self.factors[fi].kind == FREE_ABELIAN:
                for k, x in enumerate(p):
                    word.extend([base + 2 * k + (0 if x > 0 else 1)] * abs(x))
            else:
                for x in p:
                    word.append(base + 2 * (abs(x) - 1) + (0 if x > 0 else 1))
        return word

    # -- text forms -------------------------------------------------------
    def parse_word(self, text: str) -> list[int]:
        """Parse ``"a b' a^3"``: names separated by spaces, ``'`` for inverse."""
        word = []
        for tok in text.split():
            if tok == "1":
                continue
            exp = 1
            name = tok
            if "^" in tok:
                name, _, e = tok.partition("^")
                try:
                    exp = int(e)
                except ValueError as exc:
                    raise ConfigError(f"bad exponent in {tok!r}") from exc
            if name.endswith("'"):
                name = name[:-1]
                exp = -exp
            if name not in self._gen_lookup:
                raise ConfigError(f"unknown generator {name!r} in {text!r}")
            letter = self._letter_index[name] if exp > 0 else self._letter_index[name + "'"]
            word.extend([letter] * abs(exp))
        return word

    def parse_element(self, text: str) -> Element:
        return self.word_element(self.parse_word(text))

    def format(self, a: Element) -> str:
        if not a:
            return "1"
        toks = []

        def tok(name, k):
            if k == 1:
                return name
            if k == -1:
                return name + "'"
            return f"{name}^{k}"

        for fi, p in a:
            f = self.factors[fi]
            if f.kind == FREE_ABELIAN:
                toks.extend(tok(f.generator_names[k], x) for k, x in enumerate(p) if x)
            else:
                run_letter, run = None, 0
                for x in p:
                    if x == run_letter:
                        run += 1 if x > 0 else -1
                        continue
                    if run_letter is not None:
                        toks.append(tok(f.generator_names[abs(run_letter) - 1], run))
                    run_letter, run = x, (1 if x > 0 else -1)
                toks.append(tok(f.generator_names[abs(run_letter) - 1], run))
        return " ".join(toks)

    def format_word(self, word: Sequence[int]) -> str:
        return " ".join(self.letter_names[i] for i in word)


def load_group(source) -> GroupSpec:
    """Load a group from a JSON path or an already-parsed dict."""
    if isinstance(source, GroupSpec):
        return source
    if isinstance(source, dict):
        return GroupSpec.from_dict(source)
    try:
        data = json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read group spec {source}: {exc}") from exc
    return GroupSpec.from_dict(data)


def free_abelian(*names: str) -> GroupSpec:
    return GroupSpec([Factor(FREE_ABELIAN, len(names), tuple(names))])


def free_group(*names: str) -> GroupSpec:
    return GroupSpec([Factor(FREE, len(names), tuple(names))])


# --------------------------------------------------------------------------
# rays

DEFAULT_RAY_HORIZON = 4 * 16


class RayWalk:
    """Geodesic ray spelled by ``prefix . period^oo``.

    With an empty period the ray is a *finite prefix ray*: it is only defined
    for ``t <= len(prefix)`` and consumers must stay within that horizon.
    Geodesicity (``|c(t)| == t``) is verified eagerly up to ``horizon`` and
    lazily beyond it via :meth:`ensure_verified`.
    """

    def __init__(self, group: GroupSpec, prefix: Sequence[int], period: Sequence[int] = (),
                 horizon: int | None = None):
        self.group = group
        self.prefix = tuple(prefix)
        self.period = tuple(period)
        for i in self.prefix + self.period:
            if not 0 <= i < group.num_letters:
                raise ConfigError(f"letter index {i} out of range")
        if self.finite:
            if not self.prefix:
                raise ConfigError("a finite prefix ray needs a nonempty prefix")
            self.max_t = len(self.prefix)
        else:
            self.max_t = None
        self._points = [IDENTITY]
        if horizon is None:
            horizon = self.max_t if self.finite else DEFAULT_RAY_HORIZON + len(self.period)
        self.ensure_verified(horizon)

    @classmethod
    def from_text(cls, group: GroupSpec, prefix: str, period: str = "", horizon=None):
        return cls(group, group.parse_word(prefix), group.parse_word(period), horizon)

    @property
    def finite(self) -> bool:
        return not self.period

    @property
    def verified_horizon(self) -> int:
        return len(self._points) - 1

    def letter(self, t: int) -> int:
        """The letter taking c(t-1) to c(t), t >= 1."""
        if t <= len(self.prefix):
            return self.prefix[t - 1]
        if self.finite:
            raise PreconditionError(f"finite prefix ray undefined beyond t={self.max_t}")
        return self.period[(t - 1 - len(self.prefix)) % len(self.period)]

    def ensure_verified(self, t_max: int) -> None:
        if self.finite and t_max > self.max_t:
            raise PreconditionError(
                f"finite prefix ray has horizon {self.max_t}, {t_max} requested"
            )
        g = self.group
        while len(self._points) <= t_max:
            t = len(self._points)
            p = g.mul_letter(self._points[-1], self.letter(t))
            if g.length(p) != t:
                raise PreconditionError(
                    f"ray word is not geodesic: |c({t})| = {g.length(p)}"
                )
            self._points.append(p)

    def __call__(self, t: int) -> Element:
        return ray_eval(self, t)

    def points(self, t_max: int) -> list[Element]:
        self.ensure_verified(t_max)
        return self._points[: t_max + 1]

    def to_dict(self) -> dict:
        return {
            "prefix": self.group.format_word(self.prefix),
            "period": self.group.format_word(self.period),
        }

    def __repr__(self):
        return f"RayWalk(prefix={self.group.format_word(self.prefix)!r}, period={self.group.format_word(self.period)!r})"


def ray_eval(c: RayWalk, t: int) -> Element:
    if t < 0:
        raise PreconditionError("ray parameter must be nonnegative")
    c.ensure_verified(t)
    return c._points[t]


def load_ray(group: GroupSpec, source, horizon=None) -> RayWalk:
    if isinstance(source, RayWalk):
        return source
    if not isinstance(source, dict):
        try:
            source = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read ray spec: {exc}") from exc
    try:
        prefix, period = source.get("prefix", ""), source.get("period", "")
    except AttributeError as exc:
        raise ConfigError("ray spec must be a JSON object") from exc
    return RayWalk.from_text(group, prefix, period, horizon)
