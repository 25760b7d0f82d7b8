"""The disk with n holes, framings, and regular homotopy classes of loops.

A framed class is stored in blackboard coordinates: the free homotopy class
(a canonical cyclic word) plus the turning number of the loop in the plane.
Other framings only enter through :func:`rot_f`, :func:`s_f` and :func:`eps_f`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .algebra import (
    AlgebraError,
    TruncSeries,
    cyclic_canonical,
    exponent_sums,
    format_word,
    parse_word,
)


@dataclass(frozen=True)
class SurfaceModel:
    """Sigma_{0,n+1}: hole i sits at (i * spacing, 0); gate i is the ray below it."""

    n: int
    spacing: int = 1_000_000

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one hole, got {self.n}")

    def hole(self, i: int) -> tuple[int, int]:
        return (i * self.spacing, 0)

    @property
    def gates(self) -> list[int]:
        return [i * self.spacing for i in range(1, self.n + 1)]


@dataclass(frozen=True)
class Framing:
    shifts: tuple[int, ...]

    @classmethod
    def blackboard(cls, n: int) -> "Framing":
        return cls((0,) * n)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Framing":
        shifts = tuple(int(t) for t in text.split(",") if t.strip())
        if n is not None and len(shifts) != n:
            raise ValueError(f"framing {text!r} has {len(shifts)} entries, expected {n}")
        return cls(shifts)

    def pairing(self, word: Iterable[int]) -> int:
        sums = exponent_sums(word, len(self.shifts))
        return sum(c * e for c, e in zip(self.shifts, sums))

    def __str__(self):
        return ",".join(map(str, self.shifts))


@dataclass(frozen=True, order=True)
class FramedClass:
    word: tuple
    rot0: int

    def __init__(self, word: Iterable[int], rot0: int):
        object.__setattr__(self, "word", cyclic_canonical(word))
        object.__setattr__(self, "rot0", int(rot0))

    def is_trivial(self) -> bool:
        return not self.word

    def __str__(self):
        return f"{{{format_word(self.word)}; {self.rot0}}}"

    __repr__ = __str__


def r_action(c: FramedClass, k: int = 1) -> FramedClass:
    return FramedClass(c.word, c.rot0 + k)


def phi(c: FramedClass) -> tuple:
    return c.word


def rot_f(c: FramedClass, f: Framing | None = None) -> int:
    if f is None:
        return c.rot0
    return c.rot0 + f.pairing(c.word)


def tilde_phi_f(c: FramedClass, f: Framing | None = None) -> tuple[tuple, int]:
    return (c.word, rot_f(c, f))


def tilde_phi_f_inverse(word: Iterable[int], m: int, f: Framing | None = None) -> FramedClass:
    word = cyclic_canonical(word)
    shift = f.pairing(word) if f is not None else 0
    return FramedClass(word, m - shift)


def s_f(word: Iterable[int], f: Framing | None = None) -> FramedClass:
    return tilde_phi_f_inverse(word, 0, f)


class LoopSum:
    """Finite rational combination of framed classes."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[FramedClass, Fraction] | Iterable | None = None):
        clean: dict[FramedClass, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for c, v in items:
            v = Fraction(v)
            if v:
                s = clean.get(c, 0) + v
                if s:
                    clean[c] = s
                else:
                    clean.pop(c)
        self.terms = clean

    @classmethod
    def of(cls, c: FramedClass, coeff=1) -> "LoopSum":
        return cls({c: coeff})

    def __add__(self, other: "LoopSum") -> "LoopSum":
        t = dict(self.terms)
        for c, v in other.terms.items():
            s = t.get(c, 0) + v
            if s:
                t[c] = s
            else:
                t.pop(c)
        out = LoopSum()
        out.terms = t
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "LoopSum":
        return LoopSum({k: v * Fraction(c) for k, v in self.terms.items()})

    __rmul__ = scale

    def __eq__(self, other):
        return isinstance(other, LoopSum) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0].word), kv[0].word, kv[0].rot0))

    def map_classes(self, fn) -> "LoopSum":
        out: dict = {}
        for c, v in self.terms.items():
            k = fn(c)
            out[k] = out.get(k, 0) + v
        return LoopSum(out)

    def drop_trivial(self) -> "LoopSum":
        return LoopSum({c: v for c, v in self.terms.items() if c.word})

    def phi(self) -> dict:
        """Classical image: cyclic word -> coefficient."""
        out: dict = {}
        for c, v in self.terms.items():
            out[c.word] = out.get(c.word, 0) + v
        return {w: v for w, v in out.items() if v}

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{v} * {c}" for c, v in self.items())

    def to_json(self) -> list:
        return [[list(c.word), c.rot0, str(v)] for c, v in self.items()]

    @classmethod
    def from_json(cls, data) -> "LoopSum":
        return cls({FramedClass(w, r): Fraction(v) for w, r, v in data})

    def __repr__(self):
        return f"LoopSum({self.render()})"


def eps_f(s: LoopSum | FramedClass, f: Framing | None, n: int, N: int) -> TruncSeries:
    """epsilon_f(beta) = r^{rot_f(beta)} = exp(rot_f(beta) * rho), extended linearly."""
    if isinstance(s, FramedClass):
        s = LoopSum.of(s)
    by_rot: dict[int, Fraction] = {}
    for c, v in s.terms.items():
        m = rot_f(c, f)
        by_rot[m] = by_rot.get(m, 0) + v
    terms: dict = {}
    for m, v in by_rot.items():
        for k in range(N + 1):
            terms[((), k)] = terms.get(((), k), 0) + v * Fraction(m**k, math.factorial(k))
    return TruncSeries(n, N, terms)


_LITERAL = re.compile(r"^\{\s*([^;{}]*);\s*([^;{}]+?)\s*\}$")


def parse_loop(text: str, n: int | None = None, taut=None) -> FramedClass:
    """Parse ``{x1 x2; 0}``; the rotation ``taut`` (or ``taut+k``) needs a resolver."""
    m = _LITERAL.match(text.strip())
    if not m:
        raise AlgebraError(f"bad loop literal {text!r}: expected '{{word; rot}}'")
    word_text, rot_text = m.group(1).strip(), m.group(2).replace(" ", "")
    word = parse_word("" if word_text == "1" else word_text, n)
    if rot_text.startswith("taut"):
        if taut is None:
            raise AlgebraError(f"'taut' in {text!r} needs a surface")
        rest = rot_text[4:]
        try:
            offset = int(rest) if rest else 0
        except ValueError:
            raise AlgebraError(f"bad rotation {m.group(2)!r} in {text!r}") from None
        return FramedClass(word, taut(word) + offset)
    try:
        return FramedClass(word, int(rot_text))
    except ValueError:
        raise AlgebraError(f"bad rotation {m.group(2)!r} in {text!r}") from None


def parse_loop_sum(text: str, n: int | None = None, taut=None) -> LoopSum:
    """Inverse of ``LoopSum.render``: ``coeff * {word; rot}`` terms joined by `` + ``; a bare literal means coeff 1."""
    text = text.strip()
    if text == "0":
        return LoopSum()
    out: dict[FramedClass, Fraction] = {}
    pos = 0
    for chunk in text.split(" + "):
        start = text.index(chunk, pos)
        pos = start + len(chunk)
        coeff, _, lit = chunk.rpartition("*") if "*" in chunk else ("1", "", chunk)
        try:
            v = Fraction(coeff.strip())
        except (ValueError, ZeroDivisionError):
            raise AlgebraError(f"bad coefficient {coeff.strip()!r} at position {start}") from None
        c = parse_loop(lit, n, taut)
        out[c] = out.get(c, 0) + v
    return LoopSum(out)
