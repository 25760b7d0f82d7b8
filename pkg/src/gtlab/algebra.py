"""Exact algebra: free-group words, truncated noncommutative series, traces.

Letters of a group word are signed integers: ``i`` stands for the generator
x_i and ``-i`` for its inverse.  A series monomial is a tuple of positive
generator indices together with an exponent of the central variable rho.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

Rat = Fraction
GroupWord = tuple  # tuple[int, ...], signed letters, freely reduced
CyclicWord = tuple  # canonical rotation of a cyclically reduced word
Key = tuple  # (monomial: tuple[int, ...], rho_exponent: int)


class AlgebraError(ValueError):
    pass


# ---------------------------------------------------------------------------
# free group words


def free_reduce(letters: Iterable[int], n: int | None = None) -> GroupWord:
    out: list[int] = []
    for a in letters:
        a = int(a)
        if a == 0 or (n is not None and abs(a) > n):
            raise AlgebraError(f"generator index {a} out of range 1..{n}")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def invert(w: GroupWord) -> GroupWord:
    return tuple(-a for a in reversed(w))


def multiply(*words: GroupWord) -> GroupWord:
    return free_reduce(a for w in words for a in w)


def _letter_key(a: int) -> tuple[int, int]:
    # x1 < x1^-1 < x2 < x2^-1 < ...
    return (abs(a), 1 if a < 0 else 0)


def min_rotation(seq: tuple, key=None) -> tuple:
    if not seq:
        return seq
    k = key or (lambda a: a)
    keyed = [k(a) for a in seq]
    m = len(seq)
    best = min(range(m), key=lambda i: keyed[i:] + keyed[:i])
    return seq[best:] + seq[:best]


def cyclic_reduce(w: GroupWord) -> GroupWord:
    w = tuple(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def cyclic_canonical(w: Iterable[int]) -> CyclicWord:
    return min_rotation(cyclic_reduce(free_reduce(w)), key=_letter_key)


def exponent_sums(w: Iterable[int], n: int) -> list[int]:
    sums = [0] * n
    for a in w:
        sums[abs(a) - 1] += 1 if a > 0 else -1
    return sums


_TOKEN = re.compile(r"^x(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str, n: int | None = None) -> GroupWord:
    """Parse ``"x1 x2^-1 x3^2"`` into a reduced word."""
    letters: list[int] = []
    pos = 0
    for tok in text.split():
        pos = text.index(tok, pos)
        m = _TOKEN.match(tok)
        if not m:
            raise AlgebraError(f"bad token {tok!r} at position {pos}")
        i = int(m.group(1))
        e = int(m.group(2)) if m.group(2) is not None else 1
        if i < 1 or (n is not None and i > n):
            raise AlgebraError(f"generator {tok!r} at position {pos} out of range 1..{n}")
        letters.extend([i if e > 0 else -i] * abs(e))
        pos += len(tok)
    return free_reduce(letters)


def format_word(w: Iterable[int]) -> str:
    w = tuple(w)
    if not w:
        return "1"
    return " ".join(f"x{a}" if a > 0 else f"x{-a}^-1" for a in w)


# ---------------------------------------------------------------------------
# truncated series


def _deg(key: Key) -> int:
    return len(key[0]) + key[1]


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_key(key: Key) -> str:
    word, k = key
    parts = []
    if k:
        parts.append("rho" if k == 1 else f"rho^{k}")
    if word:
        parts.append(".".join(f"X{i}" for i in word))
    return " * ".join(parts) if parts else "1"


def _sort_key(key: Key):
    return (_deg(key), key[1], key[0])


class _Graded:
    """Shared storage for :class:`TruncSeries` and :class:`CyclicSeries`."""

    __slots__ = ("n", "N", "terms")

    def __init__(self, n: int, N: int, terms: Mapping[Key, Fraction] | None = None):
        if n < 1 or N < 0:
            raise AlgebraError(f"bad shape n={n}, N={N}")
        self.n = n
        self.N = N
        clean: dict[Key, Fraction] = {}
        for (word, k), c in (terms or {}).items():
            if len(word) + k > N:
                continue
            c = Fraction(c)
            if c:
                key = (self._normalize(tuple(word)), int(k))
                s = clean.get(key, 0) + c
                if s:
                    clean[key] = s
                else:
                    clean.pop(key, None)
        self.terms = clean

    @staticmethod
    def _normalize(word: tuple) -> tuple:
        return word

    def _new(self, terms: dict) -> "_Graded":
        out = object.__new__(type(self))
        out.n, out.N, out.terms = self.n, self.N, terms
        return out

    def _check(self, other: "_Graded") -> None:
        if type(self) is not type(other):
            raise AlgebraError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if self.n != other.n or self.N != other.N:
            raise AlgebraError(
                f"shape mismatch: (n={self.n}, N={self.N}) vs (n={other.n}, N={other.N})"
            )

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for key, c in other.terms.items():
            s = t.get(key, 0) + c
            if s:
                t[key] = s
            else:
                t.pop(key, None)
        return self._new(t)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "_Graded":
        c = Fraction(c)
        if not c:
            return self._new({})
        return self._new({k: v * c for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, _Graded):
            return NotImplemented
        return type(self) is type(other) and (self.n, self.N) == (other.n, other.N) and self.terms == other.terms

    def __hash__(self):
        return hash((type(self).__name__, self.n, self.N, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, word: Iterable[int] = (), k: int = 0) -> Fraction:
        return self.terms.get((self._normalize(tuple(word)), k), Fraction(0))

    def degree_part(self, d: int) -> "_Graded":
        return self._new({k: c for k, c in self.terms.items() if _deg(k) == d})

    def degrees(self) -> list[int]:
        return sorted({_deg(k) for k in self.terms})

    def low_degree(self) -> int | None:
        return min((_deg(k) for k in self.terms), default=None)

    def truncate(self, M: int) -> "_Graded":
        if M > self.N:
            raise AlgebraError(f"cannot raise truncation from {self.N} to {M}")
        out = self._new({k: c for k, c in self.terms.items() if _deg(k) <= M})
        out.N = M
        return out

    def rho_free(self) -> bool:
        return all(k == 0 for _, k in self.terms)

    def at_rho_zero(self) -> "_Graded":
        return self._new({key: c for key, c in self.terms.items() if key[1] == 0})

    def drop_constants(self) -> "_Graded":
        """Quotient by the span of rho-powers (the trivial-loop span)."""
        return self._new({key: c for key, c in self.terms.items() if key[0]})

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _sort_key(kv[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt_coeff(c)} * {_fmt_key(k)}" for k, c in self.items())

    def to_json(self) -> list:
        return [[list(k[0]), k[1], _fmt_coeff(c)] for k, c in self.items()]

    @classmethod
    def from_json(cls, n: int, N: int, data: list):
        return cls(n, N, {(tuple(w), k): Fraction(c) for w, k, c in data})

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, N={self.N}, {self.render()})"


class TruncSeries(_Graded):
    """Noncommutative series in X_1..X_n and central rho, truncated at total degree N."""

    __slots__ = ()

    @classmethod
    def zero(cls, n: int, N: int) -> "TruncSeries":
        return cls(n, N)

    @classmethod
    def one(cls, n: int, N: int) -> "TruncSeries":
        return cls(n, N, {((), 0): 1})

    @classmethod
    def gen(cls, i: int, n: int, N: int) -> "TruncSeries":
        if not 1 <= i <= n:
            raise AlgebraError(f"generator index {i} out of range 1..{n}")
        return cls(n, N, {((i,), 0): 1})

    @classmethod
    def rho(cls, n: int, N: int) -> "TruncSeries":
        return cls(n, N, {((), 1): 1})

    def constant(self) -> Fraction:
        return self.terms.get(((), 0), Fraction(0))

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        self._check(other)
        N = self.N
        out: dict[Key, Fraction] = {}
        right = [(w, k, len(w) + k, c) for (w, k), c in other.terms.items()]
        for (w1, k1), c1 in self.terms.items():
            d1 = len(w1) + k1
            for w2, k2, d2, c2 in right:
                if d1 + d2 > N:
                    continue
                key = (w1 + w2, k1 + k2)
                s = out.get(key, 0) + c1 * c2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return self._new(out)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, e: int) -> "TruncSeries":
        out = TruncSeries.one(self.n, self.N)
        for _ in range(e):
            out = out * self
        return out

    def commutator(self, other: "TruncSeries") -> "TruncSeries":
        return self * other - other * self

    def with_trunc(self, N: int) -> "TruncSeries":
        """Re-truncate (down) or re-embed (up) at degree N."""
        out = self._new({k: c for k, c in self.terms.items() if _deg(k) <= N})
        out.N = N
        return out


def series_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a + b


def series_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    return a * b


def scalar_mul(c, a: TruncSeries) -> TruncSeries:
    return a.scale(c)


def magnus_expand(w: Iterable[int], n: int, N: int, kind: str = "unipotent") -> TruncSeries:
    """Image of a group word in the completed algebra.

    ``kind="unipotent"`` uses x_i -> 1 + X_i (inverses by geometric series);
    ``kind="exp"`` uses the group-like map x_i -> exp(X_i).
    """
    out: dict[Key, Fraction] = {((), 0): Fraction(1)}
    for a in w:
        i = abs(a)
        if not 1 <= i <= n:
            raise AlgebraError(f"generator index {a} out of range 1..{n}")
        if kind == "unipotent":
            coeffs = [Fraction(1), Fraction(1)] if a > 0 else [Fraction((-1) ** j) for j in range(N + 1)]
        elif kind == "exp":
            s = 1 if a > 0 else -1
            coeffs = [Fraction(s**j, math.factorial(j)) for j in range(N + 1)]
        else:
            raise AlgebraError(f"unknown expansion kind {kind!r}")
        nxt: dict[Key, Fraction] = {}
        for (word, k), c in out.items():
            room = N - len(word) - k
            for j in range(min(room, len(coeffs) - 1) + 1):
                key = (word + (i,) * j, k)
                nxt[key] = nxt.get(key, 0) + c * coeffs[j]
        out = {key: c for key, c in nxt.items() if c}
    return TruncSeries(n, N, out)


def _dense_magnus(w: Iterable[int], n: int, N: int, kind: str) -> list:
    """Degree-d parts as flat int64 arrays of length n**d (exp kind scaled by d!)."""
    parts = [np.ones(1, dtype=np.int64)] + [np.zeros(n**d, dtype=np.int64) for d in range(1, N + 1)]
    for a in w:
        i = abs(a)
        if not 1 <= i <= n:
            raise AlgebraError(f"generator index {a} out of range 1..{n}")
        s = 1 if a > 0 else -1
        nxt = [p.copy() for p in parts]
        for d in range(1, N + 1):
            for j in range(1, d + 1):
                if kind == "unipotent":
                    if s > 0 and j > 1:
                        break
                    c = s**j
                elif kind == "exp":
                    c = s**j * math.comb(d, j)
                else:
                    raise AlgebraError(f"unknown expansion kind {kind!r}")
                old = parts[d - j]
                if not old.any():
                    continue
                col = (i - 1) * ((n**j - 1) // (n - 1)) if n > 1 else 0
                nxt[d].reshape(n ** (d - j), n**j)[:, col] += c * old
        parts = nxt
    return parts


def _unflatten(idx: int, n: int, d: int) -> tuple:
    word = []
    for _ in range(d):
        idx, r = divmod(idx, n)
        word.append(r + 1)
    return tuple(reversed(word))


def magnus_sum(combo: Mapping[tuple, Fraction], n: int, N: int, kind: str = "unipotent") -> TruncSeries:
    """sum_w c_w * magnus_expand(w), vectorized; words with equal coefficients share one integer sum."""
    groups: dict[Fraction, list] = {}
    for w, c in combo.items():
        c = Fraction(c)
        if not c:
            continue
        acc = groups.get(c)
        dense = _dense_magnus(w, n, N, kind)
        if max(int(np.abs(p).max(initial=0)) for p in dense) > 1 << 40:
            # keep well inside int64 for the running sums
            return sum((magnus_expand(w, n, N, kind).scale(c) for w, c in combo.items() if c), TruncSeries.zero(n, N))
        groups[c] = dense if acc is None else [x + y for x, y in zip(acc, dense)]
    out: dict[Key, Fraction] = {}
    for c, parts in groups.items():
        for d, arr in enumerate(parts):
            scale = c / math.factorial(d) if kind == "exp" else c
            for idx in np.flatnonzero(arr):
                key = (_unflatten(int(idx), n, d), 0)
                out[key] = out.get(key, 0) + scale * int(arr[idx])
    return TruncSeries(n, N, out)


def series_log(s: TruncSeries) -> TruncSeries:
    if s.constant() != 1:
        raise AlgebraError("log needs constant term 1")
    u = s - TruncSeries.one(s.n, s.N)
    out = TruncSeries.zero(s.n, s.N)
    p = TruncSeries.one(s.n, s.N)
    for m in range(1, s.N + 1):
        p = p * u
        if p.is_zero():
            break
        out = out + p.scale(Fraction((-1) ** (m + 1), m))
    return out


def series_exp(s: TruncSeries) -> TruncSeries:
    if s.constant() != 0:
        raise AlgebraError("exp needs constant term 0")
    out = TruncSeries.one(s.n, s.N)
    p = TruncSeries.one(s.n, s.N)
    for m in range(1, s.N + 1):
        p = p * s
        if p.is_zero():
            break
        out = out + p.scale(Fraction(1, math.factorial(m)))
    return out


def bch(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    if a.constant() or b.constant():
        raise AlgebraError("bch arguments must have zero constant term")
    return series_log(series_exp(a) * series_exp(b))


def left_bracketing(word: tuple, n: int, N: int) -> TruncSeries:
    """[[..[X_a1, X_a2], ..], X_ad] expanded in the tensor algebra."""
    out = TruncSeries(n, N, {((word[0],), 0): 1})
    for a in word[1:]:
        out = out.commutator(TruncSeries.gen(a, n, N))
    return out


@lru_cache(maxsize=None)
def _left_bracketing_terms(word: tuple) -> dict:
    terms = {(word[0],): 1}
    for a in word[1:]:
        nxt: dict = {}
        for w, c in terms.items():
            nxt[w + (a,)] = nxt.get(w + (a,), 0) + c
            nxt[(a,) + w] = nxt.get((a,) + w, 0) - c
        terms = {w: c for w, c in nxt.items() if c}
    return terms


def dynkin_defect(s: TruncSeries) -> TruncSeries:
    """Degreewise ``dynkin(P_d) - d * P_d`` on the rho-free part; zero iff s is Lie."""
    out: dict[Key, Fraction] = {}
    for (word, k), c in s.terms.items():
        if k:
            continue
        d = len(word)
        if d == 0:
            out[((), 0)] = out.get(((), 0), 0) + c  # constants are never Lie
            continue
        for w, m in _left_bracketing_terms(word).items():
            out[(w, 0)] = out.get((w, 0), 0) + c * m
        out[(word, 0)] = out.get((word, 0), 0) - d * c
    return TruncSeries(s.n, s.N, out)


def is_lie(s: TruncSeries) -> bool:
    """Dynkin–Specht–Wever test applied to every homogeneous rho-free component."""
    return dynkin_defect(s).is_zero()


def right_partial(s: TruncSeries, i: int) -> TruncSeries:
    if not s.rho_free():
        raise AlgebraError("right_partial needs a rho-free series")
    if not 1 <= i <= s.n:
        raise AlgebraError(f"generator index {i} out of range 1..{s.n}")
    return TruncSeries(
        s.n, s.N, {(w[:-1], 0): c for (w, _), c in s.terms.items() if w and w[-1] == i}
    )


@lru_cache(maxsize=1 << 16)
def necklace(word: tuple) -> tuple:
    return min_rotation(word)


class CyclicSeries(_Graded):
    """Series modulo cyclic permutation of monomials (the trace space)."""

    __slots__ = ()

    @staticmethod
    def _normalize(word: tuple) -> tuple:
        return necklace(word)


def cyclic_project(s: TruncSeries) -> CyclicSeries:
    return CyclicSeries(s.n, s.N, s.terms)


GradedTrace = CyclicSeries


def parse_series(text: str, n: int, N: int, cls=TruncSeries):
    """Inverse of ``render``: terms ``coeff * rho^k * X1.X2`` joined by `` + ``."""
    if text.strip() == "0":
        return cls(n, N)
    terms: dict[Key, Fraction] = {}
    pos = 0
    for chunk in text.split(" + "):
        start = text.index(chunk, pos)
        pos = start + len(chunk)
        parts = [p.strip() for p in chunk.split("*")]
        try:
            c = Fraction(parts[0])
            k, word = 0, ()
            for p in parts[1:]:
                if p == "1":
                    continue
                if p.startswith("rho"):
                    k = int(p[4:]) if p.startswith("rho^") else 1
                    continue
                word = tuple(int(x[1:]) for x in p.split(".") if x.startswith("X") or _bad(x))
        except (ValueError, ZeroDivisionError):
            raise AlgebraError(f"bad term {chunk.strip()!r} at position {start}") from None
        if any(not 1 <= i <= n for i in word):
            raise AlgebraError(f"generator out of range 1..{n} in {chunk.strip()!r} at position {start}")
        terms[(word, k)] = terms.get((word, k), 0) + c
    return cls(n, N, terms)


def _bad(token: str):
    raise ValueError(token)
