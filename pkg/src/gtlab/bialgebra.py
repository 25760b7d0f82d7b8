"""Regular Goldman bracket, regular Turaev cobracket and the based action.

All three are computed by cut-and-paste on generic realizations
(:mod:`gtlab.geometry`).  Tensors over Q<r> are stored r-balanced: every
factor but the last is moved to the taut rotation of its word and the
surplus is carried by the last factor.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .algebra import cyclic_canonical, free_reduce
from .geometry import (
    GeometryError,
    NonGenericError,
    Trace,
    corner_wrap,
    pair_intersections,
    realize,
    realize_based,
    self_intersections,
    taut_rot,
)
from .surface import FramedClass, LoopSum, SurfaceModel


class Tensor:
    """Element of (Q pi+)^{(x) k} over Q<r>, in r-balanced form."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[tuple, Fraction] | Iterable | None = None):
        self.arity = arity
        clean: dict[tuple, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for key, v in items:
            v = Fraction(v)
            if not v:
                continue
            key = balance(key)
            if len(key) != arity:
                raise ValueError(f"expected {arity} factors, got {len(key)}")
            s = clean.get(key, 0) + v
            if s:
                clean[key] = s
            else:
                clean.pop(key)
        self.terms = clean

    def __add__(self, other: "Tensor") -> "Tensor":
        if other.arity != self.arity:
            raise ValueError("arity mismatch")
        t = dict(self.terms)
        for k, v in other.terms.items():
            s = t.get(k, 0) + v
            if s:
                t[k] = s
            else:
                t.pop(k)
        out = Tensor(self.arity)
        out.terms = t
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Tensor":
        c = Fraction(c)
        out = Tensor(self.arity)
        if c:
            out.terms = {k: v * c for k, v in self.terms.items()}
        return out

    def __eq__(self, other):
        return isinstance(other, Tensor) and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: [(len(c.word), c.word, c.rot0) for c in kv[0]])

    def permute(self, order: tuple) -> "Tensor":
        return Tensor(self.arity, [(tuple(k[i] for i in order), v) for k, v in self.terms.items()])

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{v} * " + " (x) ".join(map(str, k)) for k, v in self.items())

    def to_json(self) -> list:
        return [[[list(c.word), c.rot0] for c in k] + [str(v)] for k, v in self.items()]

    @classmethod
    def from_json(cls, arity: int, data) -> "Tensor":
        return cls(arity, [(tuple(FramedClass(w, r) for w, r in row[:-1]), Fraction(row[-1])) for row in data])

    def __repr__(self):
        return f"Tensor[{self.arity}]({self.render()})"


TensorLoopSum = Tensor


def _taut(word: tuple) -> int:
    # the template's turning does not depend on how many holes the surface has
    return taut_rot(word, max((abs(x) for x in word), default=1))


def balance(key: tuple) -> tuple:
    head = tuple(FramedClass(c.word, _taut(c.word)) for c in key[:-1])
    surplus = sum(c.rot0 - h.rot0 for c, h in zip(key, head))
    last = key[-1]
    return head + (FramedClass(last.word, last.rot0 + surplus),)


def tensor(a: LoopSum, b: LoopSum) -> Tensor:
    return Tensor(2, [((x, y), u * v) for x, u in a.terms.items() for y, v in b.terms.items()])


# ---------------------------------------------------------------------------
# realization cache


@lru_cache(maxsize=4096)
def _realized(c: FramedClass, n: int, salt):
    surface = SurfaceModel(n)
    poly = realize(c, surface, salt)
    return poly, Trace(poly, surface)


def _pair_realized(a: FramedClass, b: FramedClass, n: int, salt, retries: int = 25):
    """Realizations of a and b in general position with respect to each other."""
    pa, ta = _realized(a, n, (salt, "left"))
    last = None
    for attempt in range(retries):
        pb, tb = _realized(b, n, (salt, "right", attempt))
        try:
            return pa, ta, pb, tb, pair_intersections(pa, pb)
        except NonGenericError as e:
            last = e
    raise GeometryError(f"could not put {a} and {b} in general position: {last}")


# ---------------------------------------------------------------------------
# bracket


@lru_cache(maxsize=1 << 16)
def bracket_classes(a: FramedClass, b: FramedClass, n: int, salt=0) -> LoopSum:
    """[a, b]+ = sum over a-b crossings p of eps(p) * (a smoothed into b at p)."""
    if a.is_trivial() or b.is_trivial():
        return LoopSum()
    pa, ta, pb, tb, hits = _pair_realized(a, b, n, salt)
    out: dict[FramedClass, int] = {}
    for q in hits:
        word = cyclic_canonical(ta.letters_cyclic_from(q.pos1) + tb.letters_cyclic_from(q.pos2))
        da, db = ta.dirs[q.seg1], tb.dirs[q.seg2]
        rot = ta.total + tb.total + corner_wrap(da, db) + corner_wrap(db, da)
        c = FramedClass(word, rot)
        out[c] = out.get(c, 0) + q.sign
    return LoopSum(out)


def bracket(a: LoopSum | FramedClass, b: LoopSum | FramedClass, n: int, salt=0) -> LoopSum:
    a = LoopSum.of(a) if isinstance(a, FramedClass) else a
    b = LoopSum.of(b) if isinstance(b, FramedClass) else b
    acc: dict[FramedClass, Fraction] = {}
    for x, u in a.terms.items():
        for y, v in b.terms.items():
            for c, w in bracket_classes(x, y, n, salt).terms.items():
                acc[c] = acc.get(c, 0) + u * v * w
    return LoopSum(acc)


def classical_bracket(a: Mapping[tuple, Fraction], b: Mapping[tuple, Fraction], n: int, salt=0) -> dict:
    """Goldman bracket on free homotopy classes, via blackboard lifts."""
    lift = lambda d: LoopSum({FramedClass(w, 0): v for w, v in d.items()})
    return bracket(lift(a), lift(b), n, salt).phi()


# ---------------------------------------------------------------------------
# cobracket


def split_terms(a: FramedClass, n: int, salt=0) -> list[tuple[int, FramedClass, FramedClass]]:
    """Raw (sign, a1, a2) data of every self-crossing, before r-balancing.

    a1 runs from the first passage through p to the second one, a2 is the rest;
    each is closed up at p by the short corner turn.
    """
    poly, tr = _realized(a, n, salt)
    out = []
    for q in self_intersections(poly):
        i, j = q.seg1, q.seg2
        between = tr.letters_between(q.pos1, q.pos2)
        rest = tr.letters_between(q.pos2, (len(poly.points), 0)) + tr.letters_between((-1, 0), q.pos1)
        inner = tr.wraps_between(i, j)
        out.append((
            q.sign,
            FramedClass(between, inner + corner_wrap(tr.dirs[j], tr.dirs[i])),
            FramedClass(rest, tr.total - inner + corner_wrap(tr.dirs[i], tr.dirs[j])),
        ))
    return out


@lru_cache(maxsize=1 << 16)
def cobracket_class(a: FramedClass, n: int, salt=0) -> Tensor:
    """delta+(a) = sum over self-crossings p of eps(p) (a1 (x) a2 - a2 (x) a1)."""
    out: dict[tuple, int] = {}
    for sign, c1, c2 in split_terms(a, n, salt):
        for key, v in (((c1, c2), sign), ((c2, c1), -sign)):
            key = balance(key)
            out[key] = out.get(key, 0) + v
    return Tensor(2, out)


def cobracket(a: LoopSum | FramedClass, n: int, salt=0) -> Tensor:
    a = LoopSum.of(a) if isinstance(a, FramedClass) else a
    acc = Tensor(2)
    for c, v in a.terms.items():
        acc = acc + cobracket_class(c, n, salt).scale(v)
    return acc


def cobracket_reduced(s: LoopSum, n: int, salt=0) -> Tensor:
    """delta+ on Q pi+ / Q<r>1: trivial classes are dropped first."""
    return cobracket(s.drop_trivial(), n, salt)


def classical_projection(t: Tensor) -> dict:
    """Forget rotations and quotient by the trivial class in every factor."""
    out: dict[tuple, Fraction] = {}
    for key, v in t.terms.items():
        words = tuple(c.word for c in key)
        if any(not w for w in words):
            continue
        out[words] = out.get(words, 0) + v
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# Lie bialgebra structure maps on tensors


def act(a: LoopSum, t: Tensor, n: int, salt=0) -> Tensor:
    """a . (x1 (x) ... (x) xk) = sum_i x1 (x) .. [a, xi] .. (x) xk."""
    out: dict[tuple, Fraction] = {}
    for key, v in t.terms.items():
        for pos in range(t.arity):
            for c, w in bracket(a, LoopSum.of(key[pos]), n, salt).terms.items():
                k2 = key[:pos] + (c,) + key[pos + 1:]
                out[k2] = out.get(k2, 0) + v * w
    return Tensor(t.arity, out)


def cobracket_left(t: Tensor, n: int, salt=0) -> Tensor:
    """(delta+ (x) 1) on the balanced representative."""
    out = Tensor(t.arity + 1)
    for key, v in t.terms.items():
        d = cobracket_class(key[0], n, salt)
        out = out + Tensor(t.arity + 1, [((x, y) + key[1:], v * w) for (x, y), w in d.terms.items()])
    return out


def drop_trivial_factors(t: Tensor) -> Tensor:
    """Image in (Q pi+ / Q<r>1)^{(x) k}."""
    out = Tensor(t.arity)
    out.terms = {k: v for k, v in t.terms.items() if all(c.word for c in k)}
    return out


def co_jacobi(a: LoopSum | FramedClass, n: int, salt=0) -> Tensor:
    """(1 + tau + tau^2)(delta (x) 1) delta (a) for the reduced cobracket.

    Factors are read modulo Q<r>1 at every stage.  Only there is delta+ linear
    over Q<r>, so only there is delta+ (x) 1 defined on a tensor over Q<r>.
    """
    a = LoopSum.of(a) if isinstance(a, FramedClass) else a
    d = drop_trivial_factors(cobracket_reduced(a, n, salt))
    dd = drop_trivial_factors(cobracket_left(d, n, salt))
    return dd + dd.permute((2, 0, 1)) + dd.permute((1, 2, 0))


def drinfeld_defect(a: LoopSum | FramedClass, b: LoopSum | FramedClass, n: int, salt=0) -> Tensor:
    """delta[a, b] - a.delta(b) + b.delta(a); zero for a Lie bialgebra."""
    a = LoopSum.of(a) if isinstance(a, FramedClass) else a
    b = LoopSum.of(b) if isinstance(b, FramedClass) else b
    return cobracket(bracket(a, b, n, salt), n, salt) - act(a, cobracket(b, n, salt), n, salt) + act(
        b, cobracket(a, n, salt), n, salt
    )


def jacobi_defect(a, b, c, n: int, salt=0) -> LoopSum:
    a, b, c = (LoopSum.of(x) if isinstance(x, FramedClass) else x for x in (a, b, c))
    br = lambda x, y: bracket(x, y, n, salt)
    return br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))


# ---------------------------------------------------------------------------
# action on based loops


BasedSum = dict  # (GroupWord, rot) -> Fraction


@lru_cache(maxsize=1 << 16)
def _sigma_class(c: FramedClass, word: tuple, rot: int, n: int, salt) -> tuple:
    if c.is_trivial():
        return ()
    surface = SurfaceModel(n)
    loop, lt = _realized(c, n, (salt, "loop"))
    last = None
    for attempt in range(25):
        path = realize_based(word, rot, surface, (salt, "path", attempt))
        try:
            hits = pair_intersections(loop, path)
            break
        except NonGenericError as e:
            last = e
    else:
        raise GeometryError(f"could not put {c} and based {word} in general position: {last}")
    pt = Trace(path, surface)
    out: dict[tuple, int] = {}
    for q in hits:
        before = pt.letters_between((-1, 0), q.pos2)
        after = pt.letters_between(q.pos2, (len(path.points), 0))
        w = free_reduce(before + lt.letters_cyclic_from(q.pos1) + after)
        key = (w, rot + lt.total)
        out[key] = out.get(key, 0) + q.sign
    return tuple((k, v) for k, v in out.items() if v)


def sigma_action(u: LoopSum | FramedClass, b: Iterable[int], n: int, rot: int = 0, salt=0) -> BasedSum:
    """sigma+(u) applied to the based class (b, rot): sum of eps(p) * (b rerouted through u at p)."""
    u = LoopSum.of(u) if isinstance(u, FramedClass) else u
    word = free_reduce(b)
    acc: dict[tuple, Fraction] = {}
    for c, v in u.terms.items():
        for key, s in _sigma_class(c, word, rot, n, salt):
            acc[key] = acc.get(key, 0) + v * s
    return {k: v for k, v in acc.items() if v}


def based_concat(x: BasedSum, y: BasedSum) -> BasedSum:
    out: dict[tuple, Fraction] = {}
    for (w1, r1), a in x.items():
        for (w2, r2), b in y.items():
            key = (free_reduce(w1 + w2), r1 + r2)
            out[key] = out.get(key, 0) + a * b
    return {k: v for k, v in out.items() if v}


def based_add(*xs: BasedSum) -> BasedSum:
    out: dict[tuple, Fraction] = {}
    for x in xs:
        for k, v in x.items():
            out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}
