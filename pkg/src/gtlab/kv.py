"""Completed layer: twist logarithms, L+, the canonical section, ES and div.

Completed elements are handled through finite loop sums.  A logarithm of a
loop C is expanded in powers of (C - 1) up to a cutoff, then re-expanded into
honest powers C^j, so every input handed to the geometric engine is finite.
Classical (rotation-free) loop sums are plain ``{cyclic word: coefficient}``
dicts.  Expansions into the trace space use the group-like coordinates
x_i -> exp(X_i) unless a caller asks otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from . import bialgebra as bi
from .algebra import (
    CyclicSeries,
    TruncSeries,
    cyclic_canonical,
    cyclic_project,
    dynkin_defect,
    free_reduce,
    magnus_expand,
    magnus_sum,
    right_partial,
    series_exp,
    series_log,
)
from .geometry import realize, self_intersections, taut_rot
from .surface import FramedClass, Framing, LoopSum, SurfaceModel, rot_f, s_f

ClassicalSum = dict  # cyclic word -> Fraction


class KVError(ValueError):
    """A precondition of the completed layer failed; carries a witness."""


# ---------------------------------------------------------------------------
# (x - 1)-adic bookkeeping


def log_power_coeffs(k: int, M: int) -> list[Fraction]:
    """Coefficients a_m with (log x)^k = sum_m a_m (x - 1)^m, for m <= M."""
    log = [Fraction(0)] + [Fraction((-1) ** (m + 1), m) for m in range(1, M + 1)]
    out = [Fraction(1)] + [Fraction(0)] * M
    for _ in range(k):
        nxt = [Fraction(0)] * (M + 1)
        for i, a in enumerate(out):
            if a:
                for j in range(1, M + 1 - i):
                    nxt[i + j] += a * log[j]
        out = nxt
    return out


def to_powers(a: list[Fraction]) -> list[Fraction]:
    """Rewrite sum_m a_m (x - 1)^m as sum_j c_j x^j."""
    c = [Fraction(0)] * len(a)
    for m, am in enumerate(a):
        if am:
            for j in range(m + 1):
                c[j] += am * math.comb(m, j) * (-1) ** (m - j)
    return c


def _power(word: tuple, j: int) -> tuple:
    return free_reduce(tuple(word) * j)


def classical(s: LoopSum | Mapping) -> ClassicalSum:
    if isinstance(s, LoopSum):
        return s.phi()
    out: dict = {}
    for w, v in s.items():
        w = cyclic_canonical(w)
        out[w] = out.get(w, 0) + Fraction(v)
    return {w: v for w, v in out.items() if v}


def trace_expand(x: Mapping, n: int, N: int, kind: str = "exp") -> CyclicSeries:
    """|expansion| of a classical loop sum, constants dropped (they are Q1)."""
    return cyclic_project(magnus_sum(classical(x), n, N, kind)).drop_constants()


def tilde_phi_series(s: LoopSum, f: Framing | None, n: int, N: int, kind: str = "unipotent") -> CyclicSeries:
    """Phi~_f on a regular loop sum: (w, rot) -> |w| exp(rot_f * rho), constants dropped."""
    by_rot: dict[int, dict] = {}
    for c, v in s.terms.items():
        d = by_rot.setdefault(rot_f(c, f), {})
        d[c.word] = d.get(c.word, 0) + v
    out = CyclicSeries(n, N)
    for m, words in by_rot.items():
        base = magnus_sum(words, n, N, kind)
        weight = TruncSeries(n, N, {((), k): Fraction(m**k, math.factorial(k)) for k in range(N + 1)})
        out = out + cyclic_project(base * weight)
    return out.drop_constants()


def log_product(A: Iterable[int], B: Iterable[int], M: int) -> ClassicalSum:
    """|log(A) log(B)| as a classical loop sum, cut at total (A-1),(B-1)-degree M."""
    A, B = free_reduce(A), free_reduce(B)
    a = log_power_coeffs(1, M)
    out: dict = {}
    for m, am in enumerate(a):
        for k, bk in enumerate(a[: M + 1 - m]):
            if not (am and bk):
                continue
            for j in range(m + 1):
                for l in range(k + 1):
                    w = cyclic_canonical(free_reduce(_power(A, j) + _power(B, l)))
                    c = am * bk * math.comb(m, j) * math.comb(k, l) * (-1) ** (m - j + k - l)
                    out[w] = out.get(w, 0) + c
    return {w: v for w, v in out.items() if v and w}


# ---------------------------------------------------------------------------
# Dehn twist logarithms


@dataclass(frozen=True)
class TwistLog:
    curve: tuple
    rot: int  # rotation number m entering the rho cross term
    regular: LoopSum  # 1/2 (log alpha)^2 as a combination of regular powers
    trace: CyclicSeries  # 1/2 |(log C + m rho)^2|, constants dropped

    @property
    def classical(self) -> ClassicalSum:
        return self.regular.phi()


def is_embedded(C: Iterable[int], n: int, tries: int = 16) -> bool:
    """Oracle check: some taut realization of C has no self-crossings.

    A crossing-free realization certifies simplicity; templates depend on the
    salt (starting letter, hub heights), so several are tried.
    """
    word = cyclic_canonical(C)
    c, surface = FramedClass(word, taut_rot(word, n)), SurfaceModel(n)
    return any(not self_intersections(realize(c, surface, salt=s)) for s in range(tries))


def twist_log(
    C: Iterable[int],
    n: int,
    N: int,
    f: Framing | None = None,
    h: int | None = None,
    kind: str = "unipotent",
    extra: int = 2,
) -> TwistLog:
    """Logarithm of the Dehn twist along C, in loop-sum and trace form.

    The regular class alpha of C is its taut representative; alpha^j is C^j
    with j times its rotation.  m = rot_f(alpha), or 1 - 2h when a genus h is
    given.  The (C - 1)-adic cutoff is N + extra.
    """
    word = free_reduce(C, n)
    cyc = cyclic_canonical(word)
    if not cyc:
        raise KVError("twist_log needs a nontrivial curve")
    if N < 2:
        raise KVError(f"twist_log starts in degree 2, got N={N}")
    alpha = FramedClass(cyc, taut_rot(cyc, n))
    M = N + extra
    coeffs = to_powers(log_power_coeffs(2, M))
    regular: dict[FramedClass, Fraction] = {}
    for j, c in enumerate(coeffs):
        if c and j:
            cls = FramedClass(_power(word, j), j * alpha.rot0)
            regular[cls] = regular.get(cls, 0) + c / 2
    m = rot_f(alpha, f) if h is None else 1 - 2 * h
    lg = series_log(magnus_expand(word, n, N, kind)) + TruncSeries.rho(n, N).scale(m)
    trace = cyclic_project((lg * lg).scale(Fraction(1, 2))).drop_constants()
    return TwistLog(cyc, m, LoopSum(regular), trace)


def log_square(C: Iterable[int], n: int, N: int, extra: int = 2) -> ClassicalSum:
    """1/2 |(log C)^2| as a classical loop sum (no rotation data)."""
    word = free_reduce(C, n)
    coeffs = to_powers(log_power_coeffs(2, N + extra))
    out: dict = {}
    for j, c in enumerate(coeffs):
        w = cyclic_canonical(_power(word, j))
        if c and w:
            out[w] = out.get(w, 0) + c / 2
    return {w: v for w, v in out.items() if v}


# ---------------------------------------------------------------------------
# the action on generators, L+ membership


def _blackboard(x: Mapping) -> LoopSum:
    return LoopSum({FramedClass(w, 0): v for w, v in classical(x).items()})


def sigma_on_generator(u: Mapping, i: int, n: int, N: int, kind: str = "exp", salt=0) -> TruncSeries:
    """sigma(u)(x_i) expanded to degree N; rotations play no role classically."""
    acc: dict[tuple, Fraction] = {}
    for (w, _), v in bi.sigma_action(_blackboard(u), (i,), n, salt=salt).items():
        acc[w] = acc.get(w, 0) + v
    return magnus_sum(acc, n, N, kind)


def filtration_degree(u: Mapping, n: int, N: int) -> int | None:
    """Lowest nonconstant degree of |u| (None if it vanishes up to N)."""
    return trace_expand(u, n, N).low_degree()


@dataclass(frozen=True)
class Membership:
    ok: bool
    witness: str = ""

    def __bool__(self):
        return self.ok


def lplus_member(u: Mapping, n: int, N: int, salt=0) -> Membership:
    """u in L+: filtration >= 3 and sigma(u) keeps every x_i group-like up to degree N.

    The coproduct condition on the generator x_i says x_i^{-1} sigma(u)(x_i)
    is primitive, which is a Lie test in the coordinates x_i = exp(X_i).
    """
    low = filtration_degree(u, n, N)
    if low is not None and low < 3:
        return Membership(False, f"filtration: nonzero trace in degree {low} < 3")
    for i in range(1, n + 1):
        D = sigma_on_generator(u, i, n, N, "exp", salt)
        E = series_exp(TruncSeries.gen(i, n, N).scale(-1)) * D
        defect = dynkin_defect(E)
        if not defect.is_zero():
            return Membership(False, f"coproduct: x{i}^-1 sigma(u)(x{i}) is not Lie in degree {defect.low_degree()}")
    return Membership(True)


def canonical_section(u: Mapping, f: Framing | None, n: int, N: int, check: bool = True) -> LoopSum:
    """The rot_f = 0 lift, classwise; on L+ it does not depend on f modulo Q[[rho]]1."""
    if check:
        m = lplus_member(u, n, N)
        if not m:
            raise KVError(f"canonical_section needs an element of L+: {m.witness}")
    return LoopSum({s_f(w, f): v for w, v in classical(u).items() if w})


def section_difference(u: Mapping, f: Framing, g: Framing, n: int, N: int) -> CyclicSeries:
    """Phi~ (blackboard) of s_f(u) - s_g(u); zero iff the sections agree mod Q[[rho]]1."""
    diff = canonical_section(u, f, n, N, check=False) - canonical_section(u, g, n, N, check=False)
    return tilde_phi_series(diff, None, n, N)


# ---------------------------------------------------------------------------
# ES+ and ES


def es_plus(v: LoopSum, f: Framing | None, n: int, salt=0) -> LoopSum:
    """(eps_f (x) 1) o delta+: the left factor becomes the scalar r^{rot_f}."""
    acc: dict[FramedClass, Fraction] = {}
    for (a1, a2), c in bi.cobracket(v.drop_trivial(), n, salt).terms.items():
        key = FramedClass(a2.word, a2.rot0 + rot_f(a1, f))
        acc[key] = acc.get(key, 0) + c
    return LoopSum(acc).drop_trivial()


def es(u: Mapping, f: Framing | None, n: int, N: int, kind: str = "exp", check: bool = False, salt=0) -> CyclicSeries:
    """ES_f = Phi o ES+_f o s_can, expanded in the trace space up to degree N."""
    lifted = canonical_section(u, f, n, N, check=check)
    return trace_expand(es_plus(lifted, f, n, salt).phi(), n, N, kind)


# ---------------------------------------------------------------------------
# tangential derivations


def boundary_element(n: int, N: int) -> TruncSeries:
    """log of the outer boundary x_1 ... x_n in exp coordinates."""
    out = TruncSeries.one(n, N)
    for i in range(1, n + 1):
        out = out * series_exp(TruncSeries.gen(i, n, N))
    return series_log(out)


@dataclass(frozen=True)
class TangentialDerivation:
    """x_k -> [x_k, a_k] on the free Lie algebra, k = 1..n."""

    components: tuple  # of TruncSeries, rho-free

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def N(self) -> int:
        return self.components[0].N

    def on_generator(self, k: int) -> TruncSeries:
        X = TruncSeries.gen(k, self.n, self.N)
        return X.commutator(self.components[k - 1])

    def apply(self, s: TruncSeries) -> TruncSeries:
        """Extend as a derivation of the tensor algebra (rho is inert)."""
        images = [self.on_generator(k) for k in range(1, self.n + 1)]
        out: dict = {}
        for (word, r), c in s.terms.items():
            for pos, k in enumerate(word):
                left = TruncSeries(s.n, s.N, {(word[:pos], r): c})
                right = TruncSeries(s.n, s.N, {(word[pos + 1:], 0): 1})
                for key, v in (left * images[k - 1] * right).terms.items():
                    out[key] = out.get(key, 0) + v
        return TruncSeries(s.n, s.N, out)

    def act_on_trace(self, t: CyclicSeries) -> CyclicSeries:
        return cyclic_project(self.apply(TruncSeries(t.n, t.N, t.terms)))

    def bracket(self, other: "TangentialDerivation") -> "TangentialDerivation":
        """[d, e]_k = d(b_k) - e(a_k) + [a_k, b_k]: the commutator of derivations."""
        return TangentialDerivation(tuple(
            self.apply(b) - other.apply(a) + a.commutator(b)
            for a, b in zip(self.components, other.components)
        ))

    def boundary_image(self) -> TruncSeries:
        """sum_k [X_k, a_k]; zero for special derivations."""
        out = TruncSeries.zero(self.n, self.N)
        for k in range(1, self.n + 1):
            out = out + self.on_generator(k)
        return out

    def is_special(self) -> bool:
        """d kills the boundary element log(e^{X_1} ... e^{X_n}) up to degree N."""
        return self.apply(boundary_element(self.n, self.N)).is_zero()

    def is_lie(self) -> bool:
        return all(dynkin_defect(a).is_zero() for a in self.components)

    def __eq__(self, other):
        return isinstance(other, TangentialDerivation) and self.components == other.components

    def __hash__(self):
        return hash(self.components)


def _strip_left(s: TruncSeries, i: int) -> TruncSeries:
    return TruncSeries(s.n, s.N, {(w[1:], k): c for (w, k), c in s.terms.items() if w and w[0] == i})


def _ad_inverse(R: TruncSeries, i: int) -> TruncSeries:
    """Some a with X_i a - a X_i = R, assuming R lies in the image."""
    y = _strip_left(R, i)
    X = TruncSeries.gen(i, R.n, R.N)
    a = y
    # a = y + (X_i-leading part of a, stripped) X_i; the recursion ends after
    # as many rounds as there can be leading X_i's
    for _ in range(R.N + 1):
        a = y + _strip_left(a, i) * X
    return a


def solve_conjugation(D: TruncSeries, i: int) -> TruncSeries:
    """The a with exp(X_i) a - a exp(X_i) = D and no pure X_i-power terms."""
    n, N = D.n, D.N
    X = TruncSeries.gen(i, n, N)
    powers = [TruncSeries.one(n, N), X]
    for k in range(2, N + 1):
        powers.append(powers[-1] * X)
    a = TruncSeries.zero(n, N)
    for _ in range(N + 1):
        rest = TruncSeries.zero(n, N)
        for k in range(2, N + 1):
            rest = rest + powers[k].commutator(a).scale(Fraction(1, math.factorial(k)))
        a = _ad_inverse(D - rest, i)
    a = TruncSeries(n, N, {(w, r): c for (w, r), c in a.terms.items() if not all(t == i for t in w)})
    E = series_exp(X)
    if E * a - a * E != D:
        raise KVError(f"sigma(u)(x{i}) is not of the form [x{i}, a]: the derivation is not tangential")
    return a


# The identification of L+ with tangential derivations: sigma(u)(x_i) = a_i x_i - x_i a_i.
# With this sign gr(ES_f) equals div on the nose (see compare_es_div).
IDENTIFICATION_SIGN = -1


def tder_extract(u: Mapping, n: int, N: int, check: bool = True, salt=0) -> TangentialDerivation:
    """Components a_i, degree <= N, of the tangential derivation attached to u in L+."""
    if check:
        m = lplus_member(u, n, N + 1, salt)
        if not m:
            raise KVError(f"tder_extract needs an element of L+: {m.witness}")
    comps = []
    for i in range(1, n + 1):
        D = sigma_on_generator(u, i, n, N + 1, "exp", salt).scale(IDENTIFICATION_SIGN)
        comps.append(solve_conjugation(D, i).with_trunc(N))
    d = TangentialDerivation(tuple(comps))
    if check and not d.is_special():
        raise KVError("extracted derivation does not kill the boundary element")
    return d


def divergence(d: TangentialDerivation) -> CyclicSeries:
    """div(d) = |sum_k X_k (d_k a_k)| with a = a_0 + sum_k (d_k a) X_k."""
    n, N = d.n, d.N
    out = TruncSeries.zero(n, N)
    for k, a in enumerate(d.components, 1):
        out = out + TruncSeries.gen(k, n, N) * right_partial(a, k)
    return cyclic_project(out)


def es_trace(values: Iterable[TruncSeries], side: str = "left") -> CyclicSeries:
    """Contraction trace of x_i -> f_i: strip a leading X_i from f_i, sum, project.

    ``side="right"`` strips a trailing X_i instead; on x_i -> [X_i, a_i] with
    Lie a_i of degree >= 2 that version is div itself, while the left one is
    :func:`trace_antipode` of div.
    """
    values = list(values)
    degrees = {d for f in values for d in f.degrees()}
    if len(degrees) > 1:
        raise KVError(f"es_trace needs homogeneous input, got degrees {sorted(degrees)}")
    if side not in ("left", "right"):
        raise KVError(f"side must be 'left' or 'right', got {side!r}")
    n, N = values[0].n, values[0].N
    out = TruncSeries.zero(n, N)
    for i, f in enumerate(values, 1):
        out = out + (_strip_left(f, i) if side == "left" else right_partial(f, i))
    return cyclic_project(out)


def trace_antipode(t: CyclicSeries) -> CyclicSeries:
    """|X_{i1}...X_{id}| -> (-1)^d |X_{id}...X_{i1}| on rho-free traces."""
    return CyclicSeries(t.n, t.N, {(w[::-1], k): c * (-1) ** len(w) for (w, k), c in t.terms.items()})


# ---------------------------------------------------------------------------
# the comparison and the genus-0 commutator check


@dataclass
class Comparison:
    es: CyclicSeries
    div: CyclicSeries
    difference: dict  # degree -> CyclicSeries

    def agrees_from(self, degree: int = 3) -> bool:
        return all(not t for d, t in self.difference.items() if d >= degree)

    def low_window(self) -> list[int]:
        return sorted(d for d, t in self.difference.items() if t)


def compare_es_div(u: Mapping, f: Framing | None, n: int, N: int, check: bool = True, salt=0) -> Comparison:
    """gr(ES_f)(u) against div(tder(u)), degree by degree up to N."""
    if check:
        m = lplus_member(u, n, N + 1, salt)
        if not m:
            raise KVError(f"compare_es_div needs an element of L+: {m.witness}")
    e = es(u, f, n, N, "exp", salt=salt)
    d = divergence(tder_extract(u, n, N, check=False, salt=salt))
    diff = e - d
    return Comparison(e, d, {k: diff.degree_part(k) for k in range(1, N + 1)})


@dataclass
class CommutatorImage:
    regular: dict  # framing string -> CyclicSeries of [Phi~ tau+(t_C1), Phi~ tau+(t_C2)]
    classical: CyclicSeries  # [1/2|(log C1)^2|, 1/2|(log C2)^2|]
    bracket: ClassicalSum
    es: CyclicSeries

    @property
    def framing_independent(self) -> bool:
        vals = list(self.regular.values())
        return all(v == vals[0] for v in vals)

    @property
    def matches(self) -> bool:
        return all(v == self.classical for v in self.regular.values())


def commutator_image(
    C1: Iterable[int], C2: Iterable[int], n: int, N: int, framings: Iterable[Framing], salt=0
) -> CommutatorImage:
    framings = list(framings)
    t1, t2 = twist_log(C1, n, N, kind="unipotent"), twist_log(C2, n, N, kind="unipotent")
    reg = bi.bracket(t1.regular, t2.regular, n, salt)
    regular = {str(f): tilde_phi_series(reg, f, n, N) for f in framings}
    br = bi.classical_bracket(log_square(C1, n, N), log_square(C2, n, N), n, salt)
    cls = trace_expand(br, n, N, "unipotent")
    return CommutatorImage(regular, cls, br, es(br, framings[0], n, N, salt=salt))
