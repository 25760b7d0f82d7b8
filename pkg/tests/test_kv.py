import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gtlab import kv
from gtlab.algebra import (
    CyclicSeries,
    TruncSeries,
    bch,
    cyclic_canonical,
    cyclic_project,
    free_reduce,
    left_bracketing,
    magnus_expand,
    parse_series,
    series_log,
)
from gtlab.surface import Framing

F = Fraction
COMM12 = (1, 2, -1, -2)


def C(text, n=2, N=4):
    return parse_series(text, n, N, CyclicSeries)


def gen(i, n=2, N=4):
    return TruncSeries.gen(i, n, N)


def minus_one_product(*words) -> dict:
    """|(w_1 - 1)(w_2 - 1)...| as a classical loop sum."""
    out: dict = {}
    for sel in itertools.product((0, 1), repeat=len(words)):
        w = cyclic_canonical(free_reduce(sum((x for x, s in zip(words, sel) if s), ())))
        out[w] = out.get(w, 0) + (-1) ** (len(words) - sum(sel))
    return {w: v for w, v in out.items() if v and w}


class TestExpansions:
    def test_log_power_coeffs(self):
        assert kv.log_power_coeffs(1, 4) == [0, 1, F(-1, 2), F(1, 3), F(-1, 4)]
        assert kv.log_power_coeffs(2, 4) == [0, 0, 1, -1, F(11, 12)]

    def test_to_powers(self):
        # (x - 1)^2 = x^2 - 2x + 1
        assert kv.to_powers([0, 0, 1]) == [1, -2, 1]

    @pytest.mark.parametrize("word", [(1,), (1, 2), (1, -2, 1)])
    def test_log_square_matches_direct_series(self, word):
        N = 4
        lg = series_log(magnus_expand(word, 2, N))
        expected = cyclic_project((lg * lg).scale(F(1, 2))).drop_constants()
        assert kv.trace_expand(kv.log_square(word, 2, N), 2, N, "unipotent") == expected

    def test_cutoff_is_stable(self):
        for word in [(1,), (1, 2), COMM12]:
            a = kv.trace_expand(kv.log_square(word, 2, 4, extra=2), 2, 4)
            b = kv.trace_expand(kv.log_square(word, 2, 4, extra=3), 2, 4)
            assert a == b

    def test_log_product(self):
        N = 4
        got = kv.trace_expand(kv.log_product((1,), (2,), N), 2, N, "unipotent")
        expected = cyclic_project(series_log(magnus_expand((1,), 2, N)) * series_log(magnus_expand((2,), 2, N)))
        assert got == expected.drop_constants()


class TestTwistLog:
    @pytest.mark.parametrize("k", [-2, 0, 1, 3])
    def test_generator_example(self, k):
        # rot_f(x1) = k; the cross term carries k (not k/2), see the decisions ledger
        f = Framing((k - 1, 0))
        t = kv.twist_log((1,), 2, 3, f=f)
        assert t.rot == k
        assert t.trace == C(f"{k} * rho * X1 + {F(-k, 2)} * rho * X1.X1 + 1/2 * X1.X1 + -1/2 * X1.X1.X1", N=3)

    def test_loop_and_trace_forms_agree(self):
        for word, f in [((1,), Framing((2, 0))), ((1, 2), Framing((1, -1))), ((1, 2, -1, -2), None)]:
            t = kv.twist_log(word, 2, 4, f=f)
            assert kv.tilde_phi_series(t.regular, f, 2, 4) == t.trace

    def test_genus_parameter(self):
        assert kv.twist_log((1,), 2, 3, h=0).rot == 1
        assert kv.twist_log((1,), 2, 3, h=1).rot == -1

    def test_null_homologous_curve_has_no_cross_term(self):
        t = kv.twist_log(COMM12, 2, 4)
        assert all(r == 0 for (_, r) in t.trace.terms)

    def test_errors(self):
        with pytest.raises(kv.KVError):
            kv.twist_log((1, -1), 2, 4)
        with pytest.raises(kv.KVError):
            kv.twist_log((1,), 2, 1)
        assert kv.log_square((), 2, 4) == {}

    @pytest.mark.parametrize(
        "word, simple",
        [((1,), True), ((1, 2), True), ((1, 3), True), ((1, 2, 3), True), ((1, 1), False), (COMM12, False), ((1, 3, 2), False)],
    )
    def test_simplicity_oracle(self, word, simple):
        assert kv.is_embedded(word, 3) is simple


class TestMembership:
    def test_degree_one_is_rejected(self):
        m = kv.lplus_member({(1,): 1}, 2, 4)
        assert not m and "filtration" in m.witness

    def test_simple_twist_in_genus_zero_is_rejected(self):
        m = kv.lplus_member(kv.log_square((1, 2), 2, 4), 2, 4)
        assert not m and "degree 2" in m.witness

    def test_members(self):
        assert kv.lplus_member(kv.log_square(COMM12, 2, 5), 2, 5)
        assert kv.lplus_member(kv.log_product((1,), COMM12, 7), 2, 5)
        assert kv.lplus_member({}, 2, 4)

    def test_perturbation_is_caught(self):
        u = dict(kv.log_square(COMM12, 2, 5))
        for w, v in minus_one_product((1,), (1,), (2,)).items():
            u[w] = u.get(w, 0) + v
        m = kv.lplus_member(u, 2, 5)
        assert not m and "coproduct" in m.witness and "degree 3" in m.witness

    def test_canonical_section_precondition(self):
        with pytest.raises(kv.KVError, match="filtration"):
            kv.canonical_section({(1,): 1}, None, 2, 4)

    def test_section_is_a_section(self):
        u = kv.log_square(COMM12, 2, 4)
        s = kv.canonical_section(u, Framing((1, 0)), 2, 4)
        assert s.phi() == u
        assert all(c.rot0 + Framing((1, 0)).pairing(c.word) == 0 for c in s.terms)

    def test_framing_independence_discriminates(self):
        members = [kv.log_square(COMM12, 2, 4), kv.log_product((1,), COMM12, 6)]
        for u in members:
            assert kv.section_difference(u, Framing((0, 0)), Framing((1, 0)), 2, 4).is_zero()
        assert not kv.section_difference({(1, 2): 1}, Framing((0, 0)), Framing((1, 0)), 2, 4).is_zero()


class TestDerivations:
    def test_divergence_examples(self):
        n, N = 2, 3
        X1, X2 = gen(1, n, N), gen(2, n, N)
        d = lambda *a: kv.divergence(kv.TangentialDerivation(tuple(a)))
        assert d(X1, X2) == C("1 * X1 + 1 * X2", N=N)
        assert d(X2, TruncSeries.zero(n, N)).is_zero()
        assert d(X1.commutator(X2), TruncSeries.zero(n, N)) == C("-1 * X1.X2", N=N)

    def test_es_trace_examples(self):
        X1, X2 = gen(1), gen(2)
        zero = TruncSeries.zero(2, 4)
        assert kv.es_trace([X1.commutator(X2), zero]) == C("1 * X2")
        assert kv.es_trace([X2 * X2, zero]).is_zero()
        assert kv.es_trace([zero, zero]).is_zero()
        with pytest.raises(kv.KVError, match="homogeneous"):
            kv.es_trace([X1 + X1 * X2, zero])

    @given(st.data())
    def test_es_trace_against_div_from_degree_two(self, data):
        n = data.draw(st.integers(2, 3))
        deg = data.draw(st.integers(2, 3))
        N = deg + 1
        comps = []
        for _ in range(n):
            w = tuple(data.draw(st.lists(st.integers(1, n), min_size=deg, max_size=deg)))
            comps.append(left_bracketing(w, n, N).scale(data.draw(st.integers(-2, 2))))
        d = kv.TangentialDerivation(tuple(comps))
        values = [d.on_generator(i) for i in range(1, n + 1)]
        assert kv.es_trace(values) == kv.trace_antipode(kv.divergence(d))
        assert kv.es_trace(values, side="right") == kv.divergence(d)

    def test_es_trace_sign_depends_on_degree(self):
        # two generators, no chiral necklaces below length 6: the antipode is (-1)^degree
        X1, X2 = gen(1), gen(2)
        zero = TruncSeries.zero(2, 4)
        for a in (X1.commutator(X2), X1.commutator(X2).commutator(X1)):
            d = kv.TangentialDerivation((a, zero))
            sign = (-1) ** a.degrees()[0]
            assert kv.es_trace([d.on_generator(1), zero]) == kv.divergence(d).scale(sign)

    def test_es_trace_degree_one_offset(self):
        # a_1 = X2: div is 0 but the contraction sees |X2|, the low-degree discrepancy
        d = kv.TangentialDerivation((gen(2), TruncSeries.zero(2, 4)))
        assert kv.divergence(d).is_zero()
        assert kv.es_trace([d.on_generator(1), d.on_generator(2)]) == C("1 * X2")

    def test_cocycle_identity(self):
        from gtlab.suites import cocycle_check
        assert cocycle_check(seed=3, count=20).ok

    def test_tder_of_zero(self):
        d = kv.tder_extract({}, 2, 4)
        assert all(a.is_zero() for a in d.components)

    def test_tder_of_twist_is_conjugation_by_the_curve(self):
        # the twist along x1x2 conjugates x1 and x2 by x1x2: a_i = log(x1x2) without pure X_i powers
        N = 3
        d = kv.tder_extract(kv.log_square((1, 2), 2, N), 2, N, check=False)
        lg = bch(gen(1, 2, N), gen(2, 2, N))
        for i, a in enumerate(d.components, 1):
            assert a == TruncSeries(2, N, {(w, r): c for (w, r), c in lg.terms.items() if set(w) != {i}})
        assert d.is_lie()

    def test_tder_reapplication(self):
        N = 4
        u = kv.log_square(COMM12, 2, N)
        d = kv.tder_extract(u, 2, N)
        for i in (1, 2):
            D = kv.sigma_on_generator(u, i, 2, N + 1, "exp").scale(kv.IDENTIFICATION_SIGN)
            E = kv.series_exp(gen(i, 2, N + 1))
            a = d.components[i - 1].with_trunc(N + 1)
            assert (E * a - a * E).truncate(N) == D.truncate(N)
        assert d.is_special()
        assert d.boundary_image().degree_part(3).is_zero()


class TestComparison:
    def test_zero(self):
        cmp = kv.compare_es_div({}, None, 2, 4)
        assert cmp.agrees_from(1) and cmp.es.is_zero() and cmp.div.is_zero()

    def test_frozen_es_of_commutator_twist(self):
        assert kv.es(kv.log_square(COMM12, 2, 4), None, 2, 4) == C("-1 * X1.X1.X2 + -1 * X1.X2.X2")

    def test_agreement_on_members(self):
        for u in [kv.log_square(COMM12, 2, 4), kv.log_product((1,), COMM12, 6)]:
            cmp = kv.compare_es_div(u, Framing((1, -1)), 2, 4)
            assert cmp.agrees_from(1)

    def test_injected_mismatch_is_localized(self):
        u = kv.log_square(COMM12, 2, 4)
        cmp = kv.compare_es_div(u, None, 2, 4)
        cmp.es = cmp.es + C("1 * X1.X2.X2.X2")
        cmp.difference = {k: (cmp.es - cmp.div).degree_part(k) for k in range(1, 5)}
        assert cmp.low_window() == [4] and not cmp.agrees_from(3)

    def test_precondition(self):
        with pytest.raises(kv.KVError, match="L\\+"):
            kv.compare_es_div({(1,): 1}, None, 2, 4)


class TestCommutators:
    def test_disjoint_curves_commute(self):
        img = kv.commutator_image((1,), (2,), 2, 4, [Framing((0, 0)), Framing((1, 0))])
        assert img.bracket == {} and img.classical.is_zero() and img.framing_independent

    def test_intersecting_pair(self):
        fs = [Framing((0, 0, 0)), Framing((1, -1, 2))]
        img = kv.commutator_image((1, 2), (2, 3), 3, 4, fs)
        assert img.bracket and img.framing_independent and img.matches and img.es.is_zero()

    def test_es_plus_kills_embedded_powers(self):
        from gtlab.suites import taut_class
        from gtlab.surface import FramedClass, LoopSum
        alpha = taut_class((1, 2), 3)
        for p in range(1, 5):
            v = LoopSum.of(FramedClass((1, 2) * p, p * alpha.rot0))
            assert not kv.es_plus(v, Framing((1, -1, 2)), 3)
