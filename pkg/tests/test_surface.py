import pytest
from hypothesis import given, strategies as st

from gtlab.algebra import AlgebraError, TruncSeries, parse_series
from gtlab.surface import (
    FramedClass,
    Framing,
    LoopSum,
    eps_f,
    parse_loop,
    parse_loop_sum,
    phi,
    r_action,
    rot_f,
    s_f,
    tilde_phi_f,
    tilde_phi_f_inverse,
)

from conftest import rationals, words


def test_r_action():
    assert r_action(FramedClass((1,), 0)) == FramedClass((1,), 1)
    assert r_action(FramedClass((1,), 1), -1) == FramedClass((1,), 0)
    assert r_action(FramedClass((), 0), 3) == FramedClass((), 3)


def test_phi_forgets_rotation():
    assert phi(FramedClass((1, 2), 5)) == (1, 2)
    assert phi(FramedClass((), -2)) == ()


@pytest.mark.parametrize(
    "cls, shifts, expected",
    [(FramedClass((1,), -1), (0, 0), -1), (FramedClass((1,), -1), (2, 0), 1), (FramedClass((1, -2), 0), (1, 1), 0)],
)
def test_rot_f(cls, shifts, expected):
    assert rot_f(cls, Framing(shifts)) == expected


def test_sections():
    assert s_f((1,), Framing.blackboard(2)) == FramedClass((1,), 0)
    assert s_f((1,), Framing((1, 0))) == FramedClass((1,), -1)


@given(words(3, 6), st.integers(-3, 3), st.tuples(*[st.integers(-2, 2)] * 3))
def test_tilde_phi_is_a_bijection(w, m, shifts):
    f = Framing(shifts)
    c = tilde_phi_f_inverse(w, m, f)
    assert tilde_phi_f(c, f) == (c.word, m)
    assert tilde_phi_f_inverse(*tilde_phi_f(c, f), f) == c
    assert rot_f(s_f(w, f), f) == 0


def test_eps_f():
    N = 2
    assert eps_f(FramedClass((1,), 0), None, 2, N) == TruncSeries.one(2, N)
    assert eps_f(FramedClass((1,), 1), None, 2, N) == parse_series("1 + 1 * rho + 1/2 * rho^2", 2, N)


def test_parse_loop():
    taut = lambda w: 10 + len(w)
    assert parse_loop("{x1 x2; 0}", 2) == FramedClass((1, 2), 0)
    assert parse_loop("{1; -1}") == FramedClass((), -1)
    assert parse_loop("{x1^3; taut}", 2, taut) == FramedClass((1, 1, 1), 13)
    assert parse_loop("{x2 x1; taut-2}", 2, taut) == FramedClass((1, 2), 10)


@pytest.mark.parametrize("text", ["x1", "{x1; a}", "{x1 q; 0}", "{x1; taut}"])
def test_parse_loop_errors(text):
    with pytest.raises(AlgebraError):
        parse_loop(text, 2)


@given(st.dictionaries(st.builds(FramedClass, words(2, 5), st.integers(-3, 3)), rationals(), max_size=5))
def test_loop_sum_round_trips(terms):
    s = LoopSum(terms)
    assert parse_loop_sum(s.render(), 2) == s
    assert LoopSum.from_json(s.to_json()) == s


def test_framing_parse():
    assert Framing.parse("1,-1,2", 3).shifts == (1, -1, 2)
    with pytest.raises(ValueError):
        Framing.parse("1,2", 3)
