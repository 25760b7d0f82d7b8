from fractions import Fraction

from hypothesis import settings, strategies as st

from gtlab.algebra import TruncSeries

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def words(n: int, max_len: int = 6, min_len: int = 0):
    letters = st.integers(1, n).flatmap(lambda i: st.sampled_from((i, -i)))
    return st.lists(letters, min_size=min_len, max_size=max_len).map(tuple)


def rationals():
    return st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))


def series(n: int, N: int, max_terms: int = 5, rho: bool = True):
    """Random truncated series with rational coefficients."""
    key = st.tuples(st.lists(st.integers(1, n), max_size=N).map(tuple), st.integers(0, N if rho else 0))
    terms = st.dictionaries(key.filter(lambda k: len(k[0]) + k[1] <= N), rationals(), max_size=max_terms)
    return terms.map(lambda t: TruncSeries(n, N, t))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
