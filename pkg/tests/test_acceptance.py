"""The nine acceptance criteria, one test each, each reporting a single PASS/FAIL line.

Σ_{0,3} and Σ_{0,4} are the disk with n = 2 and n = 3 holes.
"""

import time

from gtlab import suites

SURFACES = (2, 3)
SEED = 7
RESULTS: list[str] = []


def report(number: int, title: str, checks, started: float, limit: float | None = None, notes=()) -> None:
    elapsed = time.perf_counter() - started
    ok = all(c.ok and c.total for c in checks) and (limit is None or elapsed < limit)
    counts = ", ".join(f"{c.name} {c.passed}/{c.total}" for c in checks)
    budget = f" (limit {limit:.0f}s)" if limit else ""
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {counts}; {elapsed:.1f}s{budget}"
    for c in checks:
        if c.witness:
            line += f"; witness: {c.witness}"
    for note in notes:
        line += f"; note: {note}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_1_lie_bialgebra():
    t = time.perf_counter()
    checks = []
    for n in SURFACES:
        classes = suites.corpus(n, SEED, size=12)
        assert len(classes) >= 12
        assert all(len(c.word) <= 6 for c in classes)
        for c in suites.bialgebra_checks(n, classes):
            c.name = f"{c.name} n={n}"
            checks.append(c)
    report(1, "Lie bialgebra axioms", checks, t, limit=120)


def test_2_embedded_powers():
    t = time.perf_counter()
    checks = []
    for n in SURFACES:
        c = suites.power_vanishing(n, max_power=5)
        c.name = f"powers n={n}"
        checks.append(c)
    report(2, "embedded powers have zero cobracket", checks, t, limit=30)


def test_3_representative_independence():
    t = time.perf_counter()
    checks = []
    for n in SURFACES:
        c = suites.representative_independence(n, suites.corpus(n, SEED), salts=(0, 1, 2))
        c.name = f"3 realizations n={n}"
        checks.append(c)
    report(3, "representative independence", checks, t)


def test_4_rotation_bookkeeping():
    t = time.perf_counter()
    split, smooth = suites.rotation_bookkeeping(3, SEED, loops=100)
    report(4, "rotation bookkeeping on 100 random generic loops", [split, smooth], t)


def test_5_divergence_cocycle():
    t = time.perf_counter()
    report(5, "divergence cocycle", [suites.cocycle_check(SEED, count=50, max_degree=4, max_n=4)], t, limit=120)


def test_6_es_equals_div():
    t = time.perf_counter()
    checks, notes = [], []
    for n in SURFACES:
        c, extra = suites.central_check(n, N=5)
        checks.append(c)
        notes += extra
    if not notes:
        notes = ["no discrepancy in degrees <= 2 either"]
    report(6, "gr ES_f = div on L+ members", checks, t, limit=600, notes=notes)


def test_7_twist_logs_killed():
    t = time.perf_counter()
    report(7, "ES+_f o twist_log = 0", [suites.eq3_check(n, N=5) for n in SURFACES], t)


def test_8_framing_independence():
    t = time.perf_counter()
    report(8, "framing independence", [suites.framing_check(n, N=5) for n in SURFACES], t)


def test_9_commutators_vanish():
    t = time.perf_counter()
    report(9, "ES_f of twist-log commutators vanishes", [suites.commutator_vanishing(3, N=5)], t)
