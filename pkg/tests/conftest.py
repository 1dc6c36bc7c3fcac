import random

import pytest

from thurston.envelope import classify_boundary, sample_envelope, shape_report
from thurston.errors import NoSuchPoint
from thurston.pairs import IRRATIONAL, RATIONAL
from thurston.torus import point_from_xy


def random_points(seed, n, lo=2.2, hi=7.0):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        try:
            out.append(
                point_from_xy(rng.uniform(lo, hi), rng.uniform(lo, hi),
                              rng.choice(("larger", "smaller")))
            )
        except NoSuchPoint:
            pass
    return out


class Sampled:
    def __init__(self, pair):
        self.pair = pair
        self.sample = sample_envelope(pair.X, pair.Y, pair.chart)
        self.classification = classify_boundary(self.sample)
        self.report = shape_report(self.sample, self.classification, width_tol=2.0)


@pytest.fixture(scope="session")
def quad():
    return Sampled(RATIONAL)


@pytest.fixture(scope="session")
def seg():
    return Sampled(IRRATIONAL)


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}")
