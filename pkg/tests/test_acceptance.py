"""Acceptance gate: every criterion runs once per session at tolerance
zero and must report PASS.

The suite prints one line per criterion; run pytest with -s (or read the
captured output of the fixture) to see them alongside the verdicts.
"""

import pytest

from limsupgames.acceptance import DEFAULT_SEED, run_all

CRITERIA = [
    "c1_responder_always_wins",
    "c2_threshold_construction_grid",
    "c3_algebra_three_ops",
    "c4_meager_dense_attack",
    "c5_oscillation_attack",
    "c6_two_sided_pairs",
    "c7_lift_restricted",
    "c8_copycat_identities",
]


@pytest.fixture(scope="session")
def results():
    out = {r.name: r for r in run_all(DEFAULT_SEED)}
    for name in CRITERIA:
        print(out[name].line())
    return out


def test_every_criterion_is_covered(results):
    assert sorted(results) == sorted(CRITERIA)


@pytest.mark.parametrize("name", CRITERIA)
def test_criterion(results, name):
    r = results[name]
    assert r.count > 0, r.line()
    assert r.seconds <= r.budget, r.line()
    assert r.passed, r.line()
