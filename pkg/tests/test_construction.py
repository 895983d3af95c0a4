"""Node labeling construction: threshold scans, fast labeler, branch
limsups, the three-operation algebra, and machine minimization."""

import pytest

from limsupgames.automata import eval_limsup, lasso_summary
from limsupgames.construction import (ConstructionState, InconclusiveLassoError,
                                       algebra, branch_labels, branch_limsup,
                                       construct_u, joint_minmax,
                                       minimize_labeling, periodic_tail_max,
                                       rn_sup, rstar_sup, scan_bound,
                                       verify_construction)
from limsupgames.corpus import (automaton_corpus, branch_corpus,
                                 constant_automaton, letter_output_automaton,
                                 rng_stream)
from limsupgames.dyadic import NEG_INF, Dyadic, ext_max
from limsupgames.families import (constant_family, discretize,
                                   family_from_automaton,
                                   unbounded_drop_family)
from limsupgames.trees import EventuallyPeriodicBranch, binary_tree, parse_branch

TREE = binary_tree()
BRANCHES = branch_corpus(2, 2)


def prefixes_to(depth):
    out = [()]
    frontier = [()]
    for _ in range(depth):
        frontier = [s + (a,) for s in frontier for a in (0, 1)]
        out.extend(frontier)
    return out


def test_label_matches_strict_threshold_scan():
    # independent oracle: walk the 1/64 grid downward, accept the first
    # value meeting the defining conditions (it is the set's maximum)
    machines = automaton_corpus(21, 6, max_states=3, span=4, max_exp=2)
    for u in machines:
        fam = discretize(family_from_automaton(u, TREE))
        state = ConstructionState(fam)
        for s in prefixes_to(3):
            got = state.u(s)
            bound = scan_bound(fam, s) + 4

            def to64(ext):
                v = ext.require_finite()
                return v.num << (6 - v.exp)

            a_int = [to64(fam.node_inf(n, s)) for n in range(bound + 1)]
            p_int = None if not s else \
                [to64(fam.node_inf(n, s[:-1])) for n in range(bound + 1)]
            inf_int = to64(fam.inf_all(s))
            best = None
            for r in range(512, -513, -1):
                ok = r < inf_int
                if not ok:
                    for n in range(bound + 1):
                        if r < a_int[n] and (p_int is None or p_int[n] <= r):
                            ok = True
                            break
                if ok:
                    best = r
                    break
            assert best is not None
            assert got == Dyadic(best + 1, 6), (u, s)


def test_fast_labeler_matches_generic_scan():
    machines = automaton_corpus(22, 5, max_states=3)
    walks = [parse_branch("stem=;cycle=0,1"),
             parse_branch("stem=1,1,0;cycle=1"),
             parse_branch("stem=0;cycle=1,1,0")]
    for u in machines:
        fam = discretize(family_from_automaton(u, TREE))
        state = ConstructionState(fam)
        for x in walks:
            labels = branch_labels(fam, x, 24)
            # labels[k] belongs to the prefix of length k + 1
            for k, lab in enumerate(labels):
                assert lab == state.u(x.first(k + 1)), (u, x, k)


def test_empty_threshold_set_labels_by_depth():
    fam = unbounded_drop_family(TREE)
    for s in [(), (0,), (1, 0), (0, 1, 1, 0)]:
        assert construct_u(fam, s) == Dyadic(-len(s))


def test_constant_family_construction():
    c = Dyadic(5, 3)
    fam = constant_family(c, TREE)
    report = verify_construction(fam, BRANCHES, target_fn=lambda x: c)
    assert report.all_equal and report.inconclusive_count == 0
    for row in report.rows:
        assert row.got == c == row.expected
    value, info = branch_limsup(fam, parse_branch("stem=0;cycle=1"))
    assert value == c
    assert info["period"] >= 1


def test_rstar_and_level_sups_on_constant():
    c = Dyadic(-1, 1)
    fam = constant_family(c, TREE)
    assert rstar_sup(fam, (0, 1)).require_finite() == c
    # away from the root the level intervals are empty: parent and child
    # infima coincide
    assert rn_sup(fam, 0, (0,)) is None
    assert rn_sup(fam, 0, ()).require_finite() == c


def test_periodic_tail_max():
    one, two = Dyadic(1), Dyadic(2)
    vals = [two, one, two, one, two, one, two]
    assert periodic_tail_max(vals, 2) == (0, two)
    assert periodic_tail_max([one, two, two, two, two], 1) == (1, two)
    assert periodic_tail_max([one, two, one, two], 2) is None  # too short
    assert periodic_tail_max([one, one, two, one, two, one], 2) is None
    assert periodic_tail_max(vals, 0) is None


def test_branch_limsup_matches_machine():
    machines = automaton_corpus(23, 8, max_states=3)
    for u in machines:
        fam = discretize(family_from_automaton(u, TREE))
        for x in BRANCHES:
            value, _ = branch_limsup(fam, x)
            assert value == eval_limsup(u, x), (u, x)


def test_branch_limsup_cap_raises():
    u = letter_output_automaton()
    fam = discretize(family_from_automaton(u, TREE))
    with pytest.raises(InconclusiveLassoError):
        branch_limsup(fam, parse_branch("stem=0,1,0,1,1;cycle=1,0"), cap=3)


def test_algebra_letter_plus_constant():
    f = algebra(letter_output_automaton(), constant_automaton(Dyadic(1)),
                "sum", TREE)
    for x in BRANCHES:
        v = f.value_on(x)
        assert v == f.expected_on(x)
        # the letter machine's limsup sorts branches into two classes
        assert v == (Dyadic(2) if any(x.cycle) else Dyadic(1))


@pytest.mark.parametrize("op", ["sum", "min", "max"])
def test_algebra_ops_match_pointwise(op):
    rng = rng_stream(24, "algebra-ops")
    machines = automaton_corpus(25, 8, max_states=3, span=3, max_exp=1)
    pairs = [(machines[i], machines[i + 1]) for i in range(0, 8, 2)]
    for u1, u2 in pairs:
        f = algebra(u1, u2, op, TREE)
        for x in BRANCHES:
            assert f.value_on(x) == f.expected_on(x), (op, u1, u2, x)
    del rng


def test_algebra_rejects_unknown_op():
    with pytest.raises(ValueError):
        algebra(letter_output_automaton(), constant_automaton(Dyadic(0)),
                "quotient", TREE)


def test_joint_minmax_constant_machines():
    u1 = constant_automaton(Dyadic(1))
    u2 = constant_automaton(Dyadic(3, 1))
    got = joint_minmax(u1, u2, "sum", 0, 0, tree=TREE)
    assert got.require_finite() == Dyadic(5, 1)
    got = joint_minmax(u1, u2, "max", 0, 0, tree=TREE)
    assert got.require_finite() == Dyadic(3, 1)
    # a fixed floor already above both future sups dominates
    got = joint_minmax(u1, u2, "max", 0, 0,
                       fixed1=ext_max([Dyadic(7)]), fixed2=NEG_INF, tree=TREE)
    assert got.require_finite() == Dyadic(7)
    with pytest.raises(ValueError):
        joint_minmax(u1, u2, "min", 0, 0, tree=TREE)


def test_verify_summary_wording():
    fam = constant_family(Dyadic(0), TREE)
    report = verify_construction(fam, BRANCHES, target_fn=lambda x: Dyadic(0))
    n = len(BRANCHES)
    assert report.summary() == \
        f"equal on all {n} corpus branches (max level scan {report.max_scan})"


def test_minimize_letter_labeling():
    fam = discretize(family_from_automaton(letter_output_automaton(), TREE))
    state = ConstructionState(fam)
    machine = minimize_labeling(state, TREE)
    assert machine is not None and machine.num_states == 1
    for x in branch_corpus(3, 3):
        cert = lasso_summary(machine, x)
        assert max(cert.cycle_outputs) == branch_limsup(fam, x)[0]


def test_minimize_refuses_depth_grading():
    # labels keep dropping with depth, so no finite machine reproduces them
    state = ConstructionState(unbounded_drop_family(TREE))
    assert minimize_labeling(state, TREE, max_states=8) is None
