"""Game loop semantics: rounds, faults, lassos, trace certificates."""

import pytest

from limsupgames.corpus import automaton_corpus, rng_stream
from limsupgames.dyadic import Dyadic, as_dyadic
from limsupgames.games import (CertificateMismatchError, FiniteValueSet,
                                Outcome, RunTrace, check_win, exact_verdict,
                                finite_value_set, gamma, gamma_prime,
                                gamma_restricted, play)
from limsupgames.strategies import (ConstantII, CopycatI, LetterFSM, ValueFSM,
                                     copycat_strategy, strategy_ii_from_u,
                                     u_from_strategy_ii)
from limsupgames.trees import EventuallyPeriodicBranch, binary_tree, nat_tree

BIN = gamma(binary_tree())
NAT = gamma(nat_tree())


def const_letter(a=0):
    return LetterFSM([a], [[0, 0]])


def test_play_runs_to_horizon_by_default():
    c = Dyadic(3, 1)
    tr = play(BIN, const_letter(), ConstantII(c), 10)
    assert len(tr.rows) == 10
    assert tr.lasso == (0, 1)
    assert tr.fault is None
    for t, row in enumerate(tr.rows):
        assert (row.t, row.letter, row.value, row.covalue) == (t, 0, c, None)


def test_stop_after_lasso_cuts_short():
    c = Dyadic(3, 1)
    tr = play(BIN, const_letter(), ConstantII(c), 10, stop_after_lasso=0)
    assert tr.lasso == (0, 1)
    assert len(tr.rows) == 2  # detection point, nothing past it
    tr = play(BIN, const_letter(), ConstantII(c), 10, stop_after_lasso=3)
    assert len(tr.rows) == 5
    # the cut never exceeds the horizon
    tr = play(BIN, const_letter(), ConstantII(c), 4, stop_after_lasso=50)
    assert len(tr.rows) == 4


def test_lasso_start_rolls_back_over_periodic_rows():
    # two internal states, one announced value: the joint key repeats with
    # period two but the observable rows are constant, so the start is 0
    sII = ValueFSM([[1, 1], [0, 0]], [Dyadic(5), Dyadic(5)])
    tr = play(BIN, const_letter(), sII, 12)
    assert tr.fault is None
    start, period = tr.lasso
    assert start == 0 and period == 2
    assert all(r.observable() == tr.rows[0].observable() for r in tr.rows)


def test_copycat_echoes_and_loses_exactly():
    tr = play(NAT, copycat_strategy(), ConstantII(Dyadic(3)), 8)
    assert tr.fault is None
    assert tr.letters()[1:] == (3,) * 7
    v = exact_verdict(NAT, copycat_strategy(), ConstantII(Dyadic(3)),
                      lambda x: Dyadic(3))
    assert v.exact and v.outcome is Outcome.WIN_II
    assert v.limsup_value == Dyadic(3) == v.payoff_of_witness
    # a payoff disagreeing with the announced limsup convicts player II
    v = exact_verdict(NAT, copycat_strategy(), ConstantII(Dyadic(3)),
                      lambda x: Dyadic(4))
    assert v.outcome is Outcome.WIN_I


def test_letter_leaving_tree_faults_player_i():
    tr = play(BIN, const_letter(5), ConstantII(Dyadic(0)), 6)
    assert tr.fault is not None
    assert tr.fault.blame == "I" and tr.fault.round_index == 0
    assert "leaves the tree" in tr.fault.detail
    assert tr.rows == ()


def test_answer_shape_faults_player_ii():
    tr = play(BIN, const_letter(), ConstantII(Dyadic(1), Dyadic(0)), 6)
    assert tr.fault.blame == "II"
    assert "single-value" in tr.fault.detail
    tr = play(gamma_prime(binary_tree()), const_letter(), ConstantII(Dyadic(1)), 6)
    assert tr.fault.blame == "II"
    assert "pair" in tr.fault.detail


def test_restricted_game_faults_on_escape():
    R = finite_value_set([Dyadic(0), Dyadic(1)])
    kind = gamma_restricted(R, binary_tree())
    tr = play(kind, const_letter(), ConstantII(Dyadic(1, 1)), 6)
    assert tr.fault.blame == "II"
    assert "outside the allowed set" in tr.fault.detail
    # fault verdicts settle immediately and exactly
    v = exact_verdict(kind, const_letter(), ConstantII(Dyadic(1, 1)),
                      lambda x: Dyadic(0))
    assert v.exact and v.outcome is Outcome.WIN_I
    assert v.fault is not None and v.fault.blame == "II"


def test_check_win_recomputes_and_detects_tampering():
    c = Dyadic(3, 1)
    tr = play(BIN, const_letter(), ConstantII(c), 10)
    v = check_win(tr, lambda x: c)
    assert v.outcome is Outcome.WIN_II and v.lasso == (0, 1)

    bad_rows = list(tr.rows)
    bad_rows[7] = type(bad_rows[7])(7, bad_rows[7].letter, Dyadic(9),
                                    bad_rows[7].covalue)
    tampered = RunTrace(tr.kind, tuple(bad_rows), tr.lasso, tr.fault)
    with pytest.raises(CertificateMismatchError):
        check_win(tampered, lambda x: c)

    short = RunTrace(tr.kind, tr.rows[:1], tr.lasso, tr.fault)
    with pytest.raises(CertificateMismatchError):
        check_win(short, lambda x: c)

    bare = RunTrace(tr.kind, tr.rows, None, None)
    with pytest.raises(ValueError):
        check_win(bare, lambda x: c)


def test_witness_branch():
    tr = play(BIN, const_letter(), ConstantII(Dyadic(0)), 10)
    assert tr.witness_branch() == EventuallyPeriodicBranch((), (0,))
    with pytest.raises(ValueError):
        RunTrace(BIN, (), None, None).witness_branch()


def test_csv_golden():
    tr = play(BIN, const_letter(), ConstantII(Dyadic(3, 1)), 3)
    assert tr.to_csv_text() == (
        "t,x_t,v_t,w_t\n"
        "0,0,3/2^1,\n"
        "1,0,3/2^1,\n"
        "2,0,3/2^1,\n")
    tr = play(gamma_prime(binary_tree()), const_letter(),
              ConstantII(Dyadic(1), Dyadic(-1)), 2)
    assert tr.to_csv_text() == (
        "t,x_t,v_t,w_t\n"
        "0,0,1/2^0,-1/2^0\n"
        "1,0,1/2^0,-1/2^0\n")


def test_pair_game_verdict_needs_both_limits():
    kind = gamma_prime(binary_tree())
    # matched value and covalue hit the payoff from both sides
    v = exact_verdict(kind, const_letter(), ConstantII(Dyadic(1), Dyadic(1)),
                      lambda x: Dyadic(1))
    assert v.outcome is Outcome.WIN_II
    assert v.liminf_covalue == Dyadic(1)
    # covalue stuck below the payoff loses for player II
    v = exact_verdict(kind, const_letter(), ConstantII(Dyadic(1), Dyadic(0)),
                      lambda x: Dyadic(1))
    assert v.outcome is Outcome.WIN_I


def test_undecided_without_finite_state_claim():
    class Opaque(ConstantII):
        finite_state = False

    v = exact_verdict(BIN, const_letter(), Opaque(Dyadic(0)),
                      lambda x: Dyadic(0), cap=50)
    assert not v.exact and v.outcome is Outcome.UNDECIDED
    assert "unclaimed_lasso" in v.diagnostics
    assert v.diagnostics["value_max"] == "0/2^0"


def test_labeling_from_responder_reads_machine_outputs():
    machines = automaton_corpus(31, 6, max_states=3)
    prefixes = [(0,), (1,), (0, 1), (1, 1, 0), (0, 0, 1, 0, 1, 1)]
    for m in machines:
        ufun = u_from_strategy_ii(strategy_ii_from_u(m))
        for s in prefixes:
            assert ufun(s) == m.node_value(s)
    with pytest.raises(ValueError):
        ufun(())


def test_finite_value_set_nearest():
    R = finite_value_set([1, 0, Dyadic(1, 1)])
    assert R.values == (Dyadic(0), Dyadic(1, 1), Dyadic(1))
    assert R.contains(Dyadic(1, 1)) and not R.contains(Dyadic(3, 2))
    assert R.nearest(Dyadic(3, 2)) == Dyadic(1, 1)
    # equidistant points resolve to the smaller member
    assert R.nearest(Dyadic(1, 2)) == Dyadic(0)
    assert R.nearest(Dyadic(3, 1)) == Dyadic(1)
    assert R.near(Dyadic(-5)) == Dyadic(0)
    assert R.near(Dyadic(1, 2), tolerance=Dyadic(1, 3)) == Dyadic(0)
    with pytest.raises(ValueError):
        finite_value_set([])


def test_kind_validation():
    R = finite_value_set([0, 1])
    assert gamma_restricted(R).restriction is R
    assert not gamma(binary_tree()).uses_pairs
    assert gamma_prime(binary_tree()).uses_pairs
