"""Strategy zoo: copycats, spiral enumeration, lifting, relabeling, and the
two attack strategies, each against hand-checked traces."""

import pytest

from limsupgames.corpus import baire_pair_fixtures, branch_corpus, certify_pair
from limsupgames.dyadic import Dyadic, half_pow
from limsupgames.games import (FiniteValueSet, Outcome, StrategyFault,
                                check_win, exact_verdict, finite_value_set,
                                gamma, gamma_prime, play)
from limsupgames.strategies import (ConstantII, IndicatorPayoff, LetterFSM,
                                     SpiralEnumeration, ValueFSM,
                                     approx_copycat, copycat_strategy,
                                     eventually_zero_instance,
                                     indicator_oscillation_instance,
                                     lift_strategy, pair_strategies,
                                     relabel_strategy, strategy_i_meager_dense,
                                     strategy_i_oscillation,
                                     strategy_ii_from_u)
from limsupgames.trees import binary_tree, nat_tree

BIN = gamma(binary_tree())
NAT = gamma(nat_tree())
PAIR = gamma_prime(binary_tree())


# --- switching attack ---------------------------------------------------


def test_meager_dense_hand_trace():
    # against a constant 29/32 the piece index climbs while the switch
    # threshold 1 - 2^-m stays below the value, then freezes at m = 4
    md = strategy_i_meager_dense(eventually_zero_instance())
    tr = play(BIN, md, ConstantII(Dyadic(29, 5)), 40)
    assert tr.fault is None
    assert tr.letters()[:8] == (0, 1, 1, 1, 1, 1, 0, 0)
    assert [e.round_index for e in md.history] == [0, 2, 3, 4, 5]
    assert [e.m for e in md.history] == [0, 1, 2, 3, 4]
    assert tr.lasso == (6, 1)
    assert md.counters() == {"m": 4, "switches": 4, "round": 40}

    v = check_win(tr, IndicatorPayoff())
    assert v.outcome is Outcome.WIN_I
    assert v.payoff_of_witness == Dyadic(1)
    assert v.limsup_value == Dyadic(29, 5)
    assert all(a == 0 for a in v.witness.cycle)


def test_meager_dense_never_settles_at_the_target_value():
    md = strategy_i_meager_dense(eventually_zero_instance())
    tr = play(BIN, md, ConstantII(Dyadic(1)), 64)
    assert tr.fault is None and tr.lasso is None
    assert md.counters()["m"] >= 10


# --- oscillation attack -------------------------------------------------


def test_oscillation_triggers_every_round_when_crowded():
    osc = strategy_i_oscillation(indicator_oscillation_instance())
    tr = play(PAIR, osc, ConstantII(Dyadic(1), Dyadic(0)), 50)
    assert tr.fault is None
    assert tr.letters() == (0,) * 50
    assert osc.trigger_rounds == list(range(1, 50))
    assert osc.counters()["phase"] == 49


def test_oscillation_stall_is_a_period_one_loss_for_ii():
    # a pair stuck at (1/2, 1/2) never closes either gap: phase 0 forever,
    # the all-zero witness pays 1, the announced limsup is 1/2
    osc = strategy_i_oscillation(indicator_oscillation_instance())
    opp = ConstantII(Dyadic(1, 1), Dyadic(1, 1))
    v = exact_verdict(PAIR, osc, opp, IndicatorPayoff())
    assert v.exact and v.outcome is Outcome.WIN_I
    assert v.lasso is not None and v.lasso[1] == 1
    assert v.payoff_of_witness == Dyadic(1)
    assert v.limsup_value == Dyadic(1, 1)


# --- copycats -----------------------------------------------------------


def test_copycat_rejects_non_naturals():
    tr = play(NAT, copycat_strategy(), ConstantII(Dyadic(1, 1)), 6)
    assert tr.fault is not None and tr.fault.blame == "II"
    assert "natural" in tr.fault.detail
    tr = play(NAT, copycat_strategy(), ConstantII(Dyadic(-2)), 6)
    assert tr.fault.blame == "II"


def test_approx_copycat_tracks_within_budget():
    enum = SpiralEnumeration()
    target = Dyadic(3, 2)
    tr = play(NAT, approx_copycat(), ConstantII(target), 12)
    assert tr.fault is None
    for t in range(1, 12):
        approx = enum.value(tr.rows[t].letter)
        gap = approx - target if target < approx else target - approx
        assert gap <= half_pow(t - 1), t
    # unbounded state declared, so no exact verdict without a fault
    v = exact_verdict(NAT, approx_copycat(), ConstantII(target),
                      lambda x: target, cap=40)
    assert v.outcome is Outcome.UNDECIDED


def test_approx_copycat_search_cap_faults_itself():
    tr = play(NAT, approx_copycat(search_cap=3), ConstantII(Dyadic(3, 2)), 30)
    assert tr.fault is not None and tr.fault.blame == "I"
    assert "cap" in tr.fault.detail


# --- spiral enumeration -------------------------------------------------


def test_spiral_enumeration_round_trips():
    enum = SpiralEnumeration()
    seen = set()
    for i in range(300):
        v = enum.value(i)
        assert enum.least_index(v, Dyadic(0)) <= i
        assert enum.value(enum.least_index(v, Dyadic(0))) == v
        seen.add(v)
    # level 4 is fully enumerated by index 300, so everything on its grid
    # with magnitude at most 5 has appeared
    for num in range(-5, 6):
        for exp in range(3):
            assert Dyadic(num, exp) in seen
    with pytest.raises(ValueError):
        enum.value(-1)
    with pytest.raises(ValueError):
        enum.least_index(Dyadic(0), Dyadic(-1, 1))


def test_least_index_matches_linear_scan():
    enum = SpiralEnumeration()
    probe = [Dyadic(0), Dyadic(1), Dyadic(-3, 1), Dyadic(5, 3), Dyadic(-7, 2)]
    for v in probe:
        for tol in [Dyadic(0), Dyadic(1, 2), Dyadic(1, 1)]:
            want = next(i for i in range(2000)
                        if _within(enum.value(i), v, tol))
            assert enum.least_index(v, tol) == want, (v, tol)


def _within(a: Dyadic, b: Dyadic, tol: Dyadic) -> bool:
    gap = a - b if b < a else b - a
    return gap <= tol


# --- lifting into the restricted game -----------------------------------


def test_lifted_strategy_replays_base_on_rounded_values():
    R = finite_value_set([Dyadic(0), Dyadic(1)])
    base = LetterFSM([0, 1], [[1, 1, 0], [0, 1, 1]],
                     thresholds=[Dyadic(1, 1)])
    opp = ValueFSM([[1, 0], [0, 1]], [Dyadic(3, 2), Dyadic(7, 3)])
    tr = play(BIN, lift_strategy(base, R), opp, 30)
    assert tr.fault is None
    base.reset()
    letters = [base.move(None)]
    for t in range(1, 30):
        letters.append(base.move(R.near(tr.rows[t - 1].value)))
    assert tuple(letters) == tr.letters()


def test_lifted_strategy_faults_when_oracle_escapes():
    class Escaping(FiniteValueSet):
        def near(self, v, tolerance=None):
            return Dyadic(99)

    base = LetterFSM([0], [[0, 0]])
    lifted = lift_strategy(base, Escaping((Dyadic(0), Dyadic(1))))
    tr = play(BIN, lifted, ConstantII(Dyadic(1, 1)), 6)
    assert tr.fault is not None and tr.fault.blame == "I"
    assert "escaped the answer set" in tr.fault.detail


# --- relabeling ---------------------------------------------------------


def test_relabeled_copycat_plays_preimages():
    mapping = {Dyadic(n): Dyadic(n, 1) for n in range(8)}
    rel = relabel_strategy(copycat_strategy(), mapping)
    tr = play(NAT, rel, ConstantII(Dyadic(3, 1)), 10)
    assert tr.fault is None
    assert tr.letters()[:2] == (0, 3)
    assert set(tr.letters()[1:]) == {3}
    # same letters as the unrelabeled copycat hearing the preimage
    ref = play(NAT, copycat_strategy(), ConstantII(Dyadic(3)), 10)
    assert tr.letters() == ref.letters()


def test_relabeling_image_and_monotonicity():
    mapping = {Dyadic(n): Dyadic(n, 1) for n in range(8)}
    rel = relabel_strategy(copycat_strategy(), mapping)
    tr = play(NAT, rel, ConstantII(Dyadic(1, 2)), 6)
    assert tr.fault is not None and tr.fault.blame == "II"
    assert "image" in tr.fault.detail
    with pytest.raises(ValueError):
        relabel_strategy(copycat_strategy(), {Dyadic(0): Dyadic(1),
                                              Dyadic(1): Dyadic(1)})
    with pytest.raises(ValueError):
        relabel_strategy(copycat_strategy(), {Dyadic(0): Dyadic(2),
                                              Dyadic(1): Dyadic(1)})


# --- paired responders --------------------------------------------------


def test_pair_fixtures_certify_negation():
    branches = branch_corpus(2, 2)
    for fx in baire_pair_fixtures(41, 10):
        assert certify_pair(fx.u_f, fx.u_neg, branches)


def test_pair_responder_announces_two_sided_certificates():
    fx = baire_pair_fixtures(42, 1)[0]
    sII = pair_strategies(strategy_ii_from_u(fx.u_f),
                          strategy_ii_from_u(fx.u_neg))
    tr = play(PAIR, LetterFSM([0], [[0, 0]]), sII, 12)
    assert tr.fault is None
    for row in tr.rows:
        assert row.covalue is not None
    # covalue = -(negated machine's output) = the function's own output
    assert all(r.value == r.covalue for r in tr.rows)
    v = check_win(tr, fx.u_f)
    assert v.outcome is Outcome.WIN_II
