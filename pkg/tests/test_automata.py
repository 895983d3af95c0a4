"""Node automata: serialization, exact limsup evaluation, minmax values."""

import pytest

from limsupgames.automata import (NodeAutomaton, eval_limsup, lasso_summary,
                                  make_automaton, minmax_value)
from limsupgames.corpus import (branch_corpus, constant_automaton,
                                letter_output_automaton, random_automaton,
                                rng_stream)
from limsupgames.dyadic import Dyadic
from limsupgames.trees import EventuallyPeriodicBranch

BRANCHES = branch_corpus(3, 3)


def brute_limsup(u: NodeAutomaton, x: EventuallyPeriodicBranch) -> Dyadic:
    """Simulate far enough that the joint (state, cycle phase) run is purely
    periodic, then max one full joint period."""
    window = u.num_states * len(x.cycle) + 1
    warmup = len(x.stem) + window
    q = u.initial
    outputs = []
    for t in range(warmup + window):
        a = x.letter_at(t)
        outputs.append(u.output(q, a))
        q = u.step(q, a)
    return max(outputs[warmup:])


def brute_minmax(u: NodeAutomaton, q0: int) -> Dyadic:
    """Min over eventually periodic continuations of the whole-future sup
    (transient outputs included).

    Stems to depth 3 and cycles to length 3 exhaust simple paths and simple
    cycles of a 3-state machine, where the optimum lives.
    """
    best = None
    for x in BRANCHES:
        q = q0
        window = u.num_states * len(x.cycle) + 1
        warmup = len(x.stem) + window
        outputs = []
        for t in range(warmup + window):
            a = x.letter_at(t)
            outputs.append(u.output(q, a))
            q = u.step(q, a)
        val = max(outputs)
        if best is None or val < best:
            best = val
    return best


def test_json_round_trip():
    rng = rng_stream(99, "json")
    for _ in range(20):
        u = random_automaton(rng, 4)
        assert NodeAutomaton.from_json_dict(u.to_json_dict()) == u


def test_save_load(tmp_path):
    u = letter_output_automaton()
    path = tmp_path / "m.json"
    u.save(path)
    assert NodeAutomaton.load(path) == u


def test_eval_limsup_standard_machines():
    letter = letter_output_automaton()
    assert eval_limsup(letter, EventuallyPeriodicBranch((), (0, 1))) == Dyadic(1)
    assert eval_limsup(letter, EventuallyPeriodicBranch((1, 1), (0,))) == Dyadic(0)
    const = constant_automaton(Dyadic(3, 1))
    for x in BRANCHES[:10]:
        assert eval_limsup(const, x) == Dyadic(3, 1)


def test_eval_limsup_against_brute():
    rng = rng_stream(7, "limsup-brute")
    for _ in range(25):
        u = random_automaton(rng, 4)
        for x in BRANCHES[::5]:
            assert eval_limsup(u, x) == brute_limsup(u, x)


def test_default_letter_class():
    # binary machines clamp every letter >= 1 into the default class
    rng = rng_stream(8, "classes")
    u = random_automaton(rng, 3)
    a = EventuallyPeriodicBranch((0, 1), (1, 0))
    b = EventuallyPeriodicBranch((0, 7), (9, 0))
    assert eval_limsup(u, a) == eval_limsup(u, b)


def test_minmax_against_brute():
    rng = rng_stream(21, "minmax-brute")
    for _ in range(30):
        u = random_automaton(rng, 3)
        for q in range(u.num_states):
            assert minmax_value(u, q).require_finite() == brute_minmax(u, q)


def test_lasso_summary_consistency():
    rng = rng_stream(5, "summary")
    for _ in range(10):
        u = random_automaton(rng, 4)
        for x in BRANCHES[::7]:
            cert = lasso_summary(u, x)
            assert max(cert.cycle_outputs) == eval_limsup(u, x)
            # replaying the machine reproduces transient then cycle outputs
            q = u.initial
            replay = []
            need = cert.start + 2 * cert.period
            for t in range(need):
                a = x.letter_at(t)
                replay.append(u.output(q, a))
                q = u.step(q, a)
            assert tuple(replay[:cert.start]) == cert.transient_outputs
            assert tuple(replay[cert.start:cert.start + cert.period]) == \
                cert.cycle_outputs
            assert tuple(replay[cert.start + cert.period:need]) == \
                cert.cycle_outputs


def test_make_automaton_validation():
    with pytest.raises(ValueError):
        make_automaton(0, [[0, 2]], [[0, 0]])  # target state out of range
    with pytest.raises(ValueError):
        make_automaton(3, [[0, 0]], [[0, 0]])  # initial out of range
