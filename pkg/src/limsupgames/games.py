"""Two-player limsup games on pruned trees, with lasso-certified verdicts.

Player I extends the branch one letter per round; player II answers with a
claimed value (or a value pair in the two-sided variant).  II wins when the
payoff of the emitted branch equals the limsup of the claimed values (and,
for pairs, the liminf of the second coordinates).  Verdicts are exact only
when the joint strategy state lassos; everything else is reported undecided
with window diagnostics.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

from .automata import NodeAutomaton, eval_limsup
from .dyadic import Dyadic, as_dyadic
from .trees import EventuallyPeriodicBranch, Prefix, TreeSpec, nat_tree

MAX_TRACE_ROUNDS = 10 ** 6

GAMMA = "gamma"
GAMMA_PRIME = "gamma_prime"
GAMMA_RESTRICTED = "gamma_restricted"


@dataclass(frozen=True)
class FiniteValueSet:
    """Finite set of dyadic values, for the restricted-answer variant."""

    values: Tuple[Dyadic, ...]

    def __post_init__(self):
        vals = tuple(sorted(set(self.values)))
        if not vals:
            raise ValueError("value set must be nonempty")
        object.__setattr__(self, "values", vals)

    def contains(self, v: Dyadic) -> bool:
        return v in self.values

    def nearest(self, v: Dyadic) -> Dyadic:
        # ties broken toward the smaller member
        best = self.values[0]
        bestd = abs(v - best)
        for cand in self.values[1:]:
            d = abs(v - cand)
            if d < bestd:
                best, bestd = cand, d
        return best

    def near(self, v: Dyadic, tolerance=None) -> Dyadic:
        """Pick a member within distance(v, set) + tolerance of v.

        Returning the exact nearest member satisfies every positive
        tolerance at once, so the argument only documents the caller's
        precision budget and is not consulted.
        """
        return self.nearest(v)


def finite_value_set(values: Iterable) -> FiniteValueSet:
    return FiniteValueSet(tuple(as_dyadic(v) for v in values))


@dataclass(frozen=True)
class GameKind:
    variant: str
    tree: TreeSpec
    restriction: Optional[FiniteValueSet] = None

    def __post_init__(self):
        if self.variant not in (GAMMA, GAMMA_PRIME, GAMMA_RESTRICTED):
            raise ValueError(f"unknown variant {self.variant!r}")
        if (self.variant == GAMMA_RESTRICTED) != (self.restriction is not None):
            raise ValueError("restriction is for gamma_restricted only")

    @property
    def uses_pairs(self) -> bool:
        return self.variant == GAMMA_PRIME


def gamma(tree: Optional[TreeSpec] = None) -> GameKind:
    return GameKind(GAMMA, tree if tree is not None else nat_tree())


def gamma_prime(tree: Optional[TreeSpec] = None) -> GameKind:
    return GameKind(GAMMA_PRIME, tree if tree is not None else nat_tree())


def gamma_restricted(restriction: FiniteValueSet,
                     tree: Optional[TreeSpec] = None) -> GameKind:
    return GameKind(GAMMA_RESTRICTED, tree if tree is not None else nat_tree(),
                    restriction)


class StrategyFault(Exception):
    """A player left the game's legal move space."""

    def __init__(self, blame: str, detail: str, round_index: int = -1):
        if blame not in ("I", "II"):
            raise ValueError("blame must be 'I' or 'II'")
        self.blame = blame
        self.detail = detail
        self.round_index = round_index
        super().__init__(f"player {blame} fault: {detail}")


class CertificateMismatchError(Exception):
    """A trace contradicts its own lasso certificate."""


class StrategyI:
    """Letter player.  move sees II's previous announcement (None in round 0).

    finite_state means state_key ranges over a finite set and fully
    determines future behavior; only then do lassos yield exact verdicts.
    """

    finite_state = False

    def reset(self) -> None:
        pass

    def move(self, last_value):
        raise NotImplementedError

    def state_key(self):
        return None

    def counters(self) -> Dict[str, int]:
        return {}


class StrategyII:
    """Value player.  move sees the letter just played and answers a dyadic
    value, or a (value, covalue) pair in the two-sided variant."""

    finite_state = False

    def reset(self) -> None:
        pass

    def move(self, letter: int):
        raise NotImplementedError

    def state_key(self):
        return None

    def counters(self) -> Dict[str, int]:
        return {}


@dataclass(frozen=True)
class RunRow:
    t: int
    letter: int
    value: Dyadic
    covalue: Optional[Dyadic] = None

    def observable(self):
        return (self.letter, self.value, self.covalue)


@dataclass(frozen=True)
class FaultRecord:
    blame: str
    round_index: int
    detail: str


@dataclass(frozen=True)
class RunTrace:
    kind: GameKind
    rows: Tuple[RunRow, ...]
    lasso: Optional[Tuple[int, int]] = None
    fault: Optional[FaultRecord] = None

    def letters(self) -> Tuple[int, ...]:
        return tuple(r.letter for r in self.rows)

    def values(self) -> Tuple[Dyadic, ...]:
        return tuple(r.value for r in self.rows)

    def covalues(self) -> Tuple[Optional[Dyadic], ...]:
        return tuple(r.covalue for r in self.rows)

    def witness_branch(self) -> EventuallyPeriodicBranch:
        if self.lasso is None:
            raise ValueError("no lasso, no witness branch")
        start, period = self.lasso
        letters = self.letters()
        return EventuallyPeriodicBranch(letters[:start],
                                        letters[start:start + period])

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x_t", "v_t", "w_t"])
        for r in self.rows:
            w.writerow([r.t, r.letter, str(r.value),
                        "" if r.covalue is None else str(r.covalue)])
        return buf.getvalue()

    def sidecar(self, verdict_json=None) -> dict:
        side = {
            "variant": self.kind.variant,
            "rounds": len(self.rows),
            "lasso": None if self.lasso is None else
                {"start": self.lasso[0], "period": self.lasso[1]},
            "fault": None if self.fault is None else
                {"blame": self.fault.blame, "round": self.fault.round_index,
                 "detail": self.fault.detail},
        }
        if verdict_json is not None:
            side["verdict"] = verdict_json
        return side


def _coerce_answer(kind: GameKind, raw, t: int):
    if kind.uses_pairs:
        if (not isinstance(raw, tuple)) or len(raw) != 2:
            raise StrategyFault("II", f"expected a (value, covalue) pair, got {raw!r}", t)
        v, w = raw
        return as_dyadic(v), as_dyadic(w)
    if isinstance(raw, tuple):
        raise StrategyFault("II", "pair answered in a single-value game", t)
    return as_dyadic(raw), None


def play(kind: GameKind, sI: StrategyI, sII: StrategyII, horizon: int,
         stop_after_lasso: Optional[int] = None) -> RunTrace:
    """Run the game round by round, recording moves, faults, and the lasso.

    The joint key recorded before each round is (I state, II state, last
    announcement); the first repeat fixes the lasso, whose start is then
    rolled back as far as the observed rows stay periodic.  By default the
    run continues to the horizon; stop_after_lasso=k cuts it k periods past
    the detection point instead.
    """
    horizon = min(horizon, MAX_TRACE_ROUNDS)
    sI.reset()
    sII.reset()
    rows = []
    seen: Dict[object, int] = {}
    last = None
    prefix: Prefix = ()
    lasso = None
    fault = None
    stop_at = horizon
    t = 0
    while t < min(stop_at, horizon):
        if lasso is None:
            try:
                key = (sI.state_key(), sII.state_key(), last)
                first = seen.get(key)
            except TypeError:
                first = None
                key = None
            if first is not None:
                period = t - first
                start = first
                while start > 0 and rows[start - 1].observable() == \
                        rows[start - 1 + period].observable():
                    start -= 1
                lasso = (start, period)
                if stop_after_lasso is not None:
                    stop_at = t + stop_after_lasso * period
                    if stop_at <= t:
                        break
            elif key is not None:
                seen[key] = t
        try:
            letter = sI.move(last)
            if not isinstance(letter, int) or isinstance(letter, bool) or letter < 0:
                raise StrategyFault("I", f"letter {letter!r} is not a natural", t)
            if not kind.tree.contains(prefix + (letter,)):
                raise StrategyFault("I", f"letter {letter} leaves the tree", t)
            prefix = prefix + (letter,)
            raw = sII.move(letter)
            v, w = _coerce_answer(kind, raw, t)
            if kind.restriction is not None and not kind.restriction.contains(v):
                raise StrategyFault("II", f"value {v} outside the allowed set", t)
        except StrategyFault as exc:
            fault = FaultRecord(exc.blame, t, exc.detail)
            break
        rows.append(RunRow(t, letter, v, w))
        last = v if w is None else (v, w)
        t += 1
    return RunTrace(kind, tuple(rows), lasso, fault)


Payoff = Union[NodeAutomaton, object]


def payoff_value(payoff: Payoff, x: EventuallyPeriodicBranch) -> Dyadic:
    if isinstance(payoff, NodeAutomaton):
        return eval_limsup(payoff, x)
    if hasattr(payoff, "value_on"):
        return payoff.value_on(x)
    if callable(payoff):
        return as_dyadic(payoff(x))
    raise TypeError(f"cannot evaluate payoff {payoff!r}")


class Outcome(str, Enum):
    WIN_I = "WinI"
    WIN_II = "WinII"
    UNDECIDED = "UndecidedAtHorizon"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    reason: str
    horizon: int
    lasso: Optional[Tuple[int, int]] = None
    witness: Optional[EventuallyPeriodicBranch] = None
    fault: Optional[FaultRecord] = None
    payoff_of_witness: Optional[Dyadic] = None
    limsup_value: Optional[Dyadic] = None
    liminf_covalue: Optional[Dyadic] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.outcome is not Outcome.UNDECIDED

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "reason": self.reason,
            "horizon": self.horizon,
            "lasso": None if self.lasso is None else
                {"start": self.lasso[0], "period": self.lasso[1]},
            "witness": None if self.witness is None else str(self.witness),
            "fault": None if self.fault is None else
                {"blame": self.fault.blame, "round": self.fault.round_index,
                 "detail": self.fault.detail},
            "payoff_of_witness":
                None if self.payoff_of_witness is None else str(self.payoff_of_witness),
            "limsup_value":
                None if self.limsup_value is None else str(self.limsup_value),
            "liminf_covalue":
                None if self.liminf_covalue is None else str(self.liminf_covalue),
            "diagnostics": self.diagnostics,
        }


def _fault_verdict(trace: RunTrace, horizon: int) -> Verdict:
    assert trace.fault is not None
    winner = Outcome.WIN_I if trace.fault.blame == "II" else Outcome.WIN_II
    return Verdict(winner, f"player {trace.fault.blame} fault", horizon,
                   fault=trace.fault)


def _lasso_verdict(kind: GameKind, trace: RunTrace, payoff: Payoff,
                   horizon: int) -> Verdict:
    start, period = trace.lasso
    witness = trace.witness_branch()
    f = payoff_value(payoff, witness)
    cyc = trace.rows[start:start + period]
    limsup_v = max(r.value for r in cyc)
    liminf_w = None
    ok = (f == limsup_v)
    if kind.uses_pairs:
        liminf_w = min(r.covalue for r in cyc)
        ok = ok and (f == liminf_w)
    outcome = Outcome.WIN_II if ok else Outcome.WIN_I
    return Verdict(outcome, "lasso-certified", horizon, trace.lasso, witness,
                   None, f, limsup_v, liminf_w)


def _window_diagnostics(trace: RunTrace, sI: StrategyI, sII: StrategyII) -> dict:
    rows = trace.rows
    window = rows[len(rows) // 2:]
    diag = {"window_rounds": len(window)}
    if window:
        vs = [r.value for r in window]
        diag["value_max"] = str(max(vs))
        diag["value_min"] = str(min(vs))
        ws = [r.covalue for r in window if r.covalue is not None]
        if ws:
            diag["covalue_max"] = str(max(ws))
            diag["covalue_min"] = str(min(ws))
    diag["counters_I"] = sI.counters()
    diag["counters_II"] = sII.counters()
    return diag


def exact_verdict(kind: GameKind, sI: StrategyI, sII: StrategyII,
                  payoff: Payoff, cap: int = 50000) -> Verdict:
    """Play to a fault, a certified lasso, or the cap.

    Exact outcomes need either a fault or a lasso between two strategies
    that both declare finite state; anything else is UndecidedAtHorizon
    with tail-window diagnostics and the strategies' own counters.
    """
    trace = play(kind, sI, sII, cap, stop_after_lasso=1)
    if trace.fault is not None:
        return _fault_verdict(trace, cap)
    if trace.lasso is not None and sI.finite_state and sII.finite_state:
        return _lasso_verdict(kind, trace, payoff, cap)
    diag = _window_diagnostics(trace, sI, sII)
    if trace.lasso is not None:
        diag["unclaimed_lasso"] = {"start": trace.lasso[0],
                                   "period": trace.lasso[1]}
    return Verdict(Outcome.UNDECIDED, "no certified lasso within cap", cap,
                   diagnostics=diag)


def check_win(trace: RunTrace, payoff: Payoff,
              kind: Optional[GameKind] = None) -> Verdict:
    """Re-derive the verdict from a recorded trace alone.

    Fault traces settle by blame.  Lasso traces must exhibit at least one
    full repeated period in their rows; any deviation from the claimed
    periodicity raises CertificateMismatchError.  Works for strategies of
    any declared state size since only the rows are consulted.
    """
    kind = kind if kind is not None else trace.kind
    horizon = len(trace.rows)
    if trace.fault is not None:
        return _fault_verdict(trace, horizon)
    if trace.lasso is None:
        raise ValueError("trace carries neither fault nor lasso")
    start, period = trace.lasso
    if len(trace.rows) < start + 2 * period:
        raise CertificateMismatchError(
            f"trace too short to witness lasso ({start}, {period})")
    for t in range(start, len(trace.rows) - period):
        if trace.rows[t].observable() != trace.rows[t + period].observable():
            raise CertificateMismatchError(
                f"row {t} breaks period {period}")
    return _lasso_verdict(kind, trace, payoff, horizon)
