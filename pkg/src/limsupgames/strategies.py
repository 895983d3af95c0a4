"""Strategy zoo: value followers, finite Mealy machines, copycats, lifts,
relabelings, and the two hand-built Player I attack strategies (the
meager-dense switcher and the two-sided oscillator)."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .automata import NodeAutomaton
from .dyadic import Dyadic, as_dyadic, half_pow
from .games import FiniteValueSet, StrategyFault, StrategyI, StrategyII
from .trees import EventuallyPeriodicBranch, Prefix, TreeSpec, binary_tree


class AutomatonResponder(StrategyII):
    """Announces the payoff machine's own outputs along the played prefix.

    By construction the announced sequence is the output sequence of the
    branch, so its limsup equals the payoff on every branch.
    """

    finite_state = True

    def __init__(self, u: NodeAutomaton):
        self.u = u
        self.q = u.initial

    def reset(self) -> None:
        self.q = self.u.initial

    def move(self, letter: int) -> Dyadic:
        v = self.u.output(self.q, letter)
        self.q = self.u.step(self.q, letter)
        return v

    def state_key(self):
        return self.q


def strategy_ii_from_u(u: NodeAutomaton) -> AutomatonResponder:
    return AutomatonResponder(u)


def u_from_strategy_ii(sII: StrategyII) -> Callable[[Prefix], Dyadic]:
    """Node labeling read off a value strategy: u(s) is the value announced
    after the letters of s.  Defined on nonempty prefixes; resets sII."""

    def u(s: Prefix) -> Dyadic:
        if not s:
            raise ValueError("labeling from a strategy needs a nonempty prefix")
        sII.reset()
        v = None
        for a in s:
            v = sII.move(a)
        if isinstance(v, tuple):
            v = v[0]
        return as_dyadic(v)

    return u


class ConstantII(StrategyII):
    finite_state = True

    def __init__(self, value, covalue=None):
        self.value = as_dyadic(value)
        self.covalue = None if covalue is None else as_dyadic(covalue)

    def move(self, letter: int):
        if self.covalue is None:
            return self.value
        return (self.value, self.covalue)

    def state_key(self):
        return 0


class ValueFSM(StrategyII):
    """Mealy value machine: step on the letter's class, announce the state's
    value.  Letters beyond the table width share the last class."""

    finite_state = True

    def __init__(self, trans: Sequence[Sequence[int]],
                 values: Sequence, initial: int = 0,
                 covalues: Optional[Sequence] = None):
        self.trans = tuple(tuple(row) for row in trans)
        self.values = tuple(as_dyadic(v) for v in values)
        self.covalues = None if covalues is None else \
            tuple(as_dyadic(v) for v in covalues)
        if len(self.trans) != len(self.values):
            raise ValueError("one value per state required")
        if self.covalues is not None and len(self.covalues) != len(self.values):
            raise ValueError("one covalue per state required")
        self.initial = initial
        self.q = initial

    def reset(self) -> None:
        self.q = self.initial

    def _class(self, letter: int) -> int:
        return min(letter, len(self.trans[self.q]) - 1)

    def move(self, letter: int):
        self.q = self.trans[self.q][self._class(letter)]
        if self.covalues is None:
            return self.values[self.q]
        return (self.values[self.q], self.covalues[self.q])

    def state_key(self):
        return self.q


def pair_fsm(trans, values, covalues, initial: int = 0) -> ValueFSM:
    return ValueFSM(trans, values, initial=initial, covalues=covalues)


class LetterFSM(StrategyI):
    """Moore letter machine driven by threshold buckets of II's values.

    Bucket 0 is the opening round (no announcement yet); value v lands in
    bucket 1 + #(thresholds <= v).  Pairs are bucketed by their first
    coordinate.
    """

    finite_state = True

    def __init__(self, emits: Sequence[int], trans: Sequence[Sequence[int]],
                 thresholds: Sequence = (), initial: int = 0):
        self.emits = tuple(int(a) for a in emits)
        self.trans = tuple(tuple(row) for row in trans)
        self.thresholds = tuple(sorted(as_dyadic(c) for c in thresholds))
        if len(self.emits) != len(self.trans):
            raise ValueError("one emitted letter per state required")
        width = len(self.thresholds) + 2
        for row in self.trans:
            if len(row) != width:
                raise ValueError(f"transition rows must have width {width}")
        self.initial = initial
        self.q = initial

    def reset(self) -> None:
        self.q = self.initial

    def _bucket(self, last) -> int:
        if last is None:
            return 0
        v = last[0] if isinstance(last, tuple) else last
        return 1 + bisect.bisect_right(self.thresholds, v)

    def move(self, last) -> int:
        self.q = self.trans[self.q][self._bucket(last)]
        return self.emits[self.q]

    def state_key(self):
        return self.q


class CopycatI(StrategyI):
    """Echoes II's previous value as the next letter; first letter 0.

    Only natural announcements are legal input, so a fractional or negative
    value is II's fault.
    """

    finite_state = True

    def __init__(self):
        self.t = 0

    def reset(self) -> None:
        self.t = 0

    def move(self, last) -> int:
        t = self.t
        self.t += 1
        if last is None:
            return 0
        v = last[0] if isinstance(last, tuple) else last
        if v.exp != 0 or v.num < 0:
            raise StrategyFault("II", f"copycat needs a natural, got {v}", t)
        return v.num

    def state_key(self):
        return 0

    def counters(self) -> Dict[str, int]:
        return {"round": self.t}


def copycat_strategy() -> CopycatI:
    return CopycatI()


class SpiralEnumeration:
    """Enumeration of the dyadic rationals by grid level.

    Level j lists z / 2^j for integer z in [-(j+1) 2^j, (j+1) 2^j], ordered
    0, 1, -1, 2, -2, ...; levels are concatenated.  Every dyadic appears,
    and any target interval of width 2^-n is hit by level max(n, size
    bound), so least_index needs no scanning.
    """

    def __init__(self):
        self._offsets = [0]

    @staticmethod
    def _bound(j: int) -> int:
        return (j + 1) << j

    @staticmethod
    def _position(z: int) -> int:
        if z > 0:
            return 2 * z - 1
        return -2 * z

    def _offset(self, j: int) -> int:
        while len(self._offsets) <= j:
            k = len(self._offsets) - 1
            self._offsets.append(self._offsets[-1] + 2 * self._bound(k) + 1)
        return self._offsets[j]

    def value(self, i: int) -> Dyadic:
        if i < 0:
            raise ValueError("index must be a natural")
        j = 0
        while self._offset(j + 1) <= i:
            j += 1
        pos = i - self._offset(j)
        if pos == 0:
            z = 0
        elif pos % 2 == 1:
            z = (pos + 1) // 2
        else:
            z = -(pos // 2)
        return Dyadic(z, j)

    def index_of(self, z: int, j: int) -> int:
        if abs(z) > self._bound(j):
            raise ValueError("out of range for the level")
        return self._offset(j) + self._position(z)

    @staticmethod
    def _scaled_ceil(v: Dyadic, j: int) -> int:
        # ceil(v * 2^j) via integer shifts
        if v.exp <= j:
            return v.num << (j - v.exp)
        sh = v.exp - j
        return -((-v.num) >> sh)

    @staticmethod
    def _scaled_floor(v: Dyadic, j: int) -> int:
        if v.exp <= j:
            return v.num << (j - v.exp)
        return v.num >> (v.exp - j)

    def least_index(self, v: Dyadic, tol: Dyadic) -> int:
        """Smallest i with |value(i) - v| <= tol.

        Indices of level j all precede those of level j+1, and inside a
        level smaller |z| comes first, so it suffices to test levels in
        order and pick the admissible z closest to zero.
        """
        if tol.num < 0:
            raise ValueError("tolerance must be nonnegative")
        j = 0
        while True:
            bound = self._bound(j)
            lo = max(self._scaled_ceil(v - tol, j), -bound)
            hi = min(self._scaled_floor(v + tol, j), bound)
            if lo <= hi:
                if lo <= 0 <= hi:
                    z = 0
                elif lo > 0:
                    z = lo
                else:
                    z = hi
                return self._offset(j) + self._position(z)
            j += 1


class ApproxCopycatI(StrategyI):
    """Plays the least enumeration index within 2^-(t-1) of II's last value.

    The tolerance shrinks each round, so the state is genuinely unbounded.
    An optional search_cap bounds how deep into the enumeration the
    strategy may reach; needing a larger index is its own fault.
    """

    finite_state = False

    def __init__(self, enum: Optional[SpiralEnumeration] = None,
                 search_cap: Optional[int] = None):
        self.enum = enum if enum is not None else SpiralEnumeration()
        self.search_cap = search_cap
        self.t = 0

    def reset(self) -> None:
        self.t = 0

    def move(self, last) -> int:
        t = self.t
        self.t += 1
        if last is None:
            return 0
        v = last[0] if isinstance(last, tuple) else last
        idx = self.enum.least_index(v, half_pow(t - 1))
        if self.search_cap is not None and idx > self.search_cap:
            raise StrategyFault(
                "I", f"no enumeration index within cap at round {t} for {v}", t)
        return idx

    def state_key(self):
        return self.t

    def counters(self) -> Dict[str, int]:
        return {"round": self.t}


def approx_copycat(enum: Optional[SpiralEnumeration] = None,
                   search_cap: Optional[int] = None) -> ApproxCopycatI:
    return ApproxCopycatI(enum, search_cap)


class LiftedI(StrategyI):
    """Plays a restricted-answer letter strategy against unrestricted values.

    Each announced value is rounded into the finite answer set through the
    set's near oracle before the base strategy sees it.  The round-n
    precision budget shrinks like 1/(n+2), which nearest-point rounding
    beats at every round; the wrapper still checks that the oracle's pick
    lands inside the set and converts any escape into a fault.
    """

    def __init__(self, base: StrategyI, restriction: FiniteValueSet):
        self.base = base
        self.restriction = restriction
        self.finite_state = base.finite_state
        self.t = 0

    def reset(self) -> None:
        self.base.reset()
        self.t = 0

    def round_value(self, v) -> Dyadic:
        picked = self.restriction.near(as_dyadic(v))
        if not self.restriction.contains(picked):
            raise StrategyFault(
                "I", f"near oracle escaped the answer set: {picked}", self.t)
        return picked

    def move(self, last) -> int:
        if last is not None:
            if isinstance(last, tuple):
                last = (self.round_value(last[0]), self.round_value(last[1]))
            else:
                last = self.round_value(last)
        self.t += 1
        return self.base.move(last)

    def state_key(self):
        return self.base.state_key()

    def counters(self) -> Dict[str, int]:
        return self.base.counters()


def lift_strategy(base: StrategyI, restriction: FiniteValueSet) -> LiftedI:
    return LiftedI(base, restriction)


class RelabeledI(StrategyI):
    """Feeds a letter strategy the preimages of announced values; values
    outside the relabeling's image are the announcer's fault."""

    def __init__(self, base: StrategyI, mapping: Dict[Dyadic, Dyadic]):
        self.base = base
        pairs = sorted((as_dyadic(k), as_dyadic(v)) for k, v in mapping.items())
        for (_, va), (_, vb) in zip(pairs, pairs[1:]):
            if not va < vb:
                raise ValueError("relabeling must be strictly increasing")
        self.inverse: Dict[Dyadic, Dyadic] = {v: k for k, v in pairs}
        self.finite_state = base.finite_state

    def reset(self) -> None:
        self.base.reset()

    def _unmap(self, v) -> Dyadic:
        v = as_dyadic(v)
        got = self.inverse.get(v)
        if got is None:
            raise StrategyFault("II", f"value {v} outside the relabeling image", -1)
        return got

    def move(self, last) -> int:
        if last is None:
            return self.base.move(None)
        if isinstance(last, tuple):
            return self.base.move((self._unmap(last[0]), self._unmap(last[1])))
        return self.base.move(self._unmap(last))

    def state_key(self):
        return self.base.state_key()

    def counters(self) -> Dict[str, int]:
        return self.base.counters()


def relabel_strategy(base: StrategyI, mapping: Dict[Dyadic, Dyadic]) -> RelabeledI:
    return RelabeledI(base, mapping)


class PairResponder(StrategyII):
    """Runs one strategy for the function and one for its negation and
    announces (value, -covalue), the two-sided certificate pair."""

    def __init__(self, sf: StrategyII, sg: StrategyII):
        self.sf = sf
        self.sg = sg
        self.finite_state = sf.finite_state and sg.finite_state

    def reset(self) -> None:
        self.sf.reset()
        self.sg.reset()

    def move(self, letter: int):
        v = self.sf.move(letter)
        w = self.sg.move(letter)
        if isinstance(v, tuple) or isinstance(w, tuple):
            raise StrategyFault("II", "pair components must be single values", -1)
        return (as_dyadic(v), -as_dyadic(w))

    def state_key(self):
        return (self.sf.state_key(), self.sg.state_key())

    def counters(self) -> Dict[str, int]:
        return {**self.sf.counters(), **self.sg.counters()}


def pair_strategies(sf: StrategyII, sg: StrategyII) -> PairResponder:
    return PairResponder(sf, sg)


@dataclass(frozen=True)
class IndicatorPayoff:
    """1 on branches that are eventually all zero, else 0."""

    label: str = "eventually-zero indicator"

    def value_on(self, x: EventuallyPeriodicBranch) -> Dyadic:
        return Dyadic(1 if all(a == 0 for a in x.cycle) else 0)


@dataclass(frozen=True)
class MeagerDenseInstance:
    """Inputs for the switching attack against a value r approached through
    a countable union of closed nowhere-covering pieces.

    s_disjoint(s, m) must answer whether the cylinder at s misses piece m;
    pick_y(s, m) extends s to a branch outside pieces 0..m.  prefix_digest
    compresses the prefix to exactly the information future queries need;
    the default keeps the whole prefix, which is always sound but prevents
    run-state lassos.
    """

    tree: TreeSpec
    r: Dyadic
    s_disjoint: Callable[[Prefix, int], bool]
    pick_y: Callable[[Prefix, int], EventuallyPeriodicBranch]
    prefix_digest: Optional[Callable[[Prefix, int], Hashable]] = None
    label: str = "meager-dense"


def eventually_zero_instance() -> MeagerDenseInstance:
    """Pieces S_m = branches with no 1 past position m; their union is the
    eventually-zero set, dense but meager in the binary branch space."""

    def s_disjoint(s: Prefix, m: int) -> bool:
        return any(s[i] == 1 for i in range(m + 1, len(s)))

    def pick_y(s: Prefix, m: int) -> EventuallyPeriodicBranch:
        one_at = max(len(s), m + 1)
        stem = tuple(s) + (0,) * (one_at - len(s)) + (1,)
        return EventuallyPeriodicBranch(stem, (0,))

    return MeagerDenseInstance(binary_tree(), Dyadic(1), s_disjoint, pick_y,
                               prefix_digest=lambda s, m: s_disjoint(s, m),
                               label="eventually-zero")


@dataclass(frozen=True)
class SwitchEvent:
    round_index: int
    m: int
    prefix_len: int
    target: EventuallyPeriodicBranch


class MeagerDenseI(StrategyI):
    """Switching attacker: follow a branch outside pieces 0..m until II's
    value crowds r while the prefix already escapes piece m, then bump m
    and retarget.

    The piece index can grow forever, so the strategy declares unbounded
    state; stalled runs still lasso in play because the state key keeps
    only the digest of the prefix.
    """

    finite_state = False

    def __init__(self, instance: MeagerDenseInstance):
        self.instance = instance
        self.reset()

    def reset(self) -> None:
        self.m = 0
        self.prefix: Prefix = ()
        self.target: Optional[EventuallyPeriodicBranch] = None
        self.switches = 0
        self.t = 0
        self.history: List[SwitchEvent] = []

    def _retarget(self) -> None:
        target = self.instance.pick_y(self.prefix, self.m)
        if target.first(len(self.prefix)) != tuple(self.prefix):
            raise StrategyFault(
                "I", f"picked branch does not extend the prefix at m={self.m}",
                self.t)
        self.target = target
        self.history.append(SwitchEvent(self.t, self.m, len(self.prefix), target))

    def move(self, last) -> int:
        inst = self.instance
        if last is None:
            self._retarget()
        else:
            v = last[0] if isinstance(last, tuple) else last
            threshold = inst.r - half_pow(self.m)
            if threshold < v and inst.s_disjoint(self.prefix, self.m):
                self.m += 1
                self.switches += 1
                self._retarget()
        letter = self.target.letter_at(len(self.prefix))
        self.prefix = self.prefix + (letter,)
        self.t += 1
        return letter

    def state_key(self):
        pos = len(self.prefix)
        digest = self.instance.prefix_digest
        dig = self.prefix if digest is None else digest(self.prefix, self.m)
        tkey = None if self.target is None else self.target.suffix_key(pos)
        return (self.m, tkey, dig)

    def counters(self) -> Dict[str, int]:
        return {"m": self.m, "switches": self.switches, "round": self.t}


def strategy_i_meager_dense(instance: MeagerDenseInstance) -> MeagerDenseI:
    return MeagerDenseI(instance)


@dataclass(frozen=True)
class OscillationInstance:
    """Inputs for the two-sided attack on a set whose closure keeps both a
    value-sup and a value-inf witness above every node.

    pick_high(s) / pick_low(s) extend s to branches with payoff sup_f and
    inf_f; both must append prefix-independent tails so the strategy's
    state stays finite.
    """

    tree: TreeSpec
    sup_f: Dyadic
    inf_f: Dyadic
    epsilon: Dyadic
    pick_high: Callable[[Prefix], EventuallyPeriodicBranch]
    pick_low: Callable[[Prefix], EventuallyPeriodicBranch]
    payoff: object
    label: str = "oscillation"


def indicator_oscillation_instance() -> OscillationInstance:
    def pick_high(s: Prefix) -> EventuallyPeriodicBranch:
        return EventuallyPeriodicBranch(tuple(s), (0,))

    def pick_low(s: Prefix) -> EventuallyPeriodicBranch:
        return EventuallyPeriodicBranch(tuple(s), (0, 1))

    return OscillationInstance(binary_tree(), Dyadic(1), Dyadic(0),
                               Dyadic(1, 3), pick_high, pick_low,
                               IndicatorPayoff(), label="indicator-oscillation")


class OscillationI(StrategyI):
    """Alternating attacker for the pair game: chase a payoff-sup branch
    until the first coordinate crowds sup_f, then a payoff-inf branch until
    the second coordinate crowds inf_f, and repeat.

    Retargets extend the current prefix, so the strategy's future depends
    only on the phase parity and the target's tail pattern: the state key
    space is finite even though the phase counter is not.
    """

    finite_state = True

    def __init__(self, instance: OscillationInstance):
        self.instance = instance
        self.reset()

    def reset(self) -> None:
        self.phase = 0
        self.prefix: Prefix = ()
        self.target: Optional[EventuallyPeriodicBranch] = None
        self.t = 0
        self.trigger_rounds: List[int] = []

    def _retarget(self) -> None:
        inst = self.instance
        pick = inst.pick_high if self.phase % 2 == 0 else inst.pick_low
        target = pick(self.prefix)
        if target.first(len(self.prefix)) != tuple(self.prefix):
            raise StrategyFault(
                "I", f"picked branch does not extend the prefix in phase {self.phase}",
                self.t)
        self.target = target

    def _triggered(self, last) -> bool:
        if not isinstance(last, tuple):
            raise StrategyFault("II", "oscillation attack needs value pairs",
                                self.t)
        v, w = last
        inst = self.instance
        if self.phase % 2 == 0:
            gap = inst.sup_f - v if v < inst.sup_f else v - inst.sup_f
        else:
            gap = inst.inf_f - w if w < inst.inf_f else w - inst.inf_f
        return gap < inst.epsilon

    def move(self, last) -> int:
        if last is None:
            self._retarget()
        elif self._triggered(last):
            self.phase += 1
            self.trigger_rounds.append(self.t)
            self._retarget()
        letter = self.target.letter_at(len(self.prefix))
        self.prefix = self.prefix + (letter,)
        self.t += 1
        return letter

    def state_key(self):
        tkey = None if self.target is None else \
            self.target.suffix_key(len(self.prefix))
        return (self.phase % 2, tkey)

    def counters(self) -> Dict[str, int]:
        return {"phase": self.phase, "round": self.t,
                "triggers": len(self.trigger_rounds)}


def strategy_i_oscillation(instance: OscillationInstance) -> OscillationI:
    return OscillationI(instance)
