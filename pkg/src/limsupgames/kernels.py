"""Internal exact kernels shared by families and the threshold construction.

A ProductKernel walks one or more node automata in lockstep over a full tree
and answers the two questions every node-infimum oracle reduces to:

  value(J, fixed)   min over infinite continuations from joint state J of the
                    objective applied to per-machine max(fixed_i, future sup_i)
  tail_value(J, j)  same with j free unscored steps first (positions below the
                    level index contribute nothing)

Both are exact: future sups are attained on lassos, so a finite threshold
search over the declared output grids settles them.  SuffixMaxStairs keeps
the prefix-determined parts (suffix maxima of emitted outputs) in segment
form for the incremental labeler.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Tuple

from .automata import NodeAutomaton, allowed_classes, minmax_value
from .dyadic import Dyadic, ExtValue, NEG_INF, ext_max
from .graphs import StabilizationCapError
from .trees import TreeSpec

MODES = ("max", "sum", "min")


def joint_letter_representatives(machines, tree: TreeSpec) -> tuple:
    """One tree letter per realizable tuple of per-machine letter classes."""
    if tree.all_naturals:
        cand = range(max(u.num_letters for u in machines) + 1)
    elif tree.alphabet is not None:
        cand = tree.alphabet
    else:
        raise ValueError("exact kernels need a full tree (finite alphabet or naturals)")
    reps = {}
    for a in cand:
        key = tuple(u.letter_class(a) for u in machines)
        reps.setdefault(key, a)
    return tuple(sorted(reps.values()))


def _cycle_reachable(succ: Dict, start) -> bool:
    # iterative DFS, gray/black marks; back edge to a gray node closes a cycle
    color = {start: 1}
    stack = [(start, 0)]
    while stack:
        node, i = stack.pop()
        nbrs = succ[node]
        advanced = False
        while i < len(nbrs):
            nxt = nbrs[i]
            i += 1
            c = color.get(nxt)
            if c == 1:
                return True
            if c is None:
                stack.append((node, i))
                color[nxt] = 1
                stack.append((nxt, 0))
                advanced = True
                break
        if not advanced:
            color[node] = 2
    return False


class ProductKernel:
    """Lockstep product of node automata over a full tree.

    mode "max"/"sum" couple the machines through one shared branch (joint
    reachability); mode "min" is separable, each machine minimizing over its
    own branch.  A single machine behaves identically under every mode.
    """

    def __init__(self, machines, tree: TreeSpec, mode: str = "max"):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not machines:
            raise ValueError("need at least one machine")
        self.machines = tuple(machines)
        self.tree = tree
        self.mode = mode
        self.dims = len(self.machines)
        self.reps = joint_letter_representatives(self.machines, tree)
        self.initial = tuple(u.initial for u in self.machines)
        self.grid_exponent = max(
            o.exp for u in self.machines for row in u.outputs for o in row)
        self._ground = 1
        for u in self.machines:
            self._ground *= u.num_states
        self._mm: Dict[Tuple[int, int], Dyadic] = {}
        self._value: Dict = {}
        self._tails: Dict = {}
        self._mtails: Dict = {}
        self._outs = tuple(
            tuple(sorted({u.output(q, a) for q in range(u.num_states) for a in self.reps}))
            for u in self.machines)

    def step(self, J: tuple, a: int) -> tuple:
        return tuple(u.step(q, a) for u, q in zip(self.machines, J))

    def outputs_on(self, J: tuple, a: int) -> tuple:
        return tuple(u.output(q, a) for u, q in zip(self.machines, J))

    def run(self, s) -> tuple:
        J = self.initial
        for a in s:
            J = self.step(J, a)
        return J

    def _minmax(self, i: int, q: int) -> Dyadic:
        key = (i, q)
        if key not in self._mm:
            u = self.machines[i]
            v = minmax_value(u, q, allowed_classes(u, self.tree))
            self._mm[key] = v.require_finite()
        return self._mm[key]

    def _combine(self, fixed: tuple, thresh: tuple) -> Dyadic:
        parts = [ext_max([f, ExtValue.finite(a)]).require_finite()
                 for f, a in zip(fixed, thresh)]
        if self.mode == "sum":
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            return total
        return max(parts)

    def _feasible(self, start: tuple, thresh: tuple) -> bool:
        succ: Dict = {}
        stack = [start]
        seen = {start}
        while stack:
            J = stack.pop()
            nbrs = []
            for a in self.reps:
                os = self.outputs_on(J, a)
                if all(not t < o for o, t in zip(os, thresh)):
                    J2 = self.step(J, a)
                    nbrs.append(J2)
                    if J2 not in seen:
                        seen.add(J2)
                        stack.append(J2)
            succ[J] = nbrs
        return _cycle_reachable(succ, start)

    def value(self, J: tuple, fixed: tuple) -> Dyadic:
        """min over continuations from J of the objective; fixed parts folded in."""
        if self.mode == "min":
            return min(
                ext_max([f, ExtValue.finite(self._minmax(i, q))]).require_finite()
                for i, (f, q) in enumerate(zip(fixed, J)))
        if self.dims == 1:
            return ext_max([fixed[0], ExtValue.finite(self._minmax(0, J[0]))]).require_finite()
        key = (J, fixed)
        got = self._value.get(key)
        if got is None:
            cands = sorted(itertools.product(*self._outs),
                           key=lambda tup: self._combine(fixed, tup))
            for tup in cands:
                if self._feasible(J, tup):
                    got = self._combine(fixed, tup)
                    break
            assert got is not None  # total machines always admit a run
            self._value[key] = got
        return got

    def _machine_tail(self, i: int, q: int) -> Tuple[tuple, int]:
        key = (i, q)
        got = self._mtails.get(key)
        if got is None:
            u = self.machines[i]
            cur = frozenset([q])
            seen = {cur: 0}
            vals = [min(self._minmax(i, p) for p in cur)]
            cap = 2 ** u.num_states
            entry = None
            for j in range(1, cap + 1):
                cur = frozenset(u.step(p, a) for p in cur for a in self.reps)
                if cur in seen:
                    entry = seen[cur]
                    break
                seen[cur] = j
                vals.append(min(self._minmax(i, p) for p in cur))
            if entry is None:
                raise StabilizationCapError(
                    f"machine {i} reach sets failed to cycle within {cap} steps")
            got = (tuple(vals[:entry + 1]), entry)
            self._mtails[key] = got
        return got

    def _joint_tail(self, J: tuple) -> Tuple[tuple, int]:
        got = self._tails.get(J)
        if got is None:
            neg = (NEG_INF,) * self.dims
            cur = frozenset([J])
            seen = {cur: 0}
            vals = [min(self.value(P, neg) for P in cur)]
            cap = 2 ** self._ground
            entry = None
            for j in range(1, cap + 1):
                cur = frozenset(self.step(P, a) for P in cur for a in self.reps)
                if cur in seen:
                    entry = seen[cur]
                    break
                seen[cur] = j
                vals.append(min(self.value(P, neg) for P in cur))
            if entry is None:
                raise StabilizationCapError(
                    f"joint reach sets failed to cycle within {cap} steps")
            got = (tuple(vals[:entry + 1]), entry)
            self._tails[J] = got
        return got

    def tail_entry(self, J: tuple) -> int:
        if self.mode == "min" and self.dims > 1:
            return max(self._machine_tail(i, q)[1] for i, q in enumerate(J))
        return self._joint_tail(J)[1]

    def tail_value(self, J: tuple, j: int) -> Dyadic:
        """min over continuations with the first j steps unscored; constant past tail_entry."""
        if self.mode == "min" and self.dims > 1:
            return min(self._tail_pick(*self._machine_tail(i, q), j)
                       for i, q in enumerate(J))
        vals, entry = self._joint_tail(J)
        return self._tail_pick(vals, entry, j)

    @staticmethod
    def _tail_pick(vals: tuple, entry: int, j: int) -> Dyadic:
        return vals[j] if j <= entry else vals[entry]

    def tail_limit(self, J: tuple) -> Dyadic:
        return self.tail_value(J, self.tail_entry(J))


class SuffixMaxStairs:
    """Per-dimension suffix maxima of an output stream, kept as segments.

    After L appends, at(d, n) is max over positions p in [n, L-1] of the
    d-th output at p.  Segments (start_n, value) have strictly decreasing
    values; appends are amortized O(1) via a monotone stack.
    """

    def __init__(self, dims: int):
        self.dims = dims
        self.length = 0
        self._segs: List[List[tuple]] = [[] for _ in range(dims)]

    def append(self, values: tuple) -> None:
        pos = self.length
        for d in range(self.dims):
            segs = self._segs[d]
            v = values[d]
            start = pos
            while segs and not v < segs[-1][1]:
                start = segs.pop()[0]
            segs.append((start, v))
        self.length += 1

    def snapshot(self) -> tuple:
        return tuple(tuple(segs) for segs in self._segs)

    @staticmethod
    def value_at(snap_dim: tuple, n: int) -> Dyadic:
        # caller guarantees 0 <= n < length of the snapshot
        lo, hi = 0, len(snap_dim) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if snap_dim[mid][0] <= n:
                lo = mid
            else:
                hi = mid - 1
        return snap_dim[lo][1]

    @staticmethod
    def vector_at(snap: tuple, n: int) -> tuple:
        return tuple(ExtValue.finite(SuffixMaxStairs.value_at(dim, n)) for dim in snap)
