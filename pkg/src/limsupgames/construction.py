"""Threshold-set construction of node labelings from lsc families.

construct_u assigns each prefix the supremum of its threshold set: values r
below every level's cylinder infimum (the persistent part), plus values
caught between the parent's and the child's infimum at some level (the
per-level part); empty threshold sets fall back to -length.  The limsup of
the constructed labels along any branch recovers the family's limit
function, which verify_construction checks exactly on eventually periodic
branches.  The sum/min/max algebra runs the same construction over joint
kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .automata import NodeAutomaton, eval_limsup, make_automaton
from .dyadic import Dyadic, ExtValue, NEG_INF, as_dyadic
from .families import GridLscFamily, discretize, family_from_kernel
from .kernels import ProductKernel, SuffixMaxStairs
from .trees import EventuallyPeriodicBranch, Prefix, TreeSpec, binary_tree

ALGEBRA_OPS = ("sum", "min", "max")


class InconclusiveLassoError(RuntimeError):
    """Constructed labels along a branch refused to settle into a cycle."""


def rstar_sup(fam: GridLscFamily, s: Prefix) -> ExtValue:
    """sup of the persistent threshold set: r qualifies iff r stays below
    node_inf(n, s) for every n, so the sup is the infimum over all levels."""
    return fam.inf_all(s)


def rn_sup(fam: GridLscFamily, n: int, s: Prefix) -> Optional[ExtValue]:
    """sup of the level-n threshold interval, or None when it is empty.

    The interval is [node_inf(n, parent), node_inf(n, s)) with the parent
    bound dropped at the root; cylinder monotonicity makes the parent the
    binding proper initial segment.
    """
    a = fam.node_inf(n, s)
    p = fam.node_inf(n, s[:-1]) if s else NEG_INF
    return a if p < a else None


def scan_bound(fam: GridLscFamily, s: Prefix) -> int:
    m = fam.stabilization_index(s)
    if s:
        m = max(m, fam.stabilization_index(s[:-1]))
    return m


def construct_u(fam: GridLscFamily, s: Prefix) -> Dyadic:
    """Label of s: sup of the full threshold set, or -|s| when it is empty.

    Levels past the scan bound repeat the emptiness status and sup they had
    at the bound, so the finite scan is exhaustive.
    """
    best = rstar_sup(fam, s)
    prev = None
    for n in range(scan_bound(fam, s) + 1):
        a = fam.node_inf(n, s)
        if prev is not None and prev < a:
            raise AssertionError(
                f"family {fam.label} not non-increasing at level {n} of {s}")
        prev = a
        p = fam.node_inf(n, s[:-1]) if s else NEG_INF
        if p < a and best < a:
            best = a
    if not best.is_finite:
        return Dyadic(-len(s))
    return best.require_finite()


class ConstructionState:
    """Per-prefix cache around construct_u, with audit counters."""

    def __init__(self, fam: GridLscFamily):
        self.fam = fam
        self.cache: Dict[Prefix, Dyadic] = {}
        self.max_scan = 0

    def u(self, s: Prefix) -> Dyadic:
        got = self.cache.get(s)
        if got is None:
            self.max_scan = max(self.max_scan, scan_bound(self.fam, s))
            got = construct_u(self.fam, s)
            self.cache[s] = got
        return got


def node_labeling(fam: GridLscFamily) -> ConstructionState:
    return ConstructionState(fam)


class _KernelLabeler:
    """Walks a branch once, labeling every prefix of the kernel-backed family.

    Keeps the joint run state, the per-dimension suffix-max staircases of the
    emitted outputs, and the memoized tail tables; each label costs a few
    segment lookups instead of a fresh level scan.  labels[k] is the label of
    the prefix of length k+1.
    """

    def __init__(self, fam: GridLscFamily, x: EventuallyPeriodicBranch):
        if fam.kernel is None:
            raise ValueError("kernel-backed family required")
        self.fam = fam
        self.ker = fam.kernel
        self.x = x
        self.disc = fam.discretized
        self.E = self.ker.grid_exponent
        self.stairs = SuffixMaxStairs(self.ker.dims)
        self.J = self.ker.initial
        self.J_prev = None
        self.cur_snap = self.stairs.snapshot()
        self.prev_snap = None
        self.L = 0
        self.labels: List[Dyadic] = []
        self.max_scan = 0
        self.lasso: Optional[Tuple[int, int]] = None
        self._seen = {(self._phase(0), self.J): 0}

    def _phase(self, t: int):
        stem = self.x.stem
        if t < len(stem):
            return ("s", t)
        return ("c", (t - len(stem)) % len(self.x.cycle))

    def step(self) -> None:
        a = self.x.letter_at(self.L)
        outs = self.ker.outputs_on(self.J, a)
        self.J_prev = self.J
        self.prev_snap = self.cur_snap
        self.stairs.append(outs)
        self.cur_snap = self.stairs.snapshot()
        self.J = self.ker.step(self.J, a)
        self.L += 1
        if self.lasso is None:
            key = (self._phase(self.L), self.J)
            if key in self._seen:
                self.lasso = (self._seen[key], self.L - self._seen[key])
            else:
                self._seen[key] = self.L
        self.labels.append(self._label())

    def extend_to(self, horizon: int) -> None:
        while self.L < horizon:
            self.step()

    def run_to_lasso(self, cap: int = 100000) -> Tuple[int, int]:
        while self.lasso is None:
            if self.L > cap:
                raise InconclusiveLassoError("no joint state lasso within cap")
            self.step()
        return self.lasso

    def _stair_value(self, snap, n: int) -> Dyadic:
        return self.ker.value(
            self.J if snap is self.cur_snap else self.J_prev,
            SuffixMaxStairs.vector_at(snap, n))

    def _raw(self, n: int) -> Dyadic:
        if n <= self.L - 1:
            return self._stair_value(self.cur_snap, n)
        return self.ker.tail_value(self.J, n - self.L)

    def _praw(self, n: int) -> Dyadic:
        if n <= self.L - 2:
            return self._stair_value(self.prev_snap, n)
        return self.ker.tail_value(self.J_prev, n - (self.L - 1))

    def _label(self) -> Dyadic:
        L = self.L
        ker = self.ker
        disc = self.disc
        stab = max(L + ker.tail_entry(self.J),
                   L - 1 + ker.tail_entry(self.J_prev))
        M = max(stab, self.E) if disc else stab
        self.max_scan = max(self.max_scan, M)
        best = ker.tail_limit(self.J)
        if L < self.E + 2 or L < 2:
            for n in range(M + 1):
                a = self._raw(n)
                p = self._praw(n)
                if disc:
                    a = a.ceil_to_grid(n)
                    p = p.ceil_to_grid(n)
                if p < a and best < a:
                    best = a
            return best
        lo = self.E if disc else 0
        for n in range(lo):
            a = self._raw(n).ceil_to_grid(n)
            p = self._praw(n).ceil_to_grid(n)
            if p < a and best < a:
                best = a
        bounds = {lo}
        for snap in (self.cur_snap, self.prev_snap):
            for dimsegs in snap:
                for start, _v in dimsegs:
                    if lo < start <= L - 2:
                        bounds.add(start)
        for b in sorted(bounds):
            a = self._stair_value(self.cur_snap, b)
            p = self._stair_value(self.prev_snap, b)
            if p < a and best < a:
                best = a
        a = self._stair_value(self.cur_snap, L - 1)
        p = ker.tail_value(self.J_prev, 0)
        if p < a and best < a:
            best = a
        for j in range(M - L + 1):
            a = ker.tail_value(self.J, j)
            p = ker.tail_value(self.J_prev, j + 1)
            if p < a and best < a:
                best = a
        return best


class _OracleLabeler:
    """Fallback for kernel-less families: construct_u on every prefix."""

    def __init__(self, fam: GridLscFamily, x: EventuallyPeriodicBranch):
        self.state = ConstructionState(fam)
        self.x = x
        self.L = 0
        self.prefix: Prefix = ()
        self.labels: List[Dyadic] = []

    def step(self) -> None:
        self.prefix = self.prefix + (self.x.letter_at(self.L),)
        self.L += 1
        self.labels.append(self.state.u(self.prefix))

    def extend_to(self, horizon: int) -> None:
        while self.L < horizon:
            self.step()

    def run_to_lasso(self, cap: int = 0) -> Tuple[int, int]:
        return (len(self.x.stem), len(self.x.cycle))

    @property
    def max_scan(self) -> int:
        return self.state.max_scan


def make_labeler(fam: GridLscFamily, x: EventuallyPeriodicBranch):
    if fam.kernel is not None:
        return _KernelLabeler(fam, x)
    return _OracleLabeler(fam, x)


def branch_labels(fam: GridLscFamily, x: EventuallyPeriodicBranch,
                  horizon: int) -> Tuple[Dyadic, ...]:
    lab = make_labeler(fam, x)
    lab.extend_to(horizon)
    return tuple(lab.labels)


def periodic_tail_max(values: Sequence[Dyadic], period: int,
                      repeats: int = 3) -> Optional[Tuple[int, Dyadic]]:
    """Max over one period of a certified periodic tail, or None.

    Requires the last `repeats` periods to agree entrywise, then rolls the
    periodic start back as far as the values allow and reports (start, max).
    """
    n = len(values)
    if period < 1 or n < repeats * period:
        return None
    lo = n - repeats * period
    for i in range(lo, n - period):
        if values[i] != values[i + period]:
            return None
    start = n - period
    while start > 0 and values[start - 1] == values[start - 1 + period]:
        start -= 1
    return (start, max(values[n - period:]))


def branch_limsup(fam: GridLscFamily, x: EventuallyPeriodicBranch,
                  cap: int = 4096) -> Tuple[Dyadic, dict]:
    """Exact limsup of the constructed labels along x, with audit info.

    The joint (kernel state, branch phase) lasso period is an eventual
    period of the label sequence; the horizon escalates until three periods
    agree, and exhaustion raises InconclusiveLassoError.
    """
    lab = make_labeler(fam, x)
    t0, p = lab.run_to_lasso(cap)
    horizon = max(t0 + 4 * p + 16, 6 * p, 32)
    while True:
        horizon = min(horizon, cap)
        lab.extend_to(horizon)
        got = periodic_tail_max(lab.labels, p, repeats=3)
        if got is not None:
            start, value = got
            info = {"lasso_start": t0, "period": p, "tail_start": start,
                    "horizon": horizon, "max_scan": lab.max_scan}
            return value, info
        if horizon >= cap:
            raise InconclusiveLassoError(
                f"labels along {x} show no period-{p} tail within {cap}")
        horizon = min(cap, horizon * 2)


@dataclass(frozen=True)
class BranchCheck:
    branch: EventuallyPeriodicBranch
    expected: Optional[Dyadic]
    got: Optional[Dyadic]
    equal: bool
    inconclusive: bool
    period: Optional[int]
    horizon: int


@dataclass(frozen=True)
class ConstructionReport:
    rows: Tuple[BranchCheck, ...]
    label: str
    max_scan: int

    @property
    def all_equal(self) -> bool:
        return all(r.equal for r in self.rows)

    @property
    def inconclusive_count(self) -> int:
        return sum(1 for r in self.rows if r.inconclusive)

    def summary(self) -> str:
        n = len(self.rows)
        if self.all_equal and self.inconclusive_count == 0:
            return f"equal on all {n} corpus branches (max level scan {self.max_scan})"
        bad = [r for r in self.rows if not r.equal]
        return (f"{n - len(bad)}/{n} branches equal, "
                f"{self.inconclusive_count} inconclusive "
                f"(max level scan {self.max_scan})")


def verify_construction(fam: GridLscFamily,
                        branches: Sequence[EventuallyPeriodicBranch],
                        target_fn: Optional[Callable] = None,
                        cap: int = 4096) -> ConstructionReport:
    """Exact per-branch comparison of the constructed labeling's limsup
    against the source function; inconclusive lassos are flagged, not failed.
    """
    if target_fn is None:
        if fam.kernel is None or fam.kernel.dims != 1:
            raise ValueError("verify_construction needs an automaton-derived "
                             "family or an explicit target_fn")
        src = fam.kernel.machines[0]

        def target_fn(x, _u=src):
            return eval_limsup(_u, x)

    rows = []
    worst = 0
    for x in branches:
        expected = target_fn(x)
        try:
            got, info = branch_limsup(fam, x, cap=cap)
        except InconclusiveLassoError:
            rows.append(BranchCheck(x, expected, None, False, True, None, cap))
            continue
        worst = max(worst, info["max_scan"])
        rows.append(BranchCheck(x, expected, got, got == expected, False,
                                info["period"], info["horizon"]))
    return ConstructionReport(tuple(rows), fam.label, worst)


def minimize_labeling(state: ConstructionState, tree: TreeSpec,
                      probe_depth: int = 3, close_depth: int = 8,
                      verify_depth: int = 11,
                      max_states: int = 64) -> Optional[NodeAutomaton]:
    """Try to fold a constructed labeling into a finite machine.

    Prefixes are grouped by the labels of all their extensions out to
    probe_depth; when the grouping closes under extension within
    close_depth and the induced machine reproduces every label out to
    verify_depth, the machine is returned.  Anything else, including
    non-contiguous alphabets, yields None and the labeling stays an oracle.
    """
    letters = tree.alphabet
    if letters is None or letters != tuple(range(len(letters))):
        return None
    probes: List[Prefix] = []
    frontier: List[Prefix] = [()]
    for _ in range(probe_depth):
        frontier = [w + (a,) for w in frontier for a in letters]
        probes.extend(frontier)

    def signature(s: Prefix):
        return tuple(state.u(s + w) for w in probes)

    class_of = {signature(()): 0}
    reps: List[Prefix] = [()]
    steps: List[List[int]] = []
    outs: List[List[Dyadic]] = []
    i = 0
    while i < len(reps):
        s = reps[i]
        if len(s) > close_depth:
            return None
        row_step = []
        row_out = []
        for a in letters:
            child = s + (a,)
            sg = signature(child)
            j = class_of.get(sg)
            if j is None:
                j = len(reps)
                if j >= max_states:
                    return None
                class_of[sg] = j
                reps.append(child)
            row_step.append(j)
            row_out.append(state.u(child))
        steps.append(row_step)
        outs.append(row_out)
        i += 1
    machine = make_automaton(0, steps, outs)
    layer = [((), 0)]
    for _ in range(verify_depth):
        nxt = []
        for s, q in layer:
            for a in letters:
                child = s + (a,)
                if machine.output(q, a) != state.u(child):
                    return None
                nxt.append((child, machine.step(q, a)))
        layer = nxt
    return machine


def joint_minmax(u1: NodeAutomaton, u2: NodeAutomaton, objective: str,
                 q1: int, q2: int,
                 fixed1: ExtValue = NEG_INF, fixed2: ExtValue = NEG_INF,
                 tree: Optional[TreeSpec] = None) -> ExtValue:
    """min over joint continuations from (q1, q2) of
    objective(max(fixed1, future sup of u1), max(fixed2, future sup of u2)).

    Enumerates feasible output-threshold pairs via cycle reachability in the
    filtered product; exact because future sups are attained on lassos.
    """
    if objective not in ("sum", "max"):
        raise ValueError("objective must be 'sum' or 'max'")
    ker = ProductKernel([u1, u2], tree if tree is not None else binary_tree(),
                        objective)
    return ExtValue.finite(ker.value((q1, q2), (fixed1, fixed2)))


def apply_op(op: str, a: Dyadic, b: Dyadic) -> Dyadic:
    if op == "sum":
        return a + b
    if op == "min":
        return min(a, b)
    if op == "max":
        return max(a, b)
    raise ValueError(f"op must be one of {ALGEBRA_OPS}")


@dataclass(frozen=True)
class AlgebraFunction:
    """Constructed labeling representing op(f1, f2), with exact evaluation."""

    op: str
    factors: Tuple[NodeAutomaton, NodeAutomaton]
    family: GridLscFamily
    state: ConstructionState

    def u(self, s: Prefix) -> Dyadic:
        return self.state.u(s)

    def value_on(self, x: EventuallyPeriodicBranch, cap: int = 4096) -> Dyadic:
        return branch_limsup(self.family, x, cap=cap)[0]

    def expected_on(self, x: EventuallyPeriodicBranch) -> Dyadic:
        f1 = eval_limsup(self.factors[0], x)
        f2 = eval_limsup(self.factors[1], x)
        return apply_op(self.op, f1, f2)


def algebra(u1: NodeAutomaton, u2: NodeAutomaton, op: str,
            tree: Optional[TreeSpec] = None) -> AlgebraFunction:
    """op(f1, f2) as a constructed labeling over the joint level family.

    Level n of the joint family applies op to the factors' level-n tail
    sups; min separates into per-machine infima while sum and max couple
    the machines through one shared branch.
    """
    if op not in ALGEBRA_OPS:
        raise ValueError(f"op must be one of {ALGEBRA_OPS}")
    tree = tree if tree is not None else binary_tree()
    raw = family_from_kernel(ProductKernel([u1, u2], tree, op),
                             label=f"algebra:{op}")
    fam = discretize(raw)
    return AlgebraFunction(op, (u1, u2), fam, ConstructionState(fam))
