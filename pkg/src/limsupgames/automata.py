"""Finite-state dyadic labelings of tree nodes and their exact limsup evaluation.

A NodeAutomaton reads letters and emits one dyadic output per transition;
the label of a nonempty prefix is the output of the transition that consumed
its last letter.  Along an eventually periodic branch the run enters a lasso,
so the limsup of the labels is the max over one certified cycle, computed
exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import graphs
from .dyadic import Dyadic, ExtValue, as_dyadic
from .trees import Branch, Prefix, TreeSpec

DEFAULT_CLASS = "default"


@dataclass(frozen=True)
class NodeAutomaton:
    """Deterministic transducer assigning a dyadic label to every tree node.

    Machines declare k explicit letters 0..k-1; all other letters share one
    default class, so the same machine works over any countable alphabet.
    `steps[q][c]` / `outputs[q][c]` give the successor and output for state q
    on letter class c, with c == k standing for the default class.  The label
    of the empty prefix is fixed to the minimum declared output.
    """

    initial: int
    steps: tuple
    outputs: tuple

    def __post_init__(self) -> None:
        n = len(self.steps)
        if n == 0:
            raise ValueError("need at least one state")
        width = len(self.steps[0])
        if width < 1:
            raise ValueError("need at least the default letter class")
        if len(self.outputs) != n:
            raise ValueError("steps/outputs state count mismatch")
        for q in range(n):
            if len(self.steps[q]) != width or len(self.outputs[q]) != width:
                raise ValueError(f"ragged transition table at state {q}")
            for c in range(width):
                dst = self.steps[q][c]
                if not isinstance(dst, int) or not (0 <= dst < n):
                    raise ValueError(f"bad successor {dst!r} at ({q},{c})")
                if not isinstance(self.outputs[q][c], Dyadic):
                    raise ValueError(f"output at ({q},{c}) is not a Dyadic")
        if not (0 <= self.initial < n):
            raise ValueError(f"bad initial state {self.initial}")

    @property
    def num_states(self) -> int:
        return len(self.steps)

    @property
    def num_letters(self) -> int:
        """Count of explicit letters (the default class comes on top)."""
        return len(self.steps[0]) - 1

    def letter_class(self, a: int) -> int:
        k = self.num_letters
        return a if a < k else k

    def step(self, q: int, a: int) -> int:
        return self.steps[q][self.letter_class(a)]

    def output(self, q: int, a: int) -> Dyadic:
        return self.outputs[q][self.letter_class(a)]

    def run(self, s: Prefix) -> int:
        q = self.initial
        for a in s:
            q = self.step(q, a)
        return q

    def declared_outputs(self) -> tuple:
        return tuple(sorted({o for row in self.outputs for o in row}))

    def min_output(self) -> Dyadic:
        return self.declared_outputs()[0]

    def node_value(self, s: Prefix) -> Dyadic:
        """The label u(s); the empty prefix reports the minimum declared output."""
        if not s:
            return self.min_output()
        q = self.initial
        out = None
        for a in s:
            out = self.output(q, a)
            q = self.step(q, a)
        assert out is not None
        return out

    def to_json_dict(self) -> dict:
        rows = []
        k = self.num_letters
        for q in range(self.num_states):
            for c in range(k + 1):
                label = c if c < k else DEFAULT_CLASS
                rows.append([q, label, self.steps[q][c], str(self.outputs[q][c])])
        return {
            "states": self.num_states,
            "initial": self.initial,
            "letters": k,
            "transitions": rows,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "NodeAutomaton":
        n = int(data["states"])
        k = int(data["letters"])
        if n < 1 or k < 0:
            raise ValueError("bad state or letter count")
        steps = [[None] * (k + 1) for _ in range(n)]
        outs = [[None] * (k + 1) for _ in range(n)]
        for row in data["transitions"]:
            q, label, dst, out = row
            c = k if label == DEFAULT_CLASS else int(label)
            if not (0 <= c <= k):
                raise ValueError(f"letter class {label!r} out of range")
            if steps[int(q)][c] is not None:
                raise ValueError(f"duplicate transition for state {q} class {label!r}")
            steps[int(q)][c] = int(dst)
            outs[int(q)][c] = as_dyadic(str(out))
        for q in range(n):
            for c in range(k + 1):
                if steps[q][c] is None:
                    raise ValueError(f"missing transition for state {q} class {c}")
        return cls(int(data["initial"]),
                   tuple(tuple(r) for r in steps),
                   tuple(tuple(r) for r in outs))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NodeAutomaton":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def make_automaton(initial: int, steps: Sequence[Sequence[int]],
                   outputs: Sequence[Sequence["Dyadic | int | str"]]) -> NodeAutomaton:
    return NodeAutomaton(
        initial,
        tuple(tuple(row) for row in steps),
        tuple(tuple(as_dyadic(v) for v in row) for row in outputs),
    )


@dataclass(frozen=True)
class LassoSummary:
    """Certificate for eval_limsup: outputs before the detected lasso and one cycle.

    The limsup of the whole label stream equals max(cycle_outputs) because
    only the repeating segment survives in the tail.
    """

    start: int
    period: int
    transient_outputs: tuple
    cycle_outputs: tuple

    @property
    def limsup(self) -> Dyadic:
        return max(self.cycle_outputs)


def lasso_summary(u: NodeAutomaton, x: Branch) -> LassoSummary:
    outputs = []
    q = u.initial
    for t in range(len(x.stem)):
        a = x.letter_at(t)
        outputs.append(u.output(q, a))
        q = u.step(q, a)
    seen = {}
    t = len(x.stem)
    p = len(x.cycle)
    while True:
        key = (q, (t - len(x.stem)) % p)
        if key in seen:
            start = seen[key]
            return LassoSummary(
                start=start,
                period=t - start,
                transient_outputs=tuple(outputs[:start]),
                cycle_outputs=tuple(outputs[start:]),
            )
        seen[key] = t
        a = x.letter_at(t)
        outputs.append(u.output(q, a))
        q = u.step(q, a)
        t += 1


def eval_limsup(u: NodeAutomaton, x: Branch) -> Dyadic:
    """limsup of the node labels along the branch, exactly."""
    return lasso_summary(u, x).limsup


def allowed_classes(u: NodeAutomaton, tree: TreeSpec) -> tuple:
    """Letter classes realizable by the tree's letters (full trees only)."""
    k = u.num_letters
    if tree.all_naturals:
        return tuple(range(k + 1))
    if tree.alphabet is None:
        raise ValueError("exact kernels need a full tree (finite alphabet or naturals)")
    return tuple(sorted({u.letter_class(a) for a in tree.alphabet}))


def class_representatives(u: NodeAutomaton, tree: TreeSpec) -> tuple:
    """One concrete tree letter per realizable class, for run reconstruction."""
    k = u.num_letters
    if tree.all_naturals:
        return tuple(range(k)) + (k,)
    if tree.alphabet is None:
        raise ValueError("exact kernels need a full tree (finite alphabet or naturals)")
    reps = {}
    for a in tree.alphabet:
        reps.setdefault(u.letter_class(a), a)
    return tuple(reps[c] for c in sorted(reps))


def minmax_value(u: NodeAutomaton, q: int, classes: "Iterable[int] | None" = None) -> ExtValue:
    """min over infinite runs from q of the max output visited.

    `classes` restricts the usable letter classes (defaults to all); runs are
    automaton runs, so pair this with allowed_classes when an ambient tree
    matters.
    """
    cls = tuple(classes) if classes is not None else tuple(range(u.num_letters + 1))

    def succ(p):
        return [(ExtValue.finite(u.outputs[p][c]), u.steps[p][c]) for c in cls]

    return graphs.min_sup_cycle(succ, q)
