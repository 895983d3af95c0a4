"""Small weighted-digraph kernels behind the exact infimum computations.

Nodes are arbitrary hashables, edges carry extended dyadic weights, and
successor lists come from a callback so product constructions never have to
materialize anything up front.  Sizes here are tiny (products of machine
state sets), so the algorithms favor clarity over asymptotics.
"""

from __future__ import annotations

from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Tuple

from .dyadic import ExtValue, NEG_INF, POS_INF, as_ext

Node = Hashable
SuccFn = Callable[[Node], Iterable[Tuple[ExtValue, Node]]]


class StabilizationCapError(RuntimeError):
    """Reachable-set iteration exceeded its declared cap (a construction error)."""


def _closure(succ: SuccFn, start: Node) -> Dict[Node, List[Tuple[ExtValue, Node]]]:
    graph: Dict[Node, List[Tuple[ExtValue, Node]]] = {}
    todo = [start]
    while todo:
        q = todo.pop()
        if q in graph:
            continue
        edges = [(as_ext(w), r) for (w, r) in succ(q)]
        graph[q] = edges
        for _, r in edges:
            if r not in graph:
                todo.append(r)
    return graph


def _has_infinite_path(graph: Dict[Node, List[Tuple[ExtValue, Node]]],
                       start: Node, theta: ExtValue) -> bool:
    # infinite path iff a cycle is reachable inside the weight-filtered subgraph
    reach = set()
    todo = [start]
    while todo:
        q = todo.pop()
        if q in reach:
            continue
        reach.add(q)
        for w, r in graph[q]:
            if not theta < w and r not in reach:
                todo.append(r)
    color: Dict[Node, int] = {}  # 1 on stack, 2 done

    for root in reach:
        if color.get(root):
            continue
        stack = [(root, iter([r for w, r in graph[root] if not theta < w]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for r in it:
                if color.get(r) == 1:
                    return True
                if not color.get(r):
                    color[r] = 1
                    stack.append((r, iter([r2 for w, r2 in graph[r] if not theta < w])))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return False


def min_sup_cycle(succ: SuccFn, start: Node) -> ExtValue:
    """Minimum over infinite paths from start of the sup of edge weights.

    Computed as the least threshold theta (among edge weights seen from
    start) whose filtered subgraph still has an infinite path; the optimum
    is attained by a lasso staying under theta.
    """
    graph = _closure(succ, start)
    weights = sorted({w for edges in graph.values() for (w, _) in edges})
    for theta in weights:
        if _has_infinite_path(graph, start, theta):
            return theta
    # no infinite path at all: every node eventually dead-ends
    return POS_INF


def exact_reach(succ: SuccFn, start: Node, steps: int) -> FrozenSet[Node]:
    """Nodes reachable from start in exactly `steps` edge traversals."""
    cur = {start}
    for _ in range(steps):
        cur = {r for q in cur for (_, r) in succ(q)}
    return frozenset(cur)


def reach_cycle_entry(succ: SuccFn, start: Node, cap: int) -> int:
    """First index j where the sequence of exact-reach sets starts repeating.

    The sets evolve deterministically, so the sequence is eventually periodic;
    returns the index of the first set that is visited twice.  Exceeding cap
    distinct sets is a construction error.
    """
    seen: Dict[FrozenSet[Node], int] = {}
    cur = frozenset([start])
    j = 0
    while True:
        if cur in seen:
            return seen[cur]
        if j > cap:
            raise StabilizationCapError(
                f"reachable-set iteration exceeded cap {cap}")
        seen[cur] = j
        cur = frozenset({r for q in cur for (_, r) in succ(q)})
        j += 1
