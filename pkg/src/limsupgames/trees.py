"""Prefixes, pruned trees over countable alphabets, and eventually periodic branches.

A tree here is a prefix-closed set of finite sequences of naturals in which
every member has at least one child (pruned).  Branches we can compute with
exactly are the eventually periodic ones, stored as stem + repeating cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

Letter = int
Prefix = tuple  # tuple[int, ...]

EMPTY_PREFIX: Prefix = ()


def prefix_extend(s: Prefix, a: Letter) -> Prefix:
    return s + (a,)


def prefix_parent(s: Prefix) -> Prefix:
    if not s:
        raise ValueError("the empty prefix has no parent")
    return s[:-1]


def is_proper_prefix(s: Prefix, t: Prefix) -> bool:
    return len(s) < len(t) and t[: len(s)] == s


def format_prefix(s: Prefix) -> str:
    return ",".join(str(a) for a in s)


def parse_prefix(text: str) -> Prefix:
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        n = int(part)
        if n < 0:
            raise ValueError(f"letters are naturals, got {n}")
        out.append(n)
    return tuple(out)


@dataclass(frozen=True)
class TreeSpec:
    """A pruned tree given by a membership test and a child witness.

    `contains` decides whether a prefix is a node of the tree.  For members,
    `child_witness` names one letter whose extension stays inside (this is
    what makes the tree pruned without enumerating children).  `alphabet`
    is set when the tree is the full tree over that finite letter set, and
    `all_naturals` when it is the full tree over all of N; the exact family
    kernels require one of the two, the game engine needs neither.
    """

    contains: Callable[[Prefix], bool]
    child_witness: Callable[[Prefix], Letter]
    alphabet: "tuple[int, ...] | None" = None
    all_naturals: bool = False
    name: str = "custom"

    def is_full(self) -> bool:
        return self.alphabet is not None or self.all_naturals


def full_tree(letters: Iterable[int]) -> TreeSpec:
    alpha = tuple(sorted(set(int(a) for a in letters)))
    if not alpha or any(a < 0 for a in alpha):
        raise ValueError("need a nonempty set of natural letters")
    allowed = frozenset(alpha)
    first = alpha[0]
    return TreeSpec(
        contains=lambda s: all(a in allowed for a in s),
        child_witness=lambda s: first,
        alphabet=alpha,
        name="full:" + ",".join(str(a) for a in alpha),
    )


def binary_tree() -> TreeSpec:
    return full_tree((0, 1))


def nat_tree() -> TreeSpec:
    """The full tree over all naturals (used by copycat-style games)."""
    return TreeSpec(
        contains=lambda s: all(isinstance(a, int) and a >= 0 for a in s),
        child_witness=lambda s: 0,
        all_naturals=True,
        name="nat",
    )


class IllegalBranchError(ValueError):
    """A branch left the ambient tree; carries the offending prefix."""

    def __init__(self, prefix: Prefix):
        super().__init__(f"branch leaves the tree at prefix [{format_prefix(prefix)}]")
        self.prefix = prefix


@dataclass(frozen=True)
class EventuallyPeriodicBranch:
    """An eventually periodic branch stem + cycle^omega."""

    stem: tuple
    cycle: tuple

    def __post_init__(self) -> None:
        if not self.cycle:
            raise ValueError("cycle must be nonempty")
        for a in self.stem + self.cycle:
            if not isinstance(a, int) or a < 0:
                raise ValueError(f"letters are naturals, got {a!r}")

    def letter_at(self, t: int) -> Letter:
        if t < len(self.stem):
            return self.stem[t]
        return self.cycle[(t - len(self.stem)) % len(self.cycle)]

    def prefix(self, t: int) -> Prefix:
        """Letters x_0..x_t (length t + 1)."""
        return tuple(self.letter_at(i) for i in range(t + 1))

    def first(self, n: int) -> Prefix:
        """The first n letters."""
        return tuple(self.letter_at(i) for i in range(n))

    def suffix_key(self, pos: int):
        """Canonical descriptor of the letter stream from position pos on.

        Two equal keys mean the remaining letters agree forever, which is what
        joint-state hashing needs from a strategy tracking this branch.
        """
        if pos < len(self.stem):
            return (self.stem[pos:], self.cycle)
        return ((), self.cycle[(pos - len(self.stem)) % len(self.cycle):]
                + self.cycle[: (pos - len(self.stem)) % len(self.cycle)])

    def __str__(self) -> str:
        return f"stem={format_prefix(self.stem)};cycle={format_prefix(self.cycle)}"


Branch = EventuallyPeriodicBranch


def branch_prefix(x: EventuallyPeriodicBranch, t: int) -> Prefix:
    """The prefix x_0..x_t of the branch (length t + 1)."""
    return x.prefix(t)


def parse_branch(text: str) -> EventuallyPeriodicBranch:
    parts = dict()
    for chunk in text.strip().split(";"):
        if "=" not in chunk:
            raise ValueError(f"bad branch descriptor chunk {chunk!r}")
        k, v = chunk.split("=", 1)
        parts[k.strip()] = v.strip()
    if set(parts) != {"stem", "cycle"}:
        raise ValueError(f"branch descriptor needs stem= and cycle=, got {text!r}")
    return EventuallyPeriodicBranch(parse_prefix(parts["stem"]), parse_prefix(parts["cycle"]))


def checked_branch(tree: TreeSpec, stem: Sequence[int], cycle: Sequence[int],
                   depth: "int | None" = None) -> EventuallyPeriodicBranch:
    """Build a branch, rejecting one whose prefixes leave the tree.

    Prefixes are checked through the stem plus two full cycles by default;
    for full trees that covers every letter the branch will ever use, so the
    check is exhaustive there.  The first offending prefix is reported.
    """
    x = EventuallyPeriodicBranch(tuple(stem), tuple(cycle))
    if depth is None:
        depth = len(x.stem) + 2 * len(x.cycle)
    p: Prefix = ()
    for t in range(depth):
        p = p + (x.letter_at(t),)
        if not tree.contains(p):
            raise IllegalBranchError(p)
    return x
