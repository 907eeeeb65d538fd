"""Markov tree-shifts on rooted d-ary Cayley trees.

A Markov tree-shift is given by an ordered alphabet, the number of children
``d`` of every node and the set of allowed two-blocks (a root symbol together
with the ordered tuple of its ``d`` children).  Everything else (forbidden
blocks, block counts, brute-force enumeration) is derived from that.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .caps import DIGIT_BUDGET, ENUMERATE_BLOCKS_CAP, resolve_cap
from .errors import ParseError, ResourceLimitError

_LOG10_2 = math.log10(2.0)


@dataclass(frozen=True, order=True)
class TwoBlock:
    root: str
    children: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def symbols(self) -> set[str]:
        return {self.root, *self.children}

    def __str__(self):
        return f"({self.root};{','.join(self.children)})"


@dataclass(frozen=True)
class MarkovTreeShift:
    alphabet: tuple[str, ...]
    degree: int
    allowed: frozenset[TwoBlock] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "allowed", frozenset(self.allowed))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError(f"duplicate symbols in alphabet {self.alphabet}")
        if not isinstance(self.degree, int) or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        known = set(self.alphabet)
        for block in self.allowed:
            if len(block.children) != self.degree:
                raise ValueError(f"{block} does not have {self.degree} children")
            if not block.symbols() <= known:
                raise ValueError(f"{block} uses symbols outside the alphabet")

    @classmethod
    def full(cls, alphabet: Sequence[str], degree: int) -> "MarkovTreeShift":
        return cls(tuple(alphabet), degree, frozenset(all_two_blocks(alphabet, degree)))

    @classmethod
    def from_forbidden(cls, alphabet, degree, forbidden: Iterable[TwoBlock]) -> "MarkovTreeShift":
        forbidden = frozenset(forbidden)
        allowed = {b for b in all_two_blocks(alphabet, degree) if b not in forbidden}
        shift = cls(tuple(alphabet), degree, frozenset(allowed))
        extra = forbidden - set(all_two_blocks(alphabet, degree))
        if extra:
            raise ValueError(f"forbidden blocks not over the alphabet: {sorted(map(str, extra))}")
        return shift

    @property
    def k(self) -> int:
        return len(self.alphabet)

    @property
    def is_empty(self) -> bool:
        return not self.alphabet

    @property
    def forbidden(self) -> frozenset[TwoBlock]:
        return frozenset(b for b in all_two_blocks(self.alphabet, self.degree) if b not in self.allowed)

    def index(self, symbol: str) -> int:
        return self.alphabet.index(symbol)

    def rooted_at(self, symbol: str) -> list[TwoBlock]:
        """Allowed blocks with the given root, in sorted order."""
        return sorted(b for b in self.allowed if b.root == symbol)

    def restrict(self, symbols: Iterable[str]) -> "MarkovTreeShift":
        """Sub-shift generated by the allowed blocks that only use ``symbols``."""
        keep = set(symbols)
        alphabet = tuple(s for s in self.alphabet if s in keep)
        allowed = frozenset(b for b in self.allowed if b.symbols() <= keep)
        return MarkovTreeShift(alphabet, self.degree, allowed)


def all_two_blocks(alphabet: Sequence[str], degree: int):
    for root in alphabet:
        for children in itertools.product(alphabet, repeat=degree):
            yield TwoBlock(root, children)


def prune_dead_symbols(X: MarkovTreeShift) -> MarkovTreeShift:
    """Drop symbols that root no allowed block, repeating until nothing changes.

    A symbol with no allowed block cannot label any node of an infinite
    tree, and neither can any block that mentions it.  The result may have an
    empty alphabet.
    """
    alive = set(X.alphabet)
    allowed = set(X.allowed)
    while True:
        allowed = {b for b in allowed if b.symbols() <= alive}
        rooted = {b.root for b in allowed}
        if rooted == alive:
            break
        alive = rooted
    return MarkovTreeShift(tuple(s for s in X.alphabet if s in alive), X.degree, frozenset(allowed))


def essential_symbols(X: MarkovTreeShift) -> set[str]:
    """Symbols whose rooted block count reaches 2 at some depth.

    Least fixpoint: a symbol is essential when it roots at least two allowed
    blocks, or when its only rooted block has an essential child.  Assumes
    ``X`` is pruned.
    """
    rooted = {s: X.rooted_at(s) for s in X.alphabet}
    essential = {s for s, blocks in rooted.items() if len(blocks) >= 2}
    changed = True
    while changed:
        changed = False
        for s, blocks in rooted.items():
            if s in essential or len(blocks) != 1:
                continue
            if any(c in essential for c in blocks[0].children):
                essential.add(s)
                changed = True
    return essential


@dataclass
class BlockCountSeries:
    """Per-symbol block counts ``gamma[i][n]`` for n = 1..len.

    ``exact[n-1][i]`` is the exact count of n-blocks rooted at
    ``alphabet[i]``; ``log[n-1][i]`` is its natural log (``-inf`` for 0).
    Either sequence may be absent depending on how the series was computed.
    """

    alphabet: tuple[str, ...]
    exact: Optional[list[tuple[int, ...]]] = None
    log: Optional[list[tuple[float, ...]]] = None

    @property
    def length(self) -> int:
        seq = self.exact if self.exact is not None else self.log
        return len(seq) if seq is not None else 0

    def gamma(self, symbol: str, n: int) -> int:
        return self.exact[n - 1][self.alphabet.index(symbol)]

    def total(self, n: int) -> int:
        return sum(self.exact[n - 1])

    def log_total(self, n: int) -> float:
        if self.log is not None:
            return _logsumexp(self.log[n - 1])
        total = self.total(n)
        return math.log(total) if total > 0 else -math.inf


def _grouped_blocks(X: MarkovTreeShift) -> list[list[tuple[int, tuple[int, ...]]]]:
    """For every root index, (multiplicity, child index multiset) pairs."""
    idx = {s: i for i, s in enumerate(X.alphabet)}
    groups = []
    for s in X.alphabet:
        counter = Counter(tuple(sorted(idx[c] for c in b.children)) for b in X.allowed if b.root == s)
        groups.append(sorted((m, kids) for kids, m in counter.items()))
    return groups


def count_blocks(X: MarkovTreeShift, n: int, digit_budget: Optional[int] = None) -> BlockCountSeries:
    """Exact block counts for levels 1..n by the rooted recursion.

    Counts are of locally admissible patterns of ``X`` as given, which are
    the n-blocks of the tree-shift once ``X`` is pruned.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    budget = resolve_cap(digit_budget, DIGIT_BUDGET)
    groups = _grouped_blocks(X)
    level = tuple(1 for _ in X.alphabet)
    levels = [level]
    for _ in range(2, n + 1):
        max_bits = max((g.bit_length() for g in level), default=0)
        widest = max((sum(m for m, _ in grp) for grp in groups), default=0)
        bound_bits = X.degree * max_bits + widest.bit_length()
        if bound_bits * _LOG10_2 > budget:
            raise ResourceLimitError(
                f"exact block counts would exceed {budget} decimal digits; use the log-space series"
            )
        new = []
        for grp in groups:
            total = 0
            for mult, kids in grp:
                term = mult
                for c in kids:
                    term *= level[c]
                total += term
            new.append(total)
        level = tuple(new)
        levels.append(level)
    return BlockCountSeries(X.alphabet, exact=levels)


def _logsumexp(values: Iterable[float]) -> float:
    values = [v for v in values if v != -math.inf]
    if not values:
        return -math.inf
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def log_block_counts(X: MarkovTreeShift, n: int) -> BlockCountSeries:
    """Natural logs of the block counts, computed without big integers."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    groups = [[(math.log(m), kids) for m, kids in grp] for grp in _grouped_blocks(X)]
    level = tuple(0.0 for _ in X.alphabet)
    levels = [level]
    for _ in range(2, n + 1):
        new = []
        for grp in groups:
            terms = []
            for log_mult, kids in grp:
                if any(level[c] == -math.inf for c in kids):
                    continue
                terms.append(log_mult + math.fsum(level[c] for c in kids))
            new.append(_logsumexp(terms))
        if any(math.isinf(v) and v > 0 for v in new):
            raise ResourceLimitError("log block counts overflowed double precision")
        level = tuple(new)
        levels.append(level)
    return BlockCountSeries(X.alphabet, log=levels)


def tree_nodes(degree: int, height: int) -> list[tuple[int, ...]]:
    """Nodes of the full subtree of the given height in breadth-first order.

    A node is the tuple of child positions (0-based) leading to it from the
    root; height 0 is the root alone.
    """
    nodes = [()]
    frontier = [()]
    for _ in range(height):
        frontier = [w + (i,) for w in frontier for i in range(degree)]
        nodes.extend(frontier)
    return nodes


def enumerate_blocks(X: MarkovTreeShift, n: int, cap: Optional[int] = None) -> list[dict[tuple[int, ...], str]]:
    """Brute-force every labelling of the height ``n-1`` subtree and keep the admissible ones.

    Independent of :func:`count_blocks`: no recursion, just a filter over all
    ``k ** |nodes|`` candidate labellings.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cap = resolve_cap(cap, ENUMERATE_BLOCKS_CAP)
    nodes = tree_nodes(X.degree, n - 1)
    if X.is_empty:
        return []
    candidates = X.k ** len(nodes)
    if candidates > cap:
        raise ResourceLimitError(f"{candidates} candidate labellings exceed the cap of {cap}")
    position = {w: i for i, w in enumerate(nodes)}
    internal = [(position[w], [position[w + (j,)] for j in range(X.degree)]) for w in nodes if len(w) < n - 1]
    allowed = X.allowed
    found = []
    for labels in itertools.product(X.alphabet, repeat=len(nodes)):
        if all(TwoBlock(labels[p], tuple(labels[c] for c in kids)) in allowed for p, kids in internal):
            found.append(dict(zip(nodes, labels)))
    return found


def entropy_estimate(X: MarkovTreeShift, n: int) -> float:
    """Finite-n value of ``ln ln |B_n| / n``.

    Uses exact counts for n <= 12 and the log-space recursion beyond.  When
    ``|B_n| <= 1`` the double log is undefined and 0.0 is returned.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if n <= 12:
        total = count_blocks(X, n).total(n)
        if total <= 1:
            return 0.0
        return math.log(math.log(total)) / n
    log_total = log_block_counts(X, n).log_total(n)
    if log_total <= 0.0:
        return 0.0
    return math.log(log_total) / n


def is_degenerate(X: MarkovTreeShift, n: int) -> bool:
    """True when ``|B_n| <= 1`` so :func:`entropy_estimate` returns the 0.0 fallback."""
    if n <= 12:
        return count_blocks(X, n).total(n) <= 1
    return log_block_counts(X, n).log_total(n) <= 0.0


# -- file format --------------------------------------------------------------


def treeshift_from_dict(doc: dict) -> MarkovTreeShift:
    try:
        degree = doc["d"]
        alphabet = tuple(str(s) for s in doc["alphabet"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"tree-shift document needs 'd' and 'alphabet': {exc}") from None
    has_allowed, has_forbidden = "allowed" in doc, "forbidden" in doc
    if has_allowed == has_forbidden:
        raise ParseError("exactly one of 'allowed' or 'forbidden' must be present")
    raw = doc["allowed"] if has_allowed else doc["forbidden"]
    try:
        blocks = [TwoBlock(str(r["root"]), tuple(str(c) for c in r["children"])) for r in raw]
        if has_allowed:
            return MarkovTreeShift(alphabet, degree, frozenset(blocks))
        return MarkovTreeShift.from_forbidden(alphabet, degree, blocks)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad tree-shift document: {exc}") from None


def treeshift_to_dict(X: MarkovTreeShift) -> dict:
    return {
        "d": X.degree,
        "alphabet": list(X.alphabet),
        "allowed": [{"root": b.root, "children": list(b.children)} for b in sorted(X.allowed)],
    }


def load_treeshift(path) -> MarkovTreeShift:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return treeshift_from_dict(doc)


def dump_treeshift(X: MarkovTreeShift, path) -> None:
    Path(path).write_text(json.dumps(treeshift_to_dict(X), indent=2) + "\n", encoding="utf-8")
