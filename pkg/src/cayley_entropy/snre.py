"""Systems of nonlinear recursive equations and the spectral entropy algorithm.

The block counts of a Markov tree-shift satisfy

    gamma[i][n] = sum_c  r[i; c] * prod_j gamma[j][n-1] ** c[j]

with exponent vectors ``c`` summing to ``d``.  Choosing one monomial per row
gives a reduced system whose exponent vectors form an integer matrix with
row sums ``d``; the entropy is the log of the largest Perron root over all
reduced systems, after deleting inessential symbols.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .caps import REDUCED_SYSTEMS_CAP, SPECTRUM_CAP, resolve_cap
from .errors import NumericalFailure, ParseError, ResourceLimitError
from .treeshift import MarkovTreeShift, TwoBlock, essential_symbols, prune_dead_symbols

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class Monomial:
    coefficient: int
    exponents: Exponents

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(c) for c in self.exponents))
        if self.coefficient < 1:
            raise ValueError(f"coefficient must be positive, got {self.coefficient}")
        if any(c < 0 for c in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")


@dataclass(frozen=True)
class SNRE:
    degree: int
    rows: tuple[tuple[Monomial, ...], ...]
    init: tuple[int, ...] = ()

    def __post_init__(self):
        k = len(self.rows)
        rows = []
        for i, row in enumerate(self.rows):
            row = tuple(sorted(row, key=lambda m: m.exponents, reverse=True))
            seen = set()
            for m in row:
                if len(m.exponents) != k or sum(m.exponents) != self.degree:
                    raise ValueError(f"row {i}: exponents {m.exponents} do not sum to {self.degree} over {k} symbols")
                if m.exponents in seen:
                    raise ValueError(f"row {i}: repeated exponent vector {m.exponents}")
                seen.add(m.exponents)
            rows.append(row)
        object.__setattr__(self, "rows", tuple(rows))
        init = tuple(self.init) if self.init else (1,) * k
        if len(init) != k or any(v < 1 for v in init):
            raise ValueError(f"initial conditions must be {k} positive integers, got {init}")
        object.__setattr__(self, "init", init)

    @property
    def k(self) -> int:
        return len(self.rows)

    @classmethod
    def from_indicator(cls, I, degree: int, init=()) -> "SNRE":
        """Inverse of :func:`indicator_matrix`."""
        I = [list(r) for r in I]
        k = len(I)
        columns = exponent_vectors(degree, k)
        rows = []
        for r in I:
            if len(r) != len(columns):
                raise ValueError(f"indicator rows need {len(columns)} entries for degree ({degree}, {k})")
            rows.append(tuple(Monomial(int(v), c) for v, c in zip(r, columns) if v))
        return cls(degree, tuple(rows), tuple(init))

    def evaluate(self, n: int) -> list[tuple[int, ...]]:
        """Exact sequence values for levels 1..n."""
        level = self.init
        out = [level]
        for _ in range(2, n + 1):
            level = tuple(
                sum(m.coefficient * math.prod(v**c for v, c in zip(level, m.exponents)) for m in row)
                for row in self.rows
            )
            out.append(level)
        return out


def exponent_vectors(degree: int, k: int) -> list[Exponents]:
    """All length-k nonnegative vectors summing to ``degree``, lexicographically descending."""

    def rec(remaining, slots):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining, -1, -1):
            for rest in rec(remaining - first, slots - 1):
                yield (first,) + rest

    if k == 0:
        return []
    return list(rec(degree, k))


def snre_from_tsft(X: MarkovTreeShift) -> SNRE:
    """Group allowed blocks by root and child-symbol multiset.

    The coefficient of a monomial is the number of ordered blocks sharing its
    multiset, so evaluating the system reproduces the block counts.
    """
    idx = {s: i for i, s in enumerate(X.alphabet)}
    rows = []
    for s in X.alphabet:
        counter = Counter()
        for b in X.allowed:
            if b.root == s:
                c = [0] * X.k
                for child in b.children:
                    c[idx[child]] += 1
                counter[tuple(c)] += 1
        rows.append(tuple(Monomial(r, c) for c, r in counter.items()))
    return SNRE(X.degree, tuple(rows))


def tsft_from_snre(F: SNRE, alphabet: Optional[Sequence[str]] = None) -> MarkovTreeShift:
    """A Markov tree-shift whose block counts follow ``F`` (initial conditions 1).

    Each monomial with coefficient r is realised by the first r orderings of
    its child multiset; fails if r exceeds the number of distinct orderings.
    """
    alphabet = tuple(alphabet) if alphabet is not None else tuple(f"a{i + 1}" for i in range(F.k))
    blocks = set()
    for root, row in zip(alphabet, F.rows):
        for m in row:
            multiset = [alphabet[j] for j, c in enumerate(m.exponents) for _ in range(c)]
            orderings = sorted(set(itertools.permutations(multiset)))
            if m.coefficient > len(orderings):
                raise ValueError(f"coefficient {m.coefficient} exceeds the {len(orderings)} orderings of {m.exponents}")
            blocks.update(TwoBlock(root, o) for o in orderings[: m.coefficient])
    return MarkovTreeShift(alphabet, F.degree, frozenset(blocks))


@dataclass(frozen=True)
class IndicatorMatrix:
    columns: tuple[Exponents, ...]
    entries: tuple[tuple[int, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(len(self.entries), len(self.columns))


def indicator_matrix(F: SNRE) -> IndicatorMatrix:
    columns = tuple(exponent_vectors(F.degree, F.k))
    entries = []
    for row in F.rows:
        coeff = {m.exponents: m.coefficient for m in row}
        entries.append(tuple(coeff.get(c, 0) for c in columns))
    return IndicatorMatrix(columns, tuple(entries))


@dataclass(frozen=True)
class ReducedSNRE:
    parent: SNRE = field(repr=False)
    selection: tuple[Exponents, ...]

    def __post_init__(self):
        if len(self.selection) != self.parent.k:
            raise ValueError("one selected monomial per row is required")
        for i, c in enumerate(self.selection):
            if not any(m.exponents == c for m in self.parent.rows[i]):
                raise ValueError(f"row {i}: {c} is not a monomial of the parent system")

    def as_snre(self) -> SNRE:
        return SNRE(self.parent.degree, tuple((Monomial(1, c),) for c in self.selection), self.parent.init)

    def indicator(self) -> IndicatorMatrix:
        return indicator_matrix(self.as_snre())


def count_reduced(F: SNRE) -> int:
    return math.prod(len(row) for row in F.rows)


def enumerate_reduced(F: SNRE, cap: Optional[int] = None) -> Iterator[ReducedSNRE]:
    """Every reduced system, rows varying fastest on the right, each row in descending lex order."""
    cap = resolve_cap(cap, REDUCED_SYSTEMS_CAP)
    total = count_reduced(F)
    if total > cap:
        raise ResourceLimitError(f"{total} reduced systems exceed the cap of {cap}")
    for choice in itertools.product(*[[m.exponents for m in row] for row in F.rows]):
        yield ReducedSNRE(F, choice)


def weighted_adjacency(E: ReducedSNRE) -> np.ndarray:
    """Row i holds the exponents of row i's selected monomial."""
    return np.array(E.selection, dtype=np.int64).reshape(E.parent.k, E.parent.k)


# -- spectral radius ------------------------------------------------------------


def _perron_root_irreducible(B: np.ndarray, tol: float, max_iter: int) -> float:
    # B + I is primitive, so power iteration converges; the Collatz-Wielandt
    # min/max ratios bracket its Perron root at every step.
    A = B + np.eye(B.shape[0])
    x = np.ones(B.shape[0])
    for _ in range(max_iter):
        y = A @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol:
            return 0.5 * (lo + hi) - 1.0
        x = y / y.max()
    raise NumericalFailure(f"power iteration did not converge in {max_iter} steps")


def spectral_radius(M, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Perron root of a square nonnegative matrix.

    The matrix is split into strongly connected components; singleton
    components contribute their diagonal entry, larger ones are handled by
    power iteration on ``B + I`` from the all-ones vector.
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    if (A < 0).any() or not np.isfinite(A).all():
        raise ValueError("matrix entries must be finite and nonnegative")
    ncomp, labels = connected_components(csr_matrix(A > 0), directed=True, connection="strong")
    rho = 0.0
    for comp in range(ncomp):
        idx = np.flatnonzero(labels == comp)
        if idx.size == 1:
            r = A[idx[0], idx[0]]
        else:
            r = _perron_root_irreducible(A[np.ix_(idx, idx)], tol, max_iter)
        rho = max(rho, float(r))
    return rho


@lru_cache(maxsize=1 << 16)
def _rho_of(key: tuple[tuple[int, ...], ...]) -> float:
    return spectral_radius(np.array(key, dtype=float))


# -- entropy ------------------------------------------------------------------


@dataclass
class EntropyReport:
    entropy: float
    rho: float
    argmax_selection: Optional[tuple[Exponents, ...]]
    matrix: list[list[int]]
    full_matrix: Optional[list[list[int]]]
    alphabet: tuple[str, ...]
    essential: list[str]
    pruned_symbols: list[str]
    empty: bool = False

    def record(self) -> dict:
        return {
            "entropy": self.entropy,
            "rho": self.rho,
            "argmax_selection": [list(c) for c in self.argmax_selection] if self.argmax_selection else None,
            "matrix": self.matrix,
            "full_matrix": self.full_matrix,
            "alphabet": list(self.alphabet),
            "essential": self.essential,
            "pruned_symbols": self.pruned_symbols,
            "empty": self.empty,
        }


def entropy_tsft(X: MarkovTreeShift, cap: Optional[int] = None) -> EntropyReport:
    """Entropy as the largest log Perron root over reduced systems.

    Dead symbols are pruned first and inessential rows/columns are deleted
    from every weighted adjacency matrix.  Perron roots below 1 (only 0 is
    possible for integer matrices) and an empty essential set contribute 0.
    """
    Y = prune_dead_symbols(X)
    pruned = [s for s in X.alphabet if s not in Y.alphabet]
    if Y.is_empty:
        return EntropyReport(0.0, 1.0, None, [], None, (), [], pruned, empty=True)
    essential = essential_symbols(Y)
    keep = [i for i, s in enumerate(Y.alphabet) if s in essential]
    F = snre_from_tsft(Y)
    if not keep:
        first = next(enumerate_reduced(F, cap))
        return EntropyReport(
            0.0, 1.0, first.selection, [], weighted_adjacency(first).tolist(), Y.alphabet, [], pruned
        )
    best_rho, best = -1.0, None
    for E in enumerate_reduced(F, cap):
        key = tuple(tuple(E.selection[i][j] for j in keep) for i in keep)
        rho = _rho_of(key)
        if rho > best_rho + 1e-12:
            best_rho, best = rho, (E, key)
    E, key = best
    entropy = math.log(best_rho) if best_rho >= 1.0 else 0.0
    return EntropyReport(
        entropy,
        best_rho,
        E.selection,
        [list(r) for r in key],
        weighted_adjacency(E).tolist(),
        Y.alphabet,
        [s for s in Y.alphabet if s in essential],
        pruned,
    )


def check_ln_d_criterion(X: MarkovTreeShift) -> tuple[bool, frozenset[str]]:
    """Look for a nonempty essential set closed under some allowed block per symbol.

    Starting from all essential symbols, repeatedly discard any symbol that
    roots no block with every child still in the set.  The survivor is the
    largest such set, so it is empty exactly when no witness exists.
    """
    candidate = set(essential_symbols(X))
    while True:
        keep = {s for s in candidate if any(set(b.children) <= candidate for b in X.rooted_at(s))}
        if keep == candidate:
            break
        candidate = keep
    return bool(candidate), frozenset(candidate)


# -- entropy spectrum -----------------------------------------------------------


@dataclass(frozen=True)
class SpectrumValue:
    rho: float
    entropy: float
    witness: tuple[tuple[int, ...], ...]


def _bounded_rows(length: int, d: int) -> list[tuple[int, ...]]:
    return [r for s in range(d + 1) for r in exponent_vectors(s, length)] if length else []


def spectrum_size(d: int, k: int) -> int:
    return sum(math.comb(d + ell, ell) ** ell for ell in range(1, k))


def entropy_spectrum(d: int, k: int, cap: Optional[int] = None) -> list[SpectrumValue]:
    """All entropies of Markov tree-shifts with ``d`` children over ``k`` symbols.

    Values are ``ln rho(M)`` for nonnegative integer matrices of dimension
    ``1 <= l <= k - 1`` with row sums at most ``d`` (plus 0).  The bound on
    ``l`` leaves room for one inessential symbol: a tree-shift whose symbols
    are all essential has entropy ``ln d``, which the 1x1 matrix ``[d]``
    already covers.
    """
    if d < 1 or k < 1:
        raise ValueError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
    cap = resolve_cap(cap, SPECTRUM_CAP)
    size = spectrum_size(d, k)
    if size > cap:
        raise ResourceLimitError(f"{size} matrices exceed the cap of {cap}")
    found: list[SpectrumValue] = [SpectrumValue(1.0, 0.0, ())]
    for ell in range(1, k):
        rows = _bounded_rows(ell, d)
        for M in itertools.product(rows, repeat=ell):
            rho = _rho_of(M)
            if rho < 1.0:
                continue
            if all(abs(rho - v.rho) > 1e-9 for v in found):
                found.append(SpectrumValue(rho, math.log(rho), M))
    return sorted(found, key=lambda v: v.rho)


def construct_tsft_with_entropy(d: int, c: int) -> MarkovTreeShift:
    """Two-symbol tree-shift with entropy ``ln c``.

    ``a1`` roots the block with c children ``a1`` followed by ``d - c``
    children ``a2`` and the all-``a2`` block; ``a2`` only roots all-``a2``.
    """
    if not 1 <= c <= d:
        raise ValueError(f"need 1 <= c <= d, got c={c}, d={d}")
    a1, a2 = "a1", "a2"
    blocks = {
        TwoBlock(a1, (a1,) * c + (a2,) * (d - c)),
        TwoBlock(a1, (a2,) * d),
        TwoBlock(a2, (a2,) * d),
    }
    return MarkovTreeShift((a1, a2), d, frozenset(blocks))


def tsft_realizing_matrix(M, d: int) -> MarkovTreeShift:
    """Tree-shift whose entropy is ``ln rho(M)`` for M with row sums <= d.

    Symbols ``s1..sl`` follow the rows of M, padding each row with the
    inessential sink ``z``; every ``s_i`` also roots the all-sink block so the
    zero-row alternative exists in each reduced system.
    """
    M = [list(map(int, r)) for r in M]
    ell = len(M)
    names = [f"s{i + 1}" for i in range(ell)]
    sink = "z"
    blocks = {TwoBlock(sink, (sink,) * d)}
    for name, row in zip(names, M):
        if len(row) != ell or sum(row) > d or min(row, default=0) < 0:
            raise ValueError(f"row {row} is not a length-{ell} row with sum <= {d}")
        kids = tuple(n for n, c in zip(names, row) for _ in range(c)) + (sink,) * (d - sum(row))
        blocks.add(TwoBlock(name, kids))
        blocks.add(TwoBlock(name, (sink,) * d))
    return MarkovTreeShift(tuple(names) + (sink,), d, frozenset(blocks))


# -- serialization ------------------------------------------------------------


def snre_to_dict(F: SNRE) -> dict:
    return {
        "d": F.degree,
        "k": F.k,
        "rows": [[{"r": m.coefficient, "c": list(m.exponents)} for m in row] for row in F.rows],
        "init": list(F.init),
    }


def snre_from_dict(doc: dict) -> SNRE:
    try:
        rows = tuple(tuple(Monomial(int(t["r"]), tuple(t["c"])) for t in row) for row in doc["rows"])
        F = SNRE(int(doc["d"]), rows, tuple(doc.get("init", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad SNRE document: {exc}") from None
    if "k" in doc and doc["k"] != F.k:
        raise ParseError(f"'k' is {doc['k']} but {F.k} rows were given")
    return F
