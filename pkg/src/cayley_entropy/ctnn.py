"""Nearest-neighbour neural networks on Cayley trees.

A template is the self-feedback ``a``, the child couplings ``alpha`` and the
threshold ``z``.  A node with output ``+1`` and child outputs ``v`` is a
mosaic equilibrium iff ``a - 1 + z > -alpha.v``; output ``-1`` needs
``a - 1 - z > alpha.v``.  These strict inequalities pick out the admissible
two-blocks, so the output space is a Markov tree-shift over ``{+, -}``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import BoundaryParameter, InternalInconsistency, ParseError
from .snre import EntropyReport, entropy_tsft
from .treeshift import MarkovTreeShift, TwoBlock

BOUNDARY_TOL = 1e-12
PLUS, MINUS = "+", "-"

Vertex = tuple[int, ...]


@dataclass(frozen=True)
class Template:
    a: float
    alpha: tuple[float, ...]
    z: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(x) for x in self.alpha))
        if not self.alpha:
            raise ValueError("at least one child coupling is required")
        if not all(math.isfinite(x) for x in (self.a, self.z, *self.alpha)):
            raise ValueError("template parameters must be finite")

    @property
    def d(self) -> int:
        return len(self.alpha)

    def couplings(self) -> "ChildCouplings":
        return ChildCouplings.from_alpha(self.alpha)


def vertices(d: int) -> list[Vertex]:
    """The 2**d points of {-1, +1}**d, ordered with +1 before -1 per coordinate."""
    return list(itertools.product((1, -1), repeat=d))


@dataclass(frozen=True)
class ChildCouplings:
    alpha: tuple[float, ...]
    C: tuple[float, ...]
    K1: float
    K2: float
    ell: int
    degenerate: bool

    @classmethod
    def from_alpha(cls, alpha: Sequence[float]) -> "ChildCouplings":
        alpha = tuple(float(x) for x in alpha)
        C = tuple(sorted(float(np.dot(alpha, v)) for v in vertices(len(alpha))))
        distinct = sorted(set(C), reverse=True)
        K1 = distinct[0]
        # repeated sums collapse C; K2 is then the second largest distinct value
        K2 = distinct[1] if len(distinct) > 1 else distinct[0]
        mags = [abs(x) for x in alpha]
        ell = mags.index(min(mags))
        degenerate = len(distinct) < len(C)
        return cls(alpha, C, K1, K2, ell, degenerate)

    @property
    def d(self) -> int:
        return len(self.alpha)

    def distinct_sums(self) -> list[float]:
        return sorted(set(self.C))


@dataclass(frozen=True)
class RegionCode:
    p: int
    q: int

    def swapped(self) -> "RegionCode":
        return RegionCode(self.q, self.p)

    def __str__(self):
        return f"[{self.p},{self.q}]"


@dataclass(frozen=True)
class BasicSet:
    d: int
    plus: frozenset[Vertex]
    minus: frozenset[Vertex]

    def __post_init__(self):
        object.__setattr__(self, "plus", frozenset(tuple(int(x) for x in v) for v in self.plus))
        object.__setattr__(self, "minus", frozenset(tuple(int(x) for x in v) for v in self.minus))
        for v in self.plus | self.minus:
            if len(v) != self.d or any(x not in (1, -1) for x in v):
                raise ValueError(f"{v} is not a vertex of {{-1,+1}}^{self.d}")

    @property
    def code(self) -> RegionCode:
        return RegionCode(len(self.plus), len(self.minus))

    def negated(self) -> "BasicSet":
        """Swap roles: new plus = -minus, new minus = -plus."""
        return BasicSet(self.d, _negate(self.minus), _negate(self.plus))

    def two_blocks(self) -> list[TwoBlock]:
        blocks = [TwoBlock(PLUS, tuple(map(_sign_symbol, v))) for v in self.plus]
        blocks += [TwoBlock(MINUS, tuple(map(_sign_symbol, v))) for v in self.minus]
        return sorted(blocks)

    def is_trivial(self) -> bool:
        return not self.plus or not self.minus


def _negate(vs: Iterable[Vertex]) -> frozenset[Vertex]:
    return frozenset(tuple(-x for x in v) for v in vs)


def _sign_symbol(x: int) -> str:
    return PLUS if x > 0 else MINUS


def admissible_patterns(T: Template, tol: float = BOUNDARY_TOL) -> BasicSet:
    """Basic set of admissible local patterns of a template.

    Raises :class:`BoundaryParameter` when any inequality holds with equality
    up to ``tol``; such templates lie on a partition line.
    """
    s = T.a - 1.0 + T.z
    t = T.a - 1.0 - T.z
    plus, minus = set(), set()
    for v in vertices(T.d):
        dot = float(np.dot(T.alpha, v))
        if abs(s + dot) < tol or abs(t - dot) < tol:
            raise BoundaryParameter(f"template {T} lies on a partition line at child vector {v}")
        if s > -dot:
            plus.add(v)
        if t > dot:
            minus.add(v)
    return BasicSet(T.d, frozenset(plus), frozenset(minus))


def tsft_from_basic(B: BasicSet) -> MarkovTreeShift:
    return MarkovTreeShift((PLUS, MINUS), B.d, frozenset(B.two_blocks()))


def classify_code(code: RegionCode) -> bool:
    """True when a region code has zero entropy: min(p, q) = 0 or max(p, q) = 1."""
    return min(code.p, code.q) == 0 or max(code.p, code.q) == 1


@lru_cache(maxsize=4096)
def _entropy_of_basic(B: BasicSet) -> EntropyReport:
    return entropy_tsft(tsft_from_basic(B))


@dataclass(frozen=True)
class CTNNEntropy:
    entropy: float
    code: RegionCode
    basic: BasicSet
    report: EntropyReport


def basic_set_entropy(B: BasicSet) -> CTNNEntropy:
    """Spectral entropy of a basic set, checked against the region-code rule."""
    report = _entropy_of_basic(B)
    zero_by_rule = classify_code(B.code)
    ln_d = math.log(B.d)
    if zero_by_rule:
        agrees = abs(report.entropy) <= 1e-9
    else:
        agrees = abs(report.entropy - ln_d) <= 1e-9
    if not agrees:
        raise InternalInconsistency(
            f"code {B.code}: spectral entropy {report.entropy} but the code rule says "
            f"{'0' if zero_by_rule else 'ln d'}"
        )
    return CTNNEntropy(report.entropy, B.code, B, report)


def ctnn_entropy(T: Template) -> CTNNEntropy:
    return basic_set_entropy(admissible_patterns(T))


def critical_a(cc: ChildCouplings, z: float) -> float:
    """Self-feedback on the critical curve: 1 + ||z| - |a_l|| - sum_{i != l} |a_i|."""
    mags = [abs(x) for x in cc.alpha]
    small = mags[cc.ell]
    rest = sum(m for i, m in enumerate(mags) if i != cc.ell)
    return 1.0 + abs(abs(z) - small) - rest


def critical_a_from_sums(cc: ChildCouplings, z: float) -> float:
    """Same curve written with the two largest coupling sums K1, K2."""
    return 1.0 + abs(abs(z) - (cc.K1 - cc.K2) / 2.0) - (cc.K1 + cc.K2) / 2.0


def is_critical(T: Template, tol: float) -> bool:
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return abs(T.a - critical_a(T.couplings(), T.z)) <= tol


def verify_critical_by_definition(
    cc: ChildCouplings,
    point: tuple[float, float],
    r: float,
    samples: int = 200,
    rng_seed: int = 0,
) -> bool:
    """Sample the r-ball around (a, z) and report whether both entropies occur.

    Samples that land on a partition line are skipped.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(rng_seed)
    a0, z0 = point
    ln_d = math.log(cc.d)
    seen_zero = seen_full = False
    radii = r * np.sqrt(rng.random(samples))
    angles = rng.random(samples) * 2.0 * math.pi
    for rad, ang in zip(radii, angles):
        T = Template(a0 + rad * math.cos(ang), cc.alpha, z0 + rad * math.sin(ang))
        try:
            h = ctnn_entropy(T).entropy
        except BoundaryParameter:
            continue
        if abs(h) <= 1e-9:
            seen_zero = True
        elif abs(h - ln_d) <= 1e-9:
            seen_full = True
        if seen_zero and seen_full:
            return True
    return False


def dual_region_map(T: Template) -> Template:
    return Template(T.a, T.alpha, -T.z)


# -- mosaic verification --------------------------------------------------------


@dataclass
class MosaicCheck:
    ok: bool
    states: dict[tuple[int, ...], float]
    failures: list[tuple[int, ...]]


def parse_label(x) -> int:
    if x in (1, "+", "+1", "1"):
        return 1
    if x in (-1, "-", "-1"):
        return -1
    raise ParseError(f"output label must be + or -, got {x!r}")


def tree_from_nested(doc, d: int) -> tuple[dict[tuple[int, ...], int], int]:
    """Flatten a nested ``{label, children}`` record into node -> label.

    Returns the labels and the tree height; every internal node must have
    exactly ``d`` children and all leaves must share one depth.
    """
    labels: dict[tuple[int, ...], int] = {}
    leaf_depths = set()

    def walk(node, word):
        if not isinstance(node, dict) or "label" not in node:
            raise ParseError(f"node {word} must be a record with a 'label'")
        labels[word] = parse_label(node["label"])
        kids = node.get("children") or []
        if not kids:
            leaf_depths.add(len(word))
            return
        if len(kids) != d:
            raise ParseError(f"node {word} has {len(kids)} children, expected {d}")
        for i, kid in enumerate(kids):
            walk(kid, word + (i,))

    walk(doc, ())
    if len(leaf_depths) != 1:
        raise ParseError(f"tree is not complete: leaves at depths {sorted(leaf_depths)}")
    return labels, leaf_depths.pop()


def uniform_tree(label: int, d: int, height: int) -> dict:
    node = {"label": "+" if label > 0 else "-", "children": []}
    if height > 0:
        node["children"] = [uniform_tree(label, d, height - 1) for _ in range(d)]
    return node


def verify_mosaic(T: Template, tree) -> MosaicCheck:
    """Check the mosaic inequality at every node whose children are present.

    ``tree`` is a nested ``{label, children}`` record.  The equilibrium state
    of node w is ``z + a*y_w + sum_i a_i*y_wi`` and must satisfy
    ``y_w * x_w > 1``.
    """
    labels, height = tree_from_nested(tree, T.d)
    if height < 1:
        raise ValueError("the pattern tree needs height >= 1")
    states, failures = {}, []
    for w, y in sorted(labels.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if len(w) >= height:
            continue
        x = T.z + T.a * y + sum(ai * labels[w + (i,)] for i, ai in enumerate(T.alpha))
        states[w] = x
        if not y * x > 1.0:
            failures.append(w)
    return MosaicCheck(not failures, states, failures)


# -- file formats -------------------------------------------------------------


def template_from_dict(doc: dict) -> Template:
    try:
        T = Template(float(doc["a"]), tuple(float(x) for x in doc["alpha"]), float(doc["z"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad template document: {exc}") from None
    if "d" in doc and int(doc["d"]) != T.d:
        raise ParseError(f"'d' is {doc['d']} but alpha has {T.d} entries")
    return T


def template_to_dict(T: Template) -> dict:
    return {"d": T.d, "a": T.a, "alpha": list(T.alpha), "z": T.z}


def basic_set_from_dict(doc: dict) -> BasicSet:
    try:
        d = int(doc["d"])
        plus = frozenset(tuple(parse_label(x) for x in v) for v in doc["plus"])
        minus = frozenset(tuple(parse_label(x) for x in v) for v in doc["minus"])
        return BasicSet(d, plus, minus)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad basic-set document: {exc}") from None


def basic_set_to_dict(B: BasicSet) -> dict:
    return {"d": B.d, "plus": [list(v) for v in sorted(B.plus, reverse=True)], "minus": [list(v) for v in sorted(B.minus, reverse=True)]}


def load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return doc
