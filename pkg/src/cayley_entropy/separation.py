"""Linear separation on hypercube vertices and the template learning problem.

Both questions reduce to small linear programs that maximise a margin ``t``;
they are solved in exact rational arithmetic so strict inequalities are
decided without tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .ctnn import BasicSet, Template, Vertex, admissible_patterns, vertices
from .errors import InternalInconsistency
from .lp import OPTIMAL, maximize

SEPARATION_BOX = 1
REALIZE_BOX = 10


@dataclass(frozen=True)
class VertexSet:
    d: int
    members: frozenset[Vertex]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(tuple(int(x) for x in v) for v in self.members))
        for v in self.members:
            if len(v) != self.d or any(x not in (1, -1) for x in v):
                raise ValueError(f"{v} is not a vertex of {{-1,+1}}^{self.d}")

    def complement(self) -> "VertexSet":
        return VertexSet(self.d, frozenset(vertices(self.d)) - self.members)


@dataclass(frozen=True)
class SeparatingFunctional:
    weights: tuple[Fraction, ...]
    bias: Fraction
    margin: Fraction

    def __call__(self, v: Iterable[int]) -> Fraction:
        return sum((w * x for w, x in zip(self.weights, v)), Fraction(0)) + self.bias


def is_linearly_separable(U: VertexSet, homogeneous: bool = False) -> Optional[SeparatingFunctional]:
    """Find ``g(v) = c.v + b`` with ``g >= t`` on U and ``g <= -t`` off U, t > 0.

    With ``homogeneous=True`` the bias is pinned to 0.  Returns ``None`` when
    the best margin is not positive.
    """
    if U.d > 10:
        raise ValueError(f"separation is limited to d <= 10, got {U.d}")
    d = U.d
    # variables: c_1..c_d, b, t
    A, rhs = [], []
    for v in vertices(d):
        if v in U.members:
            A.append([-x for x in v] + [-1, 1])  # t - c.v - b <= 0
        else:
            A.append(list(v) + [1, 1])  # c.v + b + t <= 0
        rhs.append(0)
    bias_box = 0 if homogeneous else SEPARATION_BOX
    lower = [-SEPARATION_BOX] * d + [-bias_box, -(d + 2)]
    upper = [SEPARATION_BOX] * d + [bias_box, d + 2]
    res = maximize([0] * (d + 1) + [1], A, rhs, lower, upper)
    if res.status != OPTIMAL or res.value <= 0:
        return None
    x = res.x
    return SeparatingFunctional(tuple(x[:d]), x[d], x[d + 1])


@dataclass(frozen=True)
class Realizability:
    realizable: bool
    condition: Optional[str]


def check_realizable(B: BasicSet, homogeneous: bool = False) -> Realizability:
    """Test the two inclusion-plus-separation conditions on a basic set.

    ``Inv1``: ``-plus`` is contained in ``minus`` and ``minus`` is separable.
    ``Inv2``: ``-minus`` is contained in ``plus`` and ``plus`` is separable.
    """
    neg_plus = frozenset(tuple(-x for x in v) for v in B.plus)
    neg_minus = frozenset(tuple(-x for x in v) for v in B.minus)
    if neg_plus <= B.minus and is_linearly_separable(VertexSet(B.d, B.minus), homogeneous):
        return Realizability(True, "Inv1")
    if neg_minus <= B.plus and is_linearly_separable(VertexSet(B.d, B.plus), homogeneous):
        return Realizability(True, "Inv2")
    return Realizability(False, None)


@dataclass(frozen=True)
class Realization:
    template: Template
    a: Fraction
    alpha: tuple[Fraction, ...]
    z: Fraction
    margin: Fraction

    def record(self) -> dict:
        return {
            "a": str(self.a),
            "alpha": [str(x) for x in self.alpha],
            "z": str(self.z),
            "margin": str(self.margin),
        }


def realize(B: BasicSet) -> Optional[Realization]:
    """Solve for a template whose basic set is exactly ``B``.

    Unknowns are ``a, z, alpha`` (each within ``|.| <= 10``) and the margin
    ``t``; every defining inequality of the basic set must hold with slack
    ``t`` and every excluded pattern must fail by ``t``.  ``None`` when the
    best margin is not positive.
    """
    d = B.d
    if d > 10:
        raise ValueError(f"learning is limited to d <= 10, got {d}")
    # variables: a, z, alpha_1..alpha_d, t; rows are written as (...) <= rhs
    A, rhs = [], []
    for v in vertices(d):
        v = list(v)
        # plus side: a - 1 + z + alpha.v  >= t  (member)  or  <= -t  (non-member)
        if v_tuple(v) in B.plus:
            A.append([-1, -1] + [-x for x in v] + [1])
            rhs.append(-1)
        else:
            A.append([1, 1] + v + [1])
            rhs.append(1)
        # minus side: a - 1 - z - alpha.v  >= t  (member)  or  <= -t  (non-member)
        if v_tuple(v) in B.minus:
            A.append([-1, 1] + v + [1])
            rhs.append(-1)
        else:
            A.append([1, -1] + [-x for x in v] + [1])
            rhs.append(1)
    n = d + 3
    t_bound = 4 * REALIZE_BOX * (d + 2)
    lower = [-REALIZE_BOX] * (n - 1) + [-t_bound]
    upper = [REALIZE_BOX] * (n - 1) + [t_bound]
    res = maximize([0] * (n - 1) + [1], A, rhs, lower, upper)
    if res.status != OPTIMAL or res.value <= 0:
        return None
    a, z, *alpha, t = res.x
    T = Template(float(a), tuple(float(x) for x in alpha), float(z))
    if admissible_patterns(T) != B:
        raise InternalInconsistency(f"rounded template {T} does not reproduce the basic set")
    return Realization(T, a, tuple(alpha), z, t)


def v_tuple(v) -> Vertex:
    return tuple(int(x) for x in v)


def separable_subsets(d: int, homogeneous: bool = False) -> list[frozenset[Vertex]]:
    """Every subset of {-1,+1}**d with the separation property."""
    vs = vertices(d)
    found = []
    for mask in range(1 << len(vs)):
        members = frozenset(v for i, v in enumerate(vs) if mask >> i & 1)
        if is_linearly_separable(VertexSet(d, members), homogeneous):
            found.append(members)
    return found
