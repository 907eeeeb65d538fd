import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cayley_entropy.bifurcation import cell_basic_sets, distinct_basic_sets, partition_plane
from cayley_entropy.ctnn import (
    BasicSet,
    ChildCouplings,
    Template,
    admissible_patterns,
    basic_set_from_dict,
    classify_code,
    load_json,
    tsft_from_basic,
    vertices,
)
from cayley_entropy.errors import BoundaryParameter
from cayley_entropy.separation import (
    VertexSet,
    check_realizable,
    is_linearly_separable,
    realize,
    separable_subsets,
)
from cayley_entropy.snre import entropy_tsft


def subsets(d):
    vs = vertices(d)
    for mask in range(1 << len(vs)):
        yield frozenset(v for i, v in enumerate(vs) if mask >> i & 1)


def all_basic_sets(d):
    for plus, minus in itertools.product(list(subsets(d)), repeat=2):
        yield BasicSet(d, plus, minus)


def lattice_separable(d, members):
    """Brute force over small integer weights and half-integer offsets."""
    vs = vertices(d)
    for c in itertools.product(range(-2, 3), repeat=d):
        for b2 in range(-9, 10, 2):
            if all((sum(ci * x for ci, x in zip(c, v)) + b2 / 2 > 0) == (v in members) for v in vs):
                return True
    return False


def _realizable_by_lp():
    return {B for B in all_basic_sets(2) if realize(B) is not None}


@pytest.fixture(scope="module")
def lp_realizable():
    return _realizable_by_lp()


class TestSeparation:
    def test_counts_d2(self):
        found = separable_subsets(2)
        assert len(found) == 14
        assert len([U for U in found if 0 < len(U) < 4]) == 12

    def test_diagonals_are_not_separable(self):
        assert is_linearly_separable(VertexSet(2, {(1, 1), (-1, -1)})) is None
        assert is_linearly_separable(VertexSet(2, {(1, -1), (-1, 1)})) is None

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_matches_lattice_probe(self, d):
        found = set(separable_subsets(d))
        assert found == {U for U in subsets(d) if lattice_separable(d, U)}

    def test_d3_count(self):
        # threshold functions of three inputs
        assert len(separable_subsets(3)) == 104

    def test_functional_separates_with_margin(self):
        for U in subsets(3):
            g = is_linearly_separable(VertexSet(3, U))
            if g is None:
                continue
            assert g.margin > 0
            for v in vertices(3):
                assert g(v) >= g.margin if v in U else g(v) <= -g.margin

    def test_homogeneous_counts(self):
        assert len(separable_subsets(2, homogeneous=True)) == 4

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_homogeneous_needs_antipodal_halves(self, d):
        # g(-v) = -g(v), so U must take exactly one of each antipodal pair
        for U in separable_subsets(d, homogeneous=True):
            assert all((v in U) != (tuple(-x for x in v) in U) for v in vertices(d))

    def test_complement_symmetry(self):
        found = set(separable_subsets(3))
        for U in found:
            assert VertexSet(3, U).complement().members in found

    def test_dimension_limit(self):
        with pytest.raises(ValueError):
            is_linearly_separable(VertexSet(11, frozenset()))


class TestCheckRealizable:
    def test_worked_example(self, data_dir):
        B = basic_set_from_dict(load_json(data_dir / "basic_32.json"))
        res = check_realizable(B)
        assert res.realizable and res.condition in ("Inv1", "Inv2")

    def test_handbuilt_set_fails(self, data_dir):
        B = basic_set_from_dict(load_json(data_dir / "basic_nonrealizable.json"))
        assert not check_realizable(B).realizable
        assert realize(B) is None

    @given(
        st.floats(-4, 5, allow_nan=False),
        st.lists(st.floats(-1.5, 1.5, allow_nan=False), min_size=1, max_size=3),
        st.floats(-3, 3, allow_nan=False),
    )
    @settings(max_examples=150, deadline=None)
    def test_template_sets_pass(self, a, alpha, z):
        try:
            B = admissible_patterns(Template(a, alpha, z))
        except BoundaryParameter:
            assume(False)
        assert check_realizable(B).realizable

    def test_condition_is_necessary(self, lp_realizable):
        for B in lp_realizable:
            assert check_realizable(B).realizable

    def test_condition_is_not_sufficient(self, lp_realizable):
        # passes both containment and separation yet no template produces it
        passing = {B for B in all_basic_sets(2) if check_realizable(B).realizable}
        gap = passing - lp_realizable
        assert len(lp_realizable) == 104 and len(gap) == 28
        B = BasicSet(2, {(1, 1)}, set(vertices(2)) - {(-1, 1)})
        assert B in gap
        # plus = {(1,1)} forces alpha_1 > 0, minus missing (-1,1) forces alpha_1 < 0

    def test_code_rule_holds_on_realizable_sets(self, lp_realizable):
        for B in lp_realizable:
            h = entropy_tsft(tsft_from_basic(B)).entropy
            assert h == pytest.approx(0.0 if classify_code(B.code) else math.log(2), abs=1e-9)


class TestRealize:
    def test_partition_roundtrip(self):
        part = partition_plane(ChildCouplings.from_alpha((-0.25, 0.75)))
        for B in cell_basic_sets(part):
            assert check_realizable(B).realizable
            real = realize(B)
            assert real is not None and real.margin > 0
            assert admissible_patterns(real.template) == B

    def test_exact_solution_has_margin(self, data_dir):
        B = basic_set_from_dict(load_json(data_dir / "basic_32.json"))
        real = realize(B)
        s = real.a - 1 + real.z
        t = real.a - 1 - real.z
        for v in vertices(2):
            dot = sum((ai * x for ai, x in zip(real.alpha, v)), Fraction(0))
            assert (s + dot >= real.margin) if v in B.plus else (s + dot <= -real.margin)
            assert (t - dot >= real.margin) if v in B.minus else (t - dot <= -real.margin)

    def test_record_is_exact_strings(self, data_dir):
        real = realize(basic_set_from_dict(load_json(data_dir / "basic_32.json")))
        rec = real.record()
        assert Fraction(rec["a"]) == real.a and Fraction(rec["z"]) == real.z
        assert tuple(map(Fraction, rec["alpha"])) == real.alpha

    def test_d3_random_templates(self):
        rng = random.Random(5)
        for _ in range(30):
            T = Template(rng.uniform(-2, 3), [rng.uniform(-1, 1) for _ in range(3)], rng.uniform(-1.5, 1.5))
            B = admissible_patterns(T)
            real = realize(B)
            assert real is not None and admissible_patterns(real.template) == B

    def test_catalog_matches_lp(self, lp_realizable):
        cat = distinct_basic_sets(2)
        assert set(cat.catalog) == lp_realizable


class TestListedExamples:
    def test_face_is_separable(self):
        g = is_linearly_separable(VertexSet(2, {(1, 1), (1, -1)}))
        assert g is not None and g((1, 1)) > 0 and g((-1, 1)) < 0

    def test_empty_basic_set_is_vacuously_realizable(self):
        assert check_realizable(BasicSet(2, frozenset(), frozenset())).realizable

    def test_full_basic_set_realized(self):
        vs = frozenset(vertices(2))
        real = realize(BasicSet(2, vs, vs))
        assert real is not None and abs(real.a) <= 10
        assert admissible_patterns(real.template) == BasicSet(2, vs, vs)
