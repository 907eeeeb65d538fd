import itertools
import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cayley_entropy.errors import NumericalFailure, ParseError, ResourceLimitError
from cayley_entropy.snre import (
    SNRE,
    Monomial,
    ReducedSNRE,
    check_ln_d_criterion,
    construct_tsft_with_entropy,
    entropy_spectrum,
    entropy_tsft,
    enumerate_reduced,
    exponent_vectors,
    indicator_matrix,
    snre_from_dict,
    snre_from_tsft,
    snre_to_dict,
    spectral_radius,
    tsft_from_snre,
    tsft_realizing_matrix,
    weighted_adjacency,
)
from cayley_entropy.treeshift import (
    MarkovTreeShift,
    TwoBlock,
    count_blocks,
    entropy_estimate,
    essential_symbols,
    prune_dead_symbols,
)

from conftest import all_k2_treeshifts, golden_mean, random_treeshift, sink_pair

LN2 = math.log(2)

# alpha_1 = alpha_1^2 + alpha_2^2, alpha_2 = 2 alpha_1 alpha_2
WORKED_SNRE = SNRE.from_indicator([[1, 0, 1], [0, 2, 0]], degree=2)


def rows_as_dicts(F):
    return [{m.exponents: m.coefficient for m in row} for row in F.rows]


class TestSNREFromTSFT:
    def test_golden_mean(self, gm):
        F = snre_from_tsft(gm)
        # symbol order ("0", "1"): gamma_1 = gamma_0^2 ; gamma_0 = (gamma_0 + gamma_1)^2
        assert rows_as_dicts(F) == [{(2, 0): 1, (1, 1): 2, (0, 2): 1}, {(2, 0): 1}]

    def test_full_shift_binomial(self):
        F = snre_from_tsft(MarkovTreeShift.full("ab", 2))
        assert rows_as_dicts(F) == [{(2, 0): 1, (1, 1): 2, (0, 2): 1}] * 2

    def test_worked_system_roundtrip(self):
        X = tsft_from_snre(WORKED_SNRE)
        assert rows_as_dicts(snre_from_tsft(X)) == [{(2, 0): 1, (0, 2): 1}, {(1, 1): 2}]

    def test_rows_sorted_descending(self, gm):
        for row in snre_from_tsft(gm).rows:
            exps = [m.exponents for m in row]
            assert exps == sorted(exps, reverse=True)

    @given(st.integers(0, 2**18 - 1), st.integers(1, 3))
    @settings(max_examples=80, deadline=None)
    def test_fidelity(self, seed, k):
        X = prune_dead_symbols(random_treeshift(random.Random(seed), k, 2))
        if X.is_empty:
            return
        assert snre_from_tsft(X).evaluate(6) == count_blocks(X, 6).exact

    def test_coefficient_too_large(self):
        with pytest.raises(ValueError):
            tsft_from_snre(SNRE(2, ((Monomial(2, (2, 0)),), (Monomial(1, (0, 2)),))))


class TestIndicator:
    def test_worked_example(self):
        I = indicator_matrix(WORKED_SNRE)
        assert I.columns == ((2, 0), (1, 1), (0, 2))
        assert I.entries == ((1, 0, 1), (0, 2, 0))

    def test_full_shift(self):
        I = indicator_matrix(snre_from_tsft(MarkovTreeShift.full("ab", 2)))
        assert I.entries == ((1, 2, 1), (1, 2, 1))

    def test_single_monomial_rows(self, tribonacci):
        E = next(enumerate_reduced(snre_from_tsft(tribonacci)))
        for row in E.indicator().entries:
            assert sum(1 for v in row if v) == 1

    def test_inverse(self, tribonacci):
        F = snre_from_tsft(tribonacci)
        I = indicator_matrix(F)
        assert SNRE.from_indicator(I.entries, F.degree) == F

    def test_column_order(self):
        assert exponent_vectors(3, 2) == [(3, 0), (2, 1), (1, 2), (0, 3)]
        assert len(exponent_vectors(3, 4)) == math.comb(6, 3)


class TestReduced:
    def test_worked_example_count(self):
        systems = list(enumerate_reduced(WORKED_SNRE))
        assert len(systems) == 2
        assert [[1, 0, 0], [0, 1, 0]] in [[list(r) for r in E.indicator().entries] for E in systems]

    def test_full_shift_nine(self):
        systems = list(enumerate_reduced(snre_from_tsft(MarkovTreeShift.full("ab", 2))))
        assert len(systems) == 9
        assert len({E.selection for E in systems}) == 9

    def test_single_monomial(self):
        F = SNRE(2, ((Monomial(1, (2, 0)),), (Monomial(1, (0, 2)),)))
        assert len(list(enumerate_reduced(F))) == 1

    def test_cap(self):
        F = snre_from_tsft(MarkovTreeShift.full("ab", 2))
        with pytest.raises(ResourceLimitError):
            list(enumerate_reduced(F, cap=8))

    def test_selection_must_come_from_parent(self):
        with pytest.raises(ValueError):
            ReducedSNRE(WORKED_SNRE, ((1, 1), (1, 1)))

    def test_reduced_initial_conditions_inherited(self):
        F = SNRE(WORKED_SNRE.degree, WORKED_SNRE.rows, (2, 3))
        for E in enumerate_reduced(F):
            assert E.as_snre().init == (2, 3)


class TestWeightedAdjacency:
    def test_worked_example(self):
        E = ReducedSNRE(WORKED_SNRE, ((2, 0), (1, 1)))
        assert weighted_adjacency(E).tolist() == [[2, 0], [1, 1]]

    def test_same_symbol_selection(self):
        F = snre_from_tsft(MarkovTreeShift.full("abc", 3))
        E = ReducedSNRE(F, ((0, 3, 0), (0, 3, 0), (0, 0, 3)))
        assert weighted_adjacency(E).tolist() == [[0, 3, 0], [0, 3, 0], [0, 0, 3]]

    def test_tribonacci(self, tribonacci):
        F = snre_from_tsft(tribonacci)
        E = ReducedSNRE(F, ((1, 1, 0, 1), (0, 0, 1, 2), (2, 1, 0, 0), (0, 0, 0, 3)))
        assert weighted_adjacency(E).tolist() == [[1, 1, 0, 1], [0, 0, 1, 2], [2, 1, 0, 0], [0, 0, 0, 3]]

    @given(st.integers(0, 2**18 - 1))
    @settings(max_examples=50)
    def test_row_sums_equal_d(self, seed):
        X = prune_dead_symbols(random_treeshift(random.Random(seed), 3, 2))
        if X.is_empty:
            return
        for E in enumerate_reduced(snre_from_tsft(X)):
            M = weighted_adjacency(E)
            assert (M.sum(axis=1) == 2).all()
            assert spectral_radius(M) <= 2 + 1e-12


matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n), min_size=n, max_size=n)
)


class TestSpectralRadius:
    def test_triangular(self):
        assert spectral_radius([[2, 0], [1, 1]]) == 2.0

    def test_tribonacci_root(self):
        assert abs(spectral_radius([[1, 1, 0], [0, 0, 1], [2, 1, 0]]) - 1.839287) < 1e-6

    def test_periodic(self):
        assert abs(spectral_radius([[0, 2], [1, 0]]) - math.sqrt(2)) < 1e-12

    def test_jordan_block(self):
        # defective dominant eigenvalue; plain power iteration converges only like 1/n
        assert abs(spectral_radius([[1, 1], [0, 1]]) - 1.0) < 1e-12
        assert abs(spectral_radius([[2, 1, 0], [0, 2, 1], [0, 0, 2]]) - 2.0) < 1e-12

    def test_zero(self):
        assert spectral_radius([[0]]) == 0.0
        assert spectral_radius([[0, 1], [0, 0]]) == 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            spectral_radius([[1, 2, 3]])
        with pytest.raises(ValueError):
            spectral_radius([[1, -1], [0, 1]])
        with pytest.raises(ValueError):
            spectral_radius(np.zeros((0, 0)))

    def test_iteration_cap(self):
        with pytest.raises(NumericalFailure):
            spectral_radius([[1, 1, 0], [0, 0, 1], [2, 1, 0]], max_iter=2)

    @given(matrices)
    @settings(max_examples=300, deadline=None)
    def test_matches_high_precision_eig(self, M):
        # 60 digits keep defective eigenvalues accurate well past 1e-10
        with mpmath.workdps(60):
            eigenvalues, _ = mpmath.eig(mpmath.matrix(M))
            expected = float(max(abs(e) for e in eigenvalues))
        assert spectral_radius(M) == pytest.approx(expected, abs=1e-10)


class TestEntropy:
    def test_tribonacci(self, tribonacci):
        rep = entropy_tsft(tribonacci)
        assert abs(rep.entropy - math.log(1.839287)) < 1e-6
        assert rep.matrix == [[1, 1, 0], [0, 0, 1], [2, 1, 0]]
        assert rep.essential == ["a1", "a2", "a3"]

    def test_golden_mean(self, gm):
        assert abs(entropy_tsft(gm).entropy - LN2) < 1e-12

    def test_all_inessential(self):
        rep = entropy_tsft(sink_pair())
        assert rep.entropy == 0.0 and rep.matrix == [] and rep.essential == []

    def test_empty(self):
        rep = entropy_tsft(MarkovTreeShift(("+", "-"), 2, frozenset({TwoBlock("+", ("-", "-"))})))
        assert rep.empty and rep.entropy == 0.0 and rep.pruned_symbols == ["+", "-"]

    def test_essential_root_over_inessential_children(self):
        # a roots two blocks made of the sink b: gamma_a stays 2, entropy 0
        X = MarkovTreeShift(
            ("a", "b", "c"),
            2,
            frozenset({TwoBlock("a", ("b", "b")), TwoBlock("a", ("c", "c")), TwoBlock("b", ("b", "b")), TwoBlock("c", ("c", "c"))}),
        )
        rep = entropy_tsft(X)
        assert rep.entropy == 0.0 and rep.matrix == [[0]]

    def test_argmax_is_lexicographically_first(self):
        rep = entropy_tsft(MarkovTreeShift.full("ab", 2))
        assert rep.argmax_selection == ((2, 0), (2, 0))

    def test_record_fields(self, gm):
        record = entropy_tsft(gm).record()
        assert {"entropy", "argmax_selection", "matrix", "essential", "pruned_symbols"} <= set(record)

    def test_all_essential_gives_ln_d(self):
        rng = random.Random(11)
        checked = 0
        for _ in range(300):
            d = rng.choice([2, 3])
            X = prune_dead_symbols(random_treeshift(rng, rng.choice([2, 3]), d, 0.3))
            if X.is_empty or essential_symbols(X) != set(X.alphabet):
                continue
            assert abs(entropy_tsft(X).entropy - math.log(d)) < 1e-9
            checked += 1
        assert checked > 20

    def test_exhaustive_d2_k2_family(self):
        values, mismatches = set(), []
        for X in all_k2_treeshifts(2):
            h = entropy_tsft(X).entropy
            assert min(abs(h), abs(h - LN2)) < 1e-9
            values.add(round(h, 9))
            criterion, witness = check_ln_d_criterion(prune_dead_symbols(X))
            if criterion != (abs(h - LN2) < 1e-9):
                mismatches.append(X)
            if h > 0:
                assert abs(_estimate(X) - h) <= 0.05
        assert values == {0.0, round(LN2, 9)}
        assert mismatches == []

    def test_estimate_agrees_on_random_k3(self):
        rng = random.Random(5)
        for _ in range(60):
            X = prune_dead_symbols(random_treeshift(rng, 3, 2, 0.35))
            if X.is_empty:
                continue
            h = entropy_tsft(X).entropy
            if h > 0:
                assert abs(_estimate(X) - h) <= 0.05


def _estimate(X):
    return entropy_estimate(prune_dead_symbols(X), 200)


class TestCriterion:
    def test_golden_mean(self, gm):
        assert check_ln_d_criterion(gm) == (True, frozenset({"0", "1"}))

    def test_sink_pair(self):
        assert check_ln_d_criterion(sink_pair()) == (False, frozenset())

    def test_full_shift(self):
        assert check_ln_d_criterion(MarkovTreeShift.full("abc", 2)) == (True, frozenset("abc"))

    def test_random_k3_agrees_with_algorithm(self):
        rng = random.Random(17)
        for _ in range(200):
            X = prune_dead_symbols(random_treeshift(rng, 3, rng.choice([2, 3]), 0.25))
            found, witness = check_ln_d_criterion(X)
            h = entropy_tsft(X).entropy
            assert found == (abs(h - math.log(X.degree)) < 1e-9)
            for s in witness:
                assert any(set(b.children) <= witness for b in X.rooted_at(s))


class TestSpectrum:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_k2_integer_values(self, d):
        values = [v.entropy for v in entropy_spectrum(d, 2)]
        assert values == pytest.approx([math.log(c) for c in range(1, d + 1)], abs=1e-12)

    def test_golden_ratio_for_k3(self):
        phi = (1 + math.sqrt(5)) / 2
        spec = entropy_spectrum(2, 3)
        assert any(abs(v.rho - phi) < 1e-9 for v in spec)
        assert [round(v.rho, 9) for v in spec] == [1.0, round(math.sqrt(2), 9), round(phi, 9), 2.0]

    def test_trivial(self):
        assert [v.entropy for v in entropy_spectrum(1, 1)] == [0.0]

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            entropy_spectrum(4, 4, cap=1000)

    @pytest.mark.parametrize("d", [1, 2])
    def test_k2_matches_exhaustive_family(self, d):
        spectrum = {round(v.entropy, 9) for v in entropy_spectrum(d, 2)}
        found = {round(entropy_tsft(X).entropy, 9) for X in all_k2_treeshifts(d)}
        assert found == spectrum

    def test_every_value_is_realized(self):
        # each witness matrix M yields a tree-shift over k symbols with entropy ln rho(M)
        for d, k in [(2, 3), (3, 3)]:
            for v in entropy_spectrum(d, k):
                if not v.witness:
                    continue
                X = tsft_realizing_matrix(v.witness, d)
                assert X.k <= k
                assert abs(entropy_tsft(X).entropy - v.entropy) < 1e-9

    def test_random_k3_within_spectrum(self):
        spectrum = [v.entropy for v in entropy_spectrum(2, 3)]
        rng = random.Random(23)
        for _ in range(300):
            X = random_treeshift(rng, 3, 2, rng.choice([0.2, 0.3, 0.5]))
            h = entropy_tsft(X).entropy
            assert min(abs(h - s) for s in spectrum) < 1e-9

    def test_realizing_matrix_all_d2_two_by_two(self):
        rows = [r for r in itertools.product(range(3), repeat=2) if sum(r) <= 2]
        for M in itertools.product(rows, repeat=2):
            rho = spectral_radius(M)
            expected = math.log(rho) if rho >= 1 else 0.0
            assert abs(entropy_tsft(tsft_realizing_matrix(M, 2)).entropy - expected) < 1e-9


class TestConstruction:
    @pytest.mark.parametrize("d,c", [(3, 2), (2, 2), (3, 1), (4, 3), (5, 5), (1, 1)])
    def test_entropy_ln_c(self, d, c):
        assert abs(entropy_tsft(construct_tsft_with_entropy(d, c)).entropy - math.log(c)) < 1e-9

    def test_block_layout(self):
        X = construct_tsft_with_entropy(3, 2)
        assert TwoBlock("a1", ("a1", "a1", "a2")) in X.allowed
        assert rows_as_dicts(snre_from_tsft(X)) == [{(2, 1): 1, (0, 3): 1}, {(0, 3): 1}]

    def test_full_loop(self):
        assert TwoBlock("a1", ("a1", "a1")) in construct_tsft_with_entropy(2, 2).allowed

    def test_range(self):
        with pytest.raises(ValueError):
            construct_tsft_with_entropy(2, 3)
        with pytest.raises(ValueError):
            construct_tsft_with_entropy(2, 0)


class TestSerialization:
    def test_roundtrip(self, tribonacci):
        F = snre_from_tsft(tribonacci)
        assert snre_from_dict(snre_to_dict(F)) == F

    def test_k_mismatch(self):
        doc = snre_to_dict(WORKED_SNRE)
        doc["k"] = 3
        with pytest.raises(ParseError):
            snre_from_dict(doc)

    def test_bad_exponents(self):
        with pytest.raises(ParseError):
            snre_from_dict({"d": 2, "rows": [[{"r": 1, "c": [1, 0]}], [{"r": 1, "c": [0, 2]}]]})
