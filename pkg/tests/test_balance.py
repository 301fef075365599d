"""
Tests for fermionic and standard detailed balance and the probability symmetry conditions.
"""

import numpy as np
import pytest
import scipy.sparse as sp

from core.balance import (
    fermionic_sqdb,
    fermionic_sqdb_continuous,
    omega,
    omega_vector,
    permuted_entangled_vector,
    prob_symmetry,
    standard_sqdb,
    standard_sqdb_continuous,
)
from core.car_algebra import is_even
from core.dynamics import Semigroup, basis_cycle_unitary, make_permutation, mix_map, permutation_unitary
from core.fock import FockSpace, make_lattice
from core.states import (
    entangled_vector,
    length_table,
    make_config,
    make_probability_table,
    reduction_report,
    uniform_table,
)

BASIS_CYCLE = [(), (1,), (1, 2), (2,)]
COPY_CYCLE = [(), (3,), (3, 4), (4,)]


def _state(support, iota, table):
    labels = sorted(set(support) | set(iota.values()))
    space = FockSpace(make_lattice(labels))
    return entangled_vector(make_config(space, support, iota, table))


def _cycle_map(state, cycle, weight):
    config = state.config
    sigma = make_permutation(config.space.lattice, config.support, [cycle])
    return mix_map(config.algebra, permutation_unitary(config.space, sigma), weight).as_map


@pytest.fixture
def three_cycle_state():
    table = length_table([1, 2, 3], lambda k: (2.0, 1.0, 1.0, 2.0)[k])
    return _state((1, 2, 3), {1: 4, 2: 5, 3: 6}, table)


@pytest.fixture
def basis_cycle_state():
    return _state((1, 2), {1: 3, 2: 4}, uniform_table([1, 2]))


@pytest.fixture
def alpha(basis_cycle_state):
    algebra = basis_cycle_state.config.algebra
    return mix_map(algebra, basis_cycle_unitary(algebra, BASIS_CYCLE), 0.5).as_map


class TestPermutationBalance:
    def test_three_cycle_balanced(self, three_cycle_state):
        report = fermionic_sqdb(_cycle_map(three_cycle_state, (1, 2, 3), 0.5), three_cycle_state)
        assert report.verdict
        assert report.max_violation < 1e-10

    def test_two_cycle_balanced(self):
        state = _state((1, 2), {1: 3, 2: 4}, length_table([1, 2], lambda k: (3.0, 2.0, 1.0)[k]))
        assert fermionic_sqdb(_cycle_map(state, (1, 2), 0.5), state).max_violation < 1e-10

    @pytest.mark.parametrize("weight", [0.0, 0.3, 0.9])
    def test_unbalanced_weights(self, weight):
        state = _state((1, 2, 3), {1: 4, 2: 5, 3: 6}, uniform_table([1, 2, 3]))
        report = fermionic_sqdb(_cycle_map(state, (1, 2, 3), weight), state)
        assert not report.verdict
        assert report.max_violation > 1e-3

    def test_continuous(self, three_cycle_state):
        semigroup = Semigroup.from_map(_cycle_map(three_cycle_state, (1, 2, 3), 0.5))
        reports = fermionic_sqdb_continuous(semigroup, three_cycle_state, [0.1, 1.0, 5.0])
        assert all(r.max_violation < 1e-10 for r in reports)

    def test_continuous_unbalanced(self):
        state = _state((1, 2, 3), {1: 4, 2: 5, 3: 6}, uniform_table([1, 2, 3]))
        semigroup = Semigroup.from_map(_cycle_map(state, (1, 2, 3), 0.9))
        assert not fermionic_sqdb_continuous(semigroup, state, [1.0])[0].verdict

    def test_negative_time(self, three_cycle_state):
        semigroup = Semigroup.from_map(_cycle_map(three_cycle_state, (1, 2, 3), 0.5))
        with pytest.raises(ValueError, match="non-negative"):
            fermionic_sqdb_continuous(semigroup, three_cycle_state, [0.5, -0.1])

    def test_map_on_wrong_algebra(self, three_cycle_state):
        other = three_cycle_state.space.algebra([1, 2]).identity_map()
        with pytest.raises(ValueError, match="state is built on"):
            fermionic_sqdb(other, three_cycle_state)

    def test_even(self, three_cycle_state):
        assert is_even(_cycle_map(three_cycle_state, (1, 2, 3), 0.5), tol=1e-12)[0]


class TestBasisCycleExample:
    def test_displayed_vectors(self, basis_cycle_state, alpha):
        state = basis_cycle_state
        space, config = state.space, state.config
        phi_vec = state.vector
        a1_dag = config.algebra.generator(1, dagger=True)
        a4_dag = config.copy_algebra.generator(4, dagger=True)
        copy_alpha = config.eta.conjugate(alpha)

        expected = 0.25 * (space.f_vector([2]) + space.f_vector([4]) + space.f_vector([1, 2, 3])
                           + space.f_vector([1, 3, 4]))
        np.testing.assert_allclose(alpha(a1_dag).operator @ phi_vec, expected, atol=1e-12)

        expected = 0.5 * (space.f_vector([4]) + space.f_vector([1, 3, 4]))
        np.testing.assert_allclose(a4_dag.operator @ phi_vec, expected, atol=1e-12)

        expected = 0.5 * (space.f_vector([1]) + space.f_vector([1, 2, 4]))
        np.testing.assert_allclose(a1_dag.operator @ phi_vec, expected, atol=1e-12)

        expected = -0.25 * (space.f_vector([1]) + space.f_vector([3]) + space.f_vector([1, 2, 4])
                            + space.f_vector([2, 3, 4]))
        np.testing.assert_allclose(copy_alpha(a4_dag).operator @ phi_vec, expected, atol=1e-12)

    def test_fermionic_values(self, basis_cycle_state, alpha):
        report = fermionic_sqdb(alpha, basis_cycle_state)
        lhs, rhs = report.pair("a_1", "a*_4")
        assert lhs == pytest.approx(0.25, abs=1e-10)
        assert rhs == pytest.approx(-0.25, abs=1e-10)
        assert not report.verdict
        assert report.max_violation >= 0.5 - 1e-10

    def test_standard_holds(self, basis_cycle_state, alpha):
        report = standard_sqdb(alpha.superoperator(), basis_cycle_state.config.probs)
        assert report.verdict
        assert report.max_violation < 1e-10

    def test_standard_fails_without_mixing(self, basis_cycle_state):
        algebra = basis_cycle_state.config.algebra
        frozen = mix_map(algebra, basis_cycle_unitary(algebra, BASIS_CYCLE), 0.0).as_map
        assert not standard_sqdb(frozen.superoperator(), basis_cycle_state.config.probs).verdict

    def test_even(self, alpha):
        even, deviation = is_even(alpha, tol=1e-12)
        assert even

    def test_copy_from_unitary_on_copy(self, basis_cycle_state, alpha):
        config = basis_cycle_state.config
        copy_alpha = mix_map(config.copy_algebra, basis_cycle_unitary(config.copy_algebra, COPY_CYCLE), 0.5).as_map
        assert copy_alpha.distance(config.eta.conjugate(alpha)) < 1e-12
        report = fermionic_sqdb(alpha, basis_cycle_state, copy=copy_alpha)
        assert report.pair("a_1", "a*_4")[1] == pytest.approx(-0.25, abs=1e-10)

    def test_copy_on_wrong_algebra(self, basis_cycle_state, alpha):
        with pytest.raises(ValueError, match="Copied dynamics"):
            fermionic_sqdb(alpha, basis_cycle_state, copy=alpha)

    def test_unknown_pair(self, basis_cycle_state, alpha):
        with pytest.raises(ValueError, match="No spanning pair"):
            fermionic_sqdb(alpha, basis_cycle_state).pair("a_7", "1")


class TestStandardBalance:
    def test_omega_vector(self):
        probs = [0.4, 0.3, 0.2, 0.1]
        vec = omega_vector(probs)
        assert np.linalg.norm(vec) == pytest.approx(1.0)
        assert omega(probs, np.eye(4), np.eye(4)) == pytest.approx(1.0)

    def test_omega_on_matrix_units(self):
        probs = [0.4, 0.3, 0.2, 0.1]
        units = [np.outer(np.eye(4)[j], np.eye(4)[k]) for j in range(4) for k in range(4)]
        assert omega(probs, units[5], units[5]) == pytest.approx(0.3)
        # E_01 ⊗ E_01 pairs d_0 with d_1
        assert omega(probs, units[1], units[1]) == pytest.approx(np.sqrt(0.4 * 0.3))
        assert omega(probs, units[1], units[2]) == pytest.approx(0.0)

    def test_identity_balanced(self):
        assert standard_sqdb(np.eye(16), [0.4, 0.3, 0.2, 0.1]).verdict

    def test_labels(self, basis_cycle_state, alpha):
        report = standard_sqdb(alpha.superoperator(), basis_cycle_state.config.probs)
        assert report.row_labels[1] == "|()><(1)|"

    def test_shape_checked(self):
        with pytest.raises(ValueError, match="does not act"):
            standard_sqdb(np.eye(9), [0.4, 0.3, 0.2, 0.1])

    def test_continuous(self, basis_cycle_state, alpha):
        reports = standard_sqdb_continuous(Semigroup.from_map(alpha), basis_cycle_state.config.probs, [0.5, 2.0])
        assert all(r.verdict for r in reports)


class TestProbabilitySymmetry:
    def test_length_only_table(self, three_cycle_state):
        sigma = make_permutation(three_cycle_state.space.lattice, [1, 2, 3], [(1, 2, 3)])
        report = prob_symmetry(three_cycle_state.config.probs, sigma)
        assert report.inv and report.inv2 and report.inv_prime

    def test_invariant_but_not_length_only(self):
        table = make_probability_table([1, 2, 3], {
            (): 0.1, (1,): 0.1, (2,): 0.1, (3,): 0.2,
            (1, 2): 0.1, (1, 3): 0.15, (2, 3): 0.15, (1, 2, 3): 0.1,
        })
        sigma = make_permutation(make_lattice([1, 2, 3]), [1, 2, 3], [(1, 2)])
        report = prob_symmetry(table, sigma)
        assert report.inv and report.inv_prime
        assert not report.inv2

    def test_generic_table(self):
        table = make_probability_table([1, 2], [0.4, 0.3, 0.2, 0.1])
        sigma = make_permutation(make_lattice([1, 2]), [1, 2], [(1, 2)])
        report = prob_symmetry(table, sigma)
        assert not report.inv and not report.inv2 and not report.inv_prime

    def test_support_mismatch(self):
        sigma = make_permutation(make_lattice([1, 2, 3]), [1, 2], [(1, 2)])
        with pytest.raises(ValueError, match="lives on"):
            prob_symmetry(uniform_table([1, 2, 3]), sigma)

    def test_permuted_vector(self, three_cycle_state):
        sigma = make_permutation(three_cycle_state.space.lattice, [1, 2, 3], [(1, 2, 3)])
        moved = permuted_entangled_vector(three_cycle_state, sigma)
        np.testing.assert_allclose(moved, three_cycle_state.vector, atol=1e-12)


class TestSpanningReduction:
    def test_random_elements_follow_pair_table(self, basis_cycle_state, alpha):
        state, config = basis_cycle_state, basis_cycle_state.config
        copy = config.eta.conjugate(alpha)
        report = fermionic_sqdb(alpha, state)
        rng = np.random.default_rng(13)
        n = config.algebra.dimension
        for _ in range(5):
            a = config.algebra.element(rng.normal(size=n) + 1j * rng.normal(size=n))
            b = config.copy_algebra.element(rng.normal(size=n) + 1j * rng.normal(size=n))
            direct = state.phi(alpha(a).operator @ b.operator) - state.phi(a.operator @ copy(b).operator)
            combined = a.coefficients @ (report.lhs - report.rhs) @ b.coefficients
            assert direct == pytest.approx(combined, abs=1e-10)
            assert abs(direct) > 1e-6


class TestMovedCopies:
    @pytest.fixture
    def unitaries(self, three_cycle_state):
        config = three_cycle_state.config
        sigma = make_permutation(config.space.lattice, config.support, [(1, 2, 3)])
        return permutation_unitary(config.space, sigma), permutation_unitary(config.space, sigma.copy(config.iota))

    def test_unitaries_commute_with_opposite_side(self, three_cycle_state, unitaries):
        u, v = unitaries
        config = three_cycle_state.config
        for m in config.algebra.monomials:
            assert (m.operator @ v - v @ m.operator).count_nonzero() == 0
        for n in config.copy_algebra.monomials:
            assert (n.operator @ u - u @ n.operator).count_nonzero() == 0

    def test_moving_source_equals_moving_copy(self, three_cycle_state, unitaries):
        # <Phi, U* a U b Phi> = <Phi, a V b V* Phi>
        u, v = unitaries
        config, vec = three_cycle_state.config, three_cycle_state.vector
        source, copies = config.algebra.monomials, config.copy_algebra.monomials
        left = np.stack([(u.conj().T @ m.operator @ u).conj().T @ vec for m in source])
        right = np.stack([n.operator @ vec for n in copies])
        moved_source = left.conj() @ right.T
        left = np.stack([m.operator.conj().T @ vec for m in source])
        right = np.stack([(v @ n.operator @ v.conj().T) @ vec for n in copies])
        moved_copy = left.conj() @ right.T
        np.testing.assert_allclose(moved_source, moved_copy, atol=1e-12)
        assert np.abs(moved_source).max() > 0.1


class TestInterleavedCopies:
    WEIGHTS = (2.0, 1.0, 1.0, 2.0)

    def _report(self, support, iota, cycle, weight):
        state = _state(support, iota, uniform_table(support))
        return state, fermionic_sqdb(_cycle_map(state, cycle, weight), state)

    @pytest.mark.parametrize("support, iota", [
        ((1, 2, 3), {1: 6, 2: 5, 3: 4}),
        ((1, 3, 5), {1: 2, 3: 4, 5: 6}),
    ])
    def test_reductions(self, support, iota):
        state = _state(support, iota, length_table(support, lambda k: self.WEIGHTS[k]))
        assert reduction_report(state).max_deviation < 1e-12

    @pytest.mark.parametrize("weight", [0.5, 0.3])
    def test_reversed_copy_matches_ascending(self, weight):
        _, reference = self._report((1, 2, 3), {1: 4, 2: 5, 3: 6}, (1, 2, 3), weight)
        _, reversed_copy = self._report((1, 2, 3), {1: 6, 2: 5, 3: 4}, (1, 2, 3), weight)
        assert reversed_copy.verdict == reference.verdict == (weight == 0.5)
        assert reversed_copy.max_violation == pytest.approx(reference.max_violation, abs=1e-12)
        np.testing.assert_allclose(np.sort(reversed_copy.per_pair, axis=None),
                                   np.sort(reference.per_pair, axis=None), atol=1e-12)

    @pytest.mark.parametrize("weight", [0.5, 0.3])
    def test_alternating_labels_match_ascending(self, weight):
        _, reference = self._report((1, 2, 3), {1: 4, 2: 5, 3: 6}, (1, 2, 3), weight)
        _, alternating = self._report((1, 3, 5), {1: 2, 3: 4, 5: 6}, (1, 3, 5), weight)
        assert alternating.verdict == reference.verdict
        np.testing.assert_allclose(alternating.lhs, reference.lhs, atol=1e-12)
        np.testing.assert_allclose(alternating.rhs, reference.rhs, atol=1e-12)


class TestWideLattice:
    def test_basis_cycle_with_distant_copy(self):
        space = FockSpace(make_lattice(range(1, 15)))
        config = make_config(space, (1, 2), {1: 13, 2: 14}, uniform_table([1, 2]))
        state = entangled_vector(config)
        alpha = mix_map(config.algebra, basis_cycle_unitary(config.algebra, BASIS_CYCLE), 0.5).as_map
        report = fermionic_sqdb(alpha, state)
        lhs, rhs = report.pair("a_1", "a*_14")
        assert lhs == pytest.approx(0.25, abs=1e-10)
        assert rhs == pytest.approx(-0.25, abs=1e-10)
        assert sp.issparse(config.algebra.monomials[1].operator)
