"""
Tests for permutation unitaries, mixture dynamics, their copies and semigroups.
"""

import numpy as np
import pytest
import scipy.sparse as sp

from core.car_algebra import is_even
from core.dynamics import (
    LatticePermutation,
    Semigroup,
    basis_cycle_unitary,
    basis_permutation_unitary,
    copy_map,
    lindblad,
    make_permutation,
    mix_map,
    permutation_unitary,
)
from core.fock import FockSpace, is_unitary, make_lattice


def _commutator(x, y):
    return x @ y - y @ x


@pytest.fixture
def space():
    return FockSpace(make_lattice([1, 2, 3, 4, 5, 6]))


@pytest.fixture
def sigma(space):
    return make_permutation(space.lattice, [1, 2, 3], [(1, 2, 3)])


class TestPermutations:
    def test_mapping(self, sigma):
        assert [sigma(l) for l in (1, 2, 3, 4)] == [2, 3, 1, 4]

    def test_cycles_include_fixed_points(self, space):
        sigma = make_permutation(space.lattice, [1, 2, 3], [(1, 2)])
        assert sigma.cycles == ((1, 2), (3,))

    def test_inverse(self, sigma):
        inverse = sigma.inverse()
        assert all(inverse(sigma(l)) == l for l in (1, 2, 3))

    def test_copy(self, sigma):
        moved = sigma.copy({1: 4, 2: 5, 3: 6})
        assert [moved(l) for l in (4, 5, 6)] == [5, 6, 4]
        assert moved(1) == 1

    def test_repeated_label(self, space):
        with pytest.raises(ValueError, match="repeats"):
            make_permutation(space.lattice, [1, 2, 3], [(1, 2, 1)])

    def test_label_outside_support(self, space):
        with pytest.raises(ValueError, match="not in I"):
            make_permutation(space.lattice, [1, 2], [(1, 3)])

    def test_overlapping_cycles(self, space):
        with pytest.raises(ValueError, match="more than one"):
            make_permutation(space.lattice, [1, 2, 3], [(1, 2), (2, 3)])

    def test_not_a_bijection(self, space):
        with pytest.raises(ValueError, match="not a permutation"):
            LatticePermutation.from_mapping(space.lattice, [1, 2], {1: 2, 2: 2})


class TestPermutationUnitary:
    def test_unitary(self, space, sigma):
        assert is_unitary(permutation_unitary(space, sigma))

    def test_moves_sequences(self, space, sigma):
        unitary = permutation_unitary(space, sigma)
        np.testing.assert_allclose(unitary @ space.f_vector([1, 2]), space.f_vector([2, 3]))
        np.testing.assert_allclose(unitary @ space.f_vector([3, 4]), space.f_vector([1, 4]))

    def test_conjugates_creators(self, space, sigma):
        unitary = permutation_unitary(space, sigma)
        for l in (1, 2, 3):
            np.testing.assert_allclose((unitary @ space.creation(l) @ unitary.conj().T).toarray(),
                                       space.creation(sigma(l)).toarray(), atol=1e-12)

    def test_sparse(self, space, sigma):
        unitary = permutation_unitary(space, sigma)
        assert sp.issparse(unitary)
        assert unitary.count_nonzero() == space.dimension

    @pytest.mark.parametrize("cycles", [[(1, 2, 3)], [(1, 2)], [(1, 3), (2,)]])
    def test_commutes_with_parity(self, space, cycles):
        unitary = permutation_unitary(space, make_permutation(space.lattice, [1, 2, 3], cycles))
        theta = space.parity_operator()
        assert (unitary @ theta - theta @ unitary).count_nonzero() == 0


class TestBasisCycles:
    def test_four_cycle(self, space):
        algebra = space.algebra([1, 2])
        unitary = basis_cycle_unitary(algebra, [(), (1,), (1, 2), (2,)])
        # local order: (), (1,), (2,), (1, 2)
        assert unitary[1, 0] == 1 and unitary[3, 1] == 1 and unitary[2, 3] == 1 and unitary[0, 2] == 1
        assert is_unitary(unitary)

    @pytest.mark.parametrize(
        "label, adjoint_first, expected",
        [
            # U* a_1 U = a*_2 [a_1, a*_1]
            (1, True, lambda g: g["a*_2"] @ _commutator(g["a_1"], g["a*_1"])),
            # U a_1 U* = a_2 [a_1, a*_1]
            (1, False, lambda g: g["a_2"] @ _commutator(g["a_1"], g["a*_1"])),
            # U* a_2 U = a_1 [a*_2, a_2]
            (2, True, lambda g: g["a_1"] @ _commutator(g["a*_2"], g["a_2"])),
            # U a_2 U* = a*_1 [a_2, a*_2]
            (2, False, lambda g: g["a*_1"] @ _commutator(g["a_2"], g["a*_2"])),
        ],
        ids=["U*a1U", "Ua1U*", "U*a2U", "Ua2U*"],
    )
    def test_conjugated_generators(self, space, label, adjoint_first, expected):
        algebra = space.algebra([1, 2])
        unitary = basis_cycle_unitary(algebra, [(), (1,), (1, 2), (2,)])
        generators = {}
        for l in (1, 2):
            generators[f"a_{l}"] = algebra.generator(l).restricted
            generators[f"a*_{l}"] = algebra.generator(l, dagger=True).restricted
        a = generators[f"a_{label}"]
        if adjoint_first:
            conjugated = unitary.conj().T @ a @ unitary
        else:
            conjugated = unitary @ a @ unitary.conj().T
        assert np.linalg.norm(conjugated - expected(generators), 2) < 1e-12

    def test_disjoint_cycles(self, space):
        algebra = space.algebra([1, 2])
        unitary = basis_permutation_unitary(algebra, [[(), (1, 2)], [(1,), (2,)]])
        np.testing.assert_allclose(unitary @ unitary, np.eye(4))

    def test_repeated_basis_state(self, space):
        algebra = space.algebra([1, 2])
        with pytest.raises(ValueError, match="more than once"):
            basis_permutation_unitary(algebra, [[(), (1,)], [(1,), (2,)]])


class TestMixtures:
    def test_unital_and_even(self, space, sigma):
        algebra = space.algebra([1, 2, 3])
        tau = mix_map(algebra, permutation_unitary(space, sigma), 0.5).as_map
        assert tau.is_unital()
        even, deviation = is_even(tau)
        assert even and deviation < 1e-12

    def test_action_on_generator(self, space, sigma):
        algebra = space.algebra([1, 2, 3])
        tau = mix_map(algebra, permutation_unitary(space, sigma), 0.25).as_map
        # U* a_1 U = a_3 and U a_1 U* = a_2
        expected = 0.25 * algebra.generator(3) + 0.75 * algebra.generator(2)
        assert tau(algebra.generator(1)).allclose(expected)

    @pytest.mark.parametrize("picture", ["permutation", "basis-cycle"])
    def test_preserves_adjoints(self, space, sigma, picture):
        if picture == "permutation":
            algebra = space.algebra([1, 2, 3])
            unitary = permutation_unitary(space, sigma)
        else:
            algebra = space.algebra([1, 2])
            unitary = basis_cycle_unitary(algebra, [(), (1,), (1, 2), (2,)])
        tau = mix_map(algebra, unitary, 0.3).as_map
        rng = np.random.default_rng(9)
        for _ in range(5):
            n = algebra.dimension
            a = algebra.element(rng.normal(size=n) + 1j * rng.normal(size=n))
            assert tau(a.adjoint()).allclose(tau(a).adjoint(), tol=1e-9)

    def test_two_cycle_ignores_weight(self, space):
        sigma = make_permutation(space.lattice, [1, 2], [(1, 2)])
        algebra = space.algebra([1, 2])
        unitary = permutation_unitary(space, sigma)
        assert mix_map(algebra, unitary, 0.0).as_map.distance(mix_map(algebra, unitary, 1.0).as_map) < 1e-12

    def test_local_picture_matches_full(self, space, sigma):
        algebra = space.algebra([1, 2, 3])
        full = permutation_unitary(space, sigma)
        local = space.restrict(full, [1, 2, 3])
        assert mix_map(algebra, local, 0.3).as_map.distance(mix_map(algebra, full, 0.3).as_map) < 1e-10

    def test_weight_range(self, space, sigma):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            mix_map(space.algebra([1, 2, 3]), permutation_unitary(space, sigma), 1.5)

    def test_not_unitary(self, space):
        with pytest.raises(ValueError, match="unitary"):
            mix_map(space.algebra([1, 2]), 2 * np.eye(4), 0.5)

    def test_wrong_size(self, space):
        with pytest.raises(ValueError, match="fits neither"):
            mix_map(space.algebra([1, 2]), np.eye(8), 0.5)

    def test_unitary_leaving_algebra(self, space):
        sigma = make_permutation(space.lattice, [1, 2, 3], [(1, 3)])
        with pytest.raises(ValueError, match="does not preserve"):
            mix_map(space.algebra([1, 2]), permutation_unitary(space, sigma), 0.5)

    @pytest.mark.parametrize("iota", [{1: 4, 2: 5, 3: 6}, {1: 6, 2: 5, 3: 4}])
    def test_copy_is_permuted_copy(self, space, sigma, iota):
        algebra = space.algebra([1, 2, 3])
        tau = mix_map(algebra, permutation_unitary(space, sigma), 0.3).as_map
        moved = sigma.copy(iota)
        target = space.algebra(iota.values())
        expected = mix_map(target, permutation_unitary(space, moved), 0.3).as_map
        assert copy_map(tau, iota).distance(expected) < 1e-10


class TestSemigroup:
    @pytest.fixture
    def semigroup(self, space, sigma):
        return lindblad(space.algebra([1, 2, 3]), permutation_unitary(space, sigma), 0.5)

    def test_starts_at_identity(self, semigroup):
        assert semigroup.evolve(0.0).distance(semigroup.algebra.identity_map()) < 1e-12

    def test_composition(self, semigroup):
        product = semigroup.evolve(0.4) @ semigroup.evolve(0.6)
        assert product.distance(semigroup.evolve(1.0)) < 1e-10

    def test_unital(self, semigroup):
        assert semigroup.evolve(5.0).is_unital()

    def test_negative_time(self, semigroup):
        with pytest.raises(ValueError, match="non-negative"):
            semigroup.evolve(-1.0)

    def test_generator(self, space, sigma):
        tau = mix_map(space.algebra([1, 2, 3]), permutation_unitary(space, sigma), 0.5).as_map
        generator = Semigroup.from_map(tau).generator
        assert (generator + tau.algebra.identity_map()).distance(tau) < 1e-12
