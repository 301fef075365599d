"""
FermiBalance – Dynamical maps on A(I)
======================================
Permutation unitaries, the two-sided mixtures

    tau(a) = lambda U* a U + (1 - lambda) U a U*,

their copies on ``A(iota(I))``, basis-permutation unitaries on ``H_I`` and
the quantum Markov semigroups generated by ``tau - id``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from core.car_algebra import CARAlgebra, LatticeIsomorphism, LinearMap
from core.fock import AnyOperator, FockSpace, Lattice, is_unitary, sequence_sign
from core.settings import DEFAULT_TOLERANCE

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Permutations of I
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticePermutation:
    """A permutation ``sigma`` of ``L`` that fixes every label outside ``I``."""

    lattice: Lattice
    support: Tuple[int, ...]
    mapping: Dict[int, int]

    def __call__(self, label: int) -> int:
        return self.mapping[label]

    @property
    def cycles(self) -> Tuple[Tuple[int, ...], ...]:
        """Cycle decomposition restricted to ``I`` (fixed points included)."""
        seen: set = set()
        cycles: List[Tuple[int, ...]] = []
        for start in self.support:
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            nxt = self.mapping[start]
            while nxt != start:
                cycle.append(nxt)
                seen.add(nxt)
                nxt = self.mapping[nxt]
            cycles.append(tuple(cycle))
        return tuple(cycles)

    def image(self, seq: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self.mapping[l] for l in seq)

    def inverse(self) -> "LatticePermutation":
        return LatticePermutation(self.lattice, self.support, {v: k for k, v in self.mapping.items()})

    def copy(self, iota: Mapping[int, int]) -> "LatticePermutation":
        """``sigma^iota = iota ∘ sigma ∘ iota^-1`` on ``iota(I)``, identity elsewhere."""
        moved = {iota[l]: iota[self.mapping[l]] for l in self.support}
        return LatticePermutation.from_mapping(self.lattice, moved.keys(), moved)

    @classmethod
    def from_mapping(cls, lattice: Lattice, support: Iterable[int], mapping: Mapping[int, int]) -> "LatticePermutation":
        """Validate that *mapping* permutes ``I`` and extend it by the identity.

        Raises
        ------
        ValueError
            *mapping* is not a bijection of ``I`` onto itself.
        """
        labels = lattice.check_subset(support)
        moved = {int(k): int(v) for k, v in dict(mapping).items()}
        if set(moved) - set(labels):
            raise ValueError(f"sigma moves labels outside I={list(labels)}: {sorted(set(moved) - set(labels))}")
        full = {l: l for l in lattice.labels}
        full.update(moved)
        image = sorted(full[l] for l in labels)
        if image != sorted(labels):
            raise ValueError(f"sigma is not a permutation of I={list(labels)}: {moved}")
        return cls(lattice, labels, full)


def make_permutation(lattice: Lattice, support: Iterable[int], cycles: Sequence[Sequence[int]]) -> LatticePermutation:
    """Build ``sigma`` from disjoint cycles on ``I``, e.g. ``[(1, 2, 3)]``."""
    labels = lattice.check_subset(support)
    mapping: Dict[int, int] = {}
    for cycle in cycles:
        cycle = [int(l) for l in cycle]
        if len(set(cycle)) != len(cycle):
            raise ValueError(f"Cycle {cycle} repeats a label")
        for label in cycle:
            if label not in labels:
                raise ValueError(f"Cycle label {label} is not in I={list(labels)}")
            if label in mapping:
                raise ValueError(f"Label {label} appears in more than one cycle position")
        for k, label in enumerate(cycle):
            mapping[label] = cycle[(k + 1) % len(cycle)]
    return LatticePermutation.from_mapping(lattice, labels, mapping)


def permutation_unitary(space: FockSpace, sigma: LatticePermutation) -> sp.csr_matrix:
    """``U f_(l_1..l_n) = f_(sigma(l_1)..sigma(l_n))`` on the whole Fock space."""
    lattice = space.lattice
    rows, signs = [], []
    for mask in range(space.dimension):
        signed = sequence_sign(lattice, sigma.image(lattice.labels_of(mask)))
        rows.append(lattice.mask(signed.entries))
        signs.append(signed.sign)
    shape = (space.dimension, space.dimension)
    return sp.csr_matrix((np.array(signs, dtype=complex), (rows, np.arange(space.dimension))), shape=shape)


# ---------------------------------------------------------------------------
# Permutations of the basis of H_I
# ---------------------------------------------------------------------------

def basis_permutation_unitary(algebra: CARAlgebra, cycles: Sequence[Sequence[Sequence[int]]]) -> np.ndarray:
    """Permutation matrix on ``H_I`` moving ``f_M`` along each cycle of subsets.

    Raises
    ------
    ValueError
        A basis state occurs twice, or a subset is not contained in ``I``.
    """
    d = algebra.local_dimension
    target = list(range(d))
    seen: set = set()
    for cycle in cycles:
        members = [algebra.local_index(subset) for subset in cycle]
        for local, subset in zip(members, cycle):
            if local in seen:
                raise ValueError(f"Basis state f_{list(subset)} is listed more than once")
            seen.add(local)
        for k, local in enumerate(members):
            target[local] = members[(k + 1) % len(members)]
    unitary = np.zeros((d, d), dtype=complex)
    unitary[target, list(range(d))] = 1.0
    return unitary


def basis_cycle_unitary(algebra: CARAlgebra, cycle: Sequence[Sequence[int]]) -> np.ndarray:
    """Single basis cycle, e.g. ``[(), (1,), (1, 2), (2,)]`` for the 4-cycle on ``|I| = 2``."""
    return basis_permutation_unitary(algebra, [cycle])


# ---------------------------------------------------------------------------
# Mixtures and their copies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixtureDynamics:
    unitary: AnyOperator
    weight: float
    as_map: LinearMap


def mix_map(algebra: CARAlgebra, unitary: AnyOperator, weight: float, *,
            tol: float = DEFAULT_TOLERANCE) -> MixtureDynamics:
    """``a -> lambda U* a U + (1 - lambda) U a U*`` on ``A(I)``.

    *unitary* is either a full Fock-space operator (which must map ``A(I)``
    onto itself) or a ``2^|I|``-dimensional matrix in the ``pi_I`` picture.

    Raises
    ------
    ValueError
        ``lambda`` outside ``[0, 1]``, *unitary* not unitary, of the wrong
        size, or not preserving ``A(I)``.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {weight}")
    if not is_unitary(unitary, tol=tol):
        raise ValueError("Mixture dynamics need a unitary operator")
    size = unitary.shape[0]
    if size == algebra.local_dimension:
        restricted = True
    elif size == algebra.space.dimension:
        restricted = False
    else:
        raise ValueError(f"Unitary of size {size} fits neither H_I ({algebra.local_dimension}) "
                         f"nor H ({algebra.space.dimension})")

    adjoint = unitary.conj().T

    def action(a: AnyOperator) -> AnyOperator:
        return weight * (adjoint @ a @ unitary) + (1.0 - weight) * (unitary @ a @ adjoint)

    try:
        tau = algebra.map_from_action(action, restricted=restricted)
    except ValueError as exc:
        raise ValueError(f"Unitary does not preserve A({list(algebra.support)}): {exc}") from None
    log.info("Mixture on A(%s) with lambda=%.6g (%s picture)",
             list(algebra.support), weight, "H_I" if restricted else "H")
    return MixtureDynamics(unitary, weight, tau)


def copy_map(tau: LinearMap, iota: Mapping[int, int]) -> LinearMap:
    """``tau^iota = eta ∘ tau ∘ eta^-1`` on ``A(iota(I))``."""
    return LatticeIsomorphism(tau.algebra, iota).conjugate(tau)


# ---------------------------------------------------------------------------
# Quantum Markov semigroups
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Semigroup:
    """``t -> exp(t L)`` for a generator ``L`` on ``A(I)``."""

    generator: LinearMap

    @classmethod
    def from_map(cls, tau: LinearMap) -> "Semigroup":
        """Generator ``L = tau - id``."""
        return cls(tau - tau.algebra.identity_map())

    @property
    def algebra(self) -> CARAlgebra:
        return self.generator.algebra

    def evolve(self, t: float) -> LinearMap:
        if t < 0:
            raise ValueError(f"Semigroup time must be non-negative, got {t}")
        return LinearMap(self.algebra, expm(t * self.generator.matrix))


def lindblad(algebra: CARAlgebra, unitary: AnyOperator, weight: float) -> Semigroup:
    """Semigroup generated by ``lambda U* a U + (1 - lambda) U a U* - a``."""
    return Semigroup.from_map(mix_map(algebra, unitary, weight).as_map)
