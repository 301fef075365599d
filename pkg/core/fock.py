"""
FermiBalance – Fermi-Fock space on a finite lattice
====================================================
Builds the antisymmetric Fock space directly on an occupation basis.

Basis states are bitmasks over the ascending label order, so ``f_M`` for an
ascending sequence ``M`` is the basis vector with index ``mask(M)``. The signs
of the creation / annihilation rules come from counting occupied labels below
the one being inserted or removed (Jordan–Wigner parity count), which is the
same as sorting ``(l, l_1, ..., l_n)`` into ascending order.

Operators on the full space are ``scipy.sparse`` CSR matrices: a single
mode operator has at most ``2^(|L|-1)`` non-zero entries, while the dense
``2^|L| x 2^|L|`` array stops fitting in memory long before the lattice cap.
Blocks on a subspace ``H_I`` are small and come back dense.
"""

from __future__ import annotations

import logging
import operator
from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import combinations
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from core.settings import CAR_TOLERANCE, DEFAULT_TOLERANCE, MAX_LATTICE_SIZE

if TYPE_CHECKING:
    from core.car_algebra import CARAlgebra

log = logging.getLogger(__name__)

AnyOperator = Union[np.ndarray, sp.spmatrix]


# ---------------------------------------------------------------------------
# Lattice and basis labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """The finite label set ``L`` in canonical (ascending) order."""

    labels: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dimension(self) -> int:
        return 1 << self.size

    @cached_property
    def _positions(self) -> Dict[int, int]:
        return {label: pos for pos, label in enumerate(self.labels)}

    def __contains__(self, label: object) -> bool:
        return label in self._positions

    def position(self, label: int) -> int:
        """Bit position of *label* in the occupation mask."""
        try:
            return self._positions[label]
        except KeyError:
            raise ValueError(f"Label {label!r} is not in the lattice {list(self.labels)}") from None

    def check_subset(self, labels: Iterable[int]) -> Tuple[int, ...]:
        """Validate a subset of ``L`` and return it in ascending order."""
        items = [int(l) for l in labels]
        for label in items:
            self.position(label)
        if len(set(items)) != len(items):
            raise ValueError(f"Subset contains repeated labels: {items}")
        return tuple(sorted(items, key=self.position))

    def mask(self, labels: Iterable[int]) -> int:
        result = 0
        for label in labels:
            result |= 1 << self.position(label)
        return result

    def labels_of(self, mask: int) -> Tuple[int, ...]:
        """Ascending labels occupied in *mask*."""
        return tuple(label for pos, label in enumerate(self.labels) if mask >> pos & 1)

    def basis_state(self, labels: Iterable[int]) -> "BasisState":
        subset = self.check_subset(labels)
        return BasisState(occupation=self.mask(subset), labels=subset)


@dataclass(frozen=True)
class BasisState:
    """A canonical occupation ``f_M``; ``index`` is the bitmask itself."""

    occupation: int
    labels: Tuple[int, ...]

    @property
    def index(self) -> int:
        return self.occupation

    @property
    def length(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class SignedSequence:
    """A label sequence together with the sign it picks up under antisymmetrisation."""

    entries: Tuple[int, ...]
    sign: int


def make_lattice(labels: Sequence[int], *, max_size: int = MAX_LATTICE_SIZE) -> Lattice:
    """Validate *labels* and return the lattice in ascending order.

    Raises
    ------
    ValueError
        Empty label list, repeated labels or more than *max_size* labels.
    """
    items = [int(l) for l in labels]
    if not items:
        raise ValueError("Lattice must contain at least one label")
    if len(set(items)) != len(items):
        repeated = sorted({l for l in items if items.count(l) > 1})
        raise ValueError(f"Duplicate lattice labels: {repeated}")
    if len(items) > max_size:
        raise ValueError(f"Lattice of size {len(items)} exceeds the cap of {max_size} labels")
    lattice = Lattice(tuple(sorted(items)))
    log.info("Lattice %s (dimension %d)", list(lattice.labels), lattice.dimension)
    return lattice


def sequence_sign(lattice: Lattice, seq: Sequence[int]) -> SignedSequence:
    """Sign of the permutation sorting *seq* ascending; 0 on a repeated label."""
    entries = tuple(int(l) for l in seq)
    positions = [lattice.position(l) for l in entries]
    if len(set(positions)) != len(positions):
        return SignedSequence(entries, 0)
    inversions = sum(1 for i, j in combinations(range(len(positions)), 2) if positions[i] > positions[j])
    return SignedSequence(entries, -1 if inversions % 2 else 1)


# ---------------------------------------------------------------------------
# Jordan–Wigner action primitives
# ---------------------------------------------------------------------------

def _parity_below(mask: int, position: int) -> int:
    return -1 if (mask & ((1 << position) - 1)).bit_count() % 2 else 1


def create(mask: int, position: int) -> Tuple[int, int]:
    """Apply ``a*_l`` to the basis state *mask*; returns ``(sign, new_mask)``.

    ``sign`` is 0 when the mode is already occupied.
    """
    if mask >> position & 1:
        return 0, mask
    return _parity_below(mask, position), mask | (1 << position)


def annihilate(mask: int, position: int) -> Tuple[int, int]:
    """Apply ``a_l`` to the basis state *mask*; returns ``(sign, new_mask)``."""
    if not mask >> position & 1:
        return 0, mask
    return _parity_below(mask, position), mask & ~(1 << position)


# ---------------------------------------------------------------------------
# Small operator helpers
# ---------------------------------------------------------------------------

def ket_bra(x: np.ndarray, y: np.ndarray) -> sp.csr_matrix:
    """The rank-one operator ``z -> x <y, z>``."""
    column = sp.csr_matrix(np.asarray(x, dtype=complex).reshape(-1, 1))
    row = sp.csr_matrix(np.conj(np.asarray(y, dtype=complex)).reshape(1, -1))
    return sp.csr_matrix(column @ row)


def operator_norm_bound(op: AnyOperator) -> float:
    """Spectral norm of a dense *op*; Frobenius norm (an upper bound) of a sparse one."""
    if sp.issparse(op):
        return float(spla.norm(op))
    return float(np.linalg.norm(op, 2))


def is_unitary(op: AnyOperator, *, tol: float = DEFAULT_TOLERANCE) -> bool:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    if sp.issparse(op):
        defect = op.conj().T @ op - sp.identity(op.shape[0], dtype=complex, format="csr")
    else:
        defect = op.conj().T @ op - np.eye(op.shape[0])
    return operator_norm_bound(defect) < tol


# ---------------------------------------------------------------------------
# The Fock space
# ---------------------------------------------------------------------------

class FockSpace:
    """Sparse operators and dense vectors on the ``2^|L|``-dimensional Fock space.

    Single-mode operators are cached; copy before mutating.
    """

    def __init__(self, lattice: Lattice) -> None:
        self.lattice = lattice
        self._creation: Dict[int, sp.csr_matrix] = {}
        self._annihilation: Dict[int, sp.csr_matrix] = {}
        self._algebras: Dict[Tuple[int, ...], CARAlgebra] = {}

    def __repr__(self) -> str:
        return f"<FockSpace labels={list(self.lattice.labels)} dim={self.dimension}>"

    @property
    def dimension(self) -> int:
        return self.lattice.dimension

    # ── vectors ──────────────────────────────────────────────────────

    def vacuum(self) -> np.ndarray:
        return self.basis_vector(())

    def basis_vector(self, labels: Iterable[int]) -> np.ndarray:
        """Canonical ``f_M`` for the subset *labels*."""
        vec = np.zeros(self.dimension, dtype=complex)
        vec[self.lattice.mask(self.lattice.check_subset(labels))] = 1.0
        return vec

    def f_vector(self, seq: Sequence[int]) -> np.ndarray:
        """``f_(l_1,...,l_n)``: the canonical vector times the sequence sign."""
        signed = sequence_sign(self.lattice, seq)
        vec = np.zeros(self.dimension, dtype=complex)
        if signed.sign:
            vec[self.lattice.mask(signed.entries)] = signed.sign
        return vec

    # ── operators ────────────────────────────────────────────────────

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dimension, dtype=complex, format="csr")

    def creation(self, label: int) -> sp.csr_matrix:
        if label not in self._creation:
            self._creation[label] = self._single_mode(label, create)
        return self._creation[label]

    def annihilation(self, label: int) -> sp.csr_matrix:
        if label not in self._annihilation:
            self._annihilation[label] = self._single_mode(label, annihilate)
        return self._annihilation[label]

    def _single_mode(self, label: int, action: Callable[[int, int], Tuple[int, int]]) -> sp.csr_matrix:
        pos = self.lattice.position(label)
        rows: List[int] = []
        cols: List[int] = []
        data: List[float] = []
        for mask in range(self.dimension):
            sign, target = action(mask, pos)
            if sign:
                rows.append(target)
                cols.append(mask)
                data.append(sign)
        shape = (self.dimension, self.dimension)
        return sp.csr_matrix((np.array(data, dtype=complex), (rows, cols)), shape=shape)

    def number_operator(self, label: int) -> sp.csr_matrix:
        return self.creation(label) @ self.annihilation(label)

    def product(self, factors: Sequence[AnyOperator]) -> sp.csr_matrix:
        return sp.csr_matrix(reduce(operator.matmul, factors, self.identity()))

    def parity_operator(self) -> sp.csr_matrix:
        """``theta``: +1 on even occupations, -1 on odd ones."""
        signs = [1.0 if mask.bit_count() % 2 == 0 else -1.0 for mask in range(self.dimension)]
        return sp.diags(np.array(signs, dtype=complex), format="csr")

    def car_deviation(self) -> float:
        """Largest defect of the anticommutation relations.

        Measured in the Frobenius norm, which bounds the operator norm, so a
        deviation below tolerance certifies the relations.
        """
        eye = self.identity()
        worst = 0.0
        for k in self.lattice.labels:
            ak = self.annihilation(k)
            for l in self.lattice.labels:
                al = self.annihilation(l)
                al_dag = self.creation(l)
                worst = max(
                    worst,
                    operator_norm_bound(ak @ al + al @ ak),
                    operator_norm_bound(ak @ al_dag + al_dag @ ak - float(k == l) * eye),
                )
        log.debug("CAR deviation on %s: %.3e", list(self.lattice.labels), worst)
        if worst > CAR_TOLERANCE:
            log.warning("CAR self-test deviation %.3e exceeds %.1e", worst, CAR_TOLERANCE)
        return float(worst)

    # ── subspaces ────────────────────────────────────────────────────

    def subspace_indices(self, subset: Iterable[int]) -> np.ndarray:
        """Full-space indices of ``f_M``, ``M ⊆ I``, in local bitmask order."""
        labels = self.lattice.check_subset(subset)
        positions = [self.lattice.position(l) for l in labels]
        indices: List[int] = []
        for local in range(1 << len(positions)):
            indices.append(sum(1 << p for j, p in enumerate(positions) if local >> j & 1))
        return np.array(indices, dtype=int)

    def restrict(self, op: AnyOperator, subset: Iterable[int], *, tol: float = DEFAULT_TOLERANCE) -> np.ndarray:
        """``pi_I(op)``: the dense block of *op* (sparse or dense) on ``H_I``.

        Raises
        ------
        ValueError
            *op* maps part of ``H_I`` outside ``H_I``.
        """
        subset = list(subset)
        idx = self.subspace_indices(subset)
        columns = sp.csr_matrix(op)[:, idx]
        outside = np.setdiff1d(np.arange(self.dimension), idx)
        leak = float(spla.norm(columns[outside])) if outside.size else 0.0
        if leak > tol:
            raise ValueError(f"Operator does not leave H_I invariant for I={subset} (off-block mass {leak:.3e})")
        return columns[idx].toarray()

    def algebra(self, support: Iterable[int]) -> CARAlgebra:
        """The (cached) :class:`core.car_algebra.CARAlgebra` for ``A(I)``."""
        from core.car_algebra import CARAlgebra

        key = self.lattice.check_subset(support)
        if key not in self._algebras:
            self._algebras[key] = CARAlgebra(self, key)
        return self._algebras[key]
