"""
FermiBalance – Finite CAR algebras A(I)
========================================
Coordinates on ``A(I)`` in the monomial basis ``a*_N a_M`` (``N``, ``M``
ascending subsets of ``I``), linear maps acting on those coordinates, the
lattice relabelling ``eta`` and the parity automorphism ``Theta``.

Conventions
-----------
* ``a*_N = a*_{n_1} ... a*_{n_j}`` and ``a_M = a_{m_s} ... a_{m_1}``, so
  ``a_M`` is the adjoint of ``a*_M``.
* Monomial ``(N, M)`` sits at index ``local(N) * 2^|I| + local(M)`` where
  ``local`` is the bitmask over ascending ``I``; the unit is index 0.
* Coordinates are solved in the faithful representation ``pi_I`` on ``H_I``
  against a pseudo-inverse prepared once per algebra.
"""

from __future__ import annotations

import logging
import numbers
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from core.fock import AnyOperator, FockSpace, Lattice, sequence_sign
from core.settings import DEFAULT_TOLERANCE, EXPANSION_RESIDUAL

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Monomial:
    creators: Tuple[int, ...]
    annihilators: Tuple[int, ...]
    operator: sp.csr_matrix

    @property
    def degree(self) -> int:
        return len(self.creators) + len(self.annihilators)

    @property
    def label(self) -> str:
        """Readable form, e.g. ``a*_1 a_2 a_1``; the unit is ``1``."""
        parts = [f"a*_{l}" for l in self.creators] + [f"a_{l}" for l in reversed(self.annihilators)]
        return " ".join(parts) or "1"


def _subsets(labels: Sequence[int]) -> List[Tuple[int, ...]]:
    return [tuple(l for j, l in enumerate(labels) if local >> j & 1) for local in range(1 << len(labels))]


def monomial_basis(space: FockSpace, support: Iterable[int]) -> List[Monomial]:
    """All ``2^(2|I|)`` monomials ``a*_N a_M`` of ``A(I)`` as full-space operators."""
    labels = space.lattice.check_subset(support)
    subsets = _subsets(labels)
    monomials: List[Monomial] = []
    for creators in subsets:
        raising = space.product([space.creation(l) for l in creators])
        for annihilators in subsets:
            lowering = space.product([space.annihilation(l) for l in reversed(annihilators)])
            monomials.append(Monomial(creators, annihilators, sp.csr_matrix(raising @ lowering)))
    return monomials


# ---------------------------------------------------------------------------
# The algebra A(I)
# ---------------------------------------------------------------------------

class CARAlgebra:
    """``A(I)`` for a subset ``I`` of the lattice.

    Prefer :meth:`FockSpace.algebra`, which caches one instance per subset.
    """

    def __init__(self, space: FockSpace, support: Iterable[int]) -> None:
        self.space = space
        self.support: Tuple[int, ...] = space.lattice.check_subset(support)
        self.monomials = monomial_basis(space, self.support)
        self._restricted = np.stack([space.restrict(m.operator, self.support) for m in self.monomials])
        self._basis = self._restricted.reshape(len(self.monomials), -1).T
        self._coordinates = np.linalg.pinv(self._basis)
        self._index: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], int] = {
            (m.creators, m.annihilators): i for i, m in enumerate(self.monomials)
        }
        self.parity_signs = np.array([(-1.0) ** m.degree for m in self.monomials])
        log.info("Algebra A(%s): %d monomials on H_I of dimension %d",
                 list(self.support), self.dimension, self.local_dimension)

    def __repr__(self) -> str:
        return f"<CARAlgebra I={list(self.support)}>"

    @property
    def dimension(self) -> int:
        return len(self.monomials)

    @property
    def local_dimension(self) -> int:
        return 1 << len(self.support)

    @property
    def labels(self) -> List[str]:
        return [m.label for m in self.monomials]

    def index(self, creators: Iterable[int] = (), annihilators: Iterable[int] = ()) -> int:
        lattice = self.space.lattice
        key = (lattice.check_subset(creators), lattice.check_subset(annihilators))
        if key not in self._index:
            raise ValueError(f"No monomial a*_{list(key[0])} a_{list(key[1])} in A({list(self.support)})")
        return self._index[key]

    def local_index(self, subset: Iterable[int]) -> int:
        """Position of ``f_M`` in the ordered basis of ``H_I``."""
        labels = self.space.lattice.check_subset(subset)
        if not set(labels) <= set(self.support):
            raise ValueError(f"Subset {list(labels)} is not contained in I={list(self.support)}")
        return sum(1 << j for j, l in enumerate(self.support) if l in labels)

    # ── elements ─────────────────────────────────────────────────────

    def element(self, coefficients: Sequence[complex]) -> "AlgebraElement":
        coeffs = np.asarray(coefficients, dtype=complex)
        if coeffs.shape != (self.dimension,):
            raise ValueError(f"Expected {self.dimension} coefficients, got shape {coeffs.shape}")
        return AlgebraElement(self, coeffs)

    def monomial(self, creators: Iterable[int] = (), annihilators: Iterable[int] = ()) -> "AlgebraElement":
        coeffs = np.zeros(self.dimension, dtype=complex)
        coeffs[self.index(creators, annihilators)] = 1.0
        return AlgebraElement(self, coeffs)

    def unit(self) -> "AlgebraElement":
        return self.monomial()

    def generator(self, label: int, *, dagger: bool = False) -> "AlgebraElement":
        """``a_l`` (or ``a*_l`` with *dagger*) for ``l`` in ``I``."""
        if label not in self.support:
            raise ValueError(f"Label {label} is not in I={list(self.support)}")
        if dagger:
            return self.monomial(creators=(label,))
        return self.monomial(annihilators=(label,))

    def operator(self, coefficients: np.ndarray) -> sp.csr_matrix:
        """Full-space operator ``sum c_NM a*_N a_M`` (sparse)."""
        n = self.space.dimension
        total = sp.csr_matrix((n, n), dtype=complex)
        for c, m in zip(coefficients, self.monomials):
            if c != 0:
                total = total + complex(c) * m.operator
        return total

    def restricted(self, coefficients: np.ndarray) -> np.ndarray:
        """``pi_I`` of the element with these coordinates."""
        d = self.local_dimension
        return (self._basis @ coefficients).reshape(d, d)

    def expand_restricted(self, matrix: np.ndarray) -> "AlgebraElement":
        """The unique element whose ``pi_I`` image is *matrix*."""
        d = self.local_dimension
        if matrix.shape != (d, d):
            raise ValueError(f"Expected a {d}x{d} matrix on H_I, got shape {matrix.shape}")
        return AlgebraElement(self, self._coordinates @ np.asarray(matrix, dtype=complex).reshape(-1))

    def expand(self, op: AnyOperator, *, tol: float = EXPANSION_RESIDUAL) -> "AlgebraElement":
        """Coordinates of a full-space operator (sparse or dense) in the monomial basis.

        Raises
        ------
        ValueError
            *op* is not an element of ``A(I)`` (leaves ``H_I`` or has an
            expansion residual above *tol*).
        """
        n = self.space.dimension
        if op.shape != (n, n):
            raise ValueError(f"Expected a {n}x{n} operator, got shape {op.shape}")
        try:
            block = self.space.restrict(op, self.support, tol=tol)
        except ValueError:
            raise ValueError(f"Operator is not in A({list(self.support)}): it does not preserve H_I") from None
        coeffs = self._coordinates @ block.reshape(-1)
        residual = float(spla.norm(self.operator(coeffs) - sp.csr_matrix(op)))
        log.debug("Expansion in A(%s): residual %.3e", list(self.support), residual)
        if residual > tol:
            raise ValueError(f"Operator is not in A({list(self.support)}) (expansion residual {residual:.3e})")
        return AlgebraElement(self, coeffs)

    # ── maps ─────────────────────────────────────────────────────────

    def map_from_action(self, action: Callable[[AnyOperator], AnyOperator], *, restricted: bool = False) -> "LinearMap":
        """Tabulate an operator-level linear *action* on the monomial basis.

        With *restricted* the action receives and returns ``pi_I`` matrices,
        otherwise full-space operators (whose images must stay in ``A(I)``).
        """
        columns = []
        for i, m in enumerate(self.monomials):
            if restricted:
                image = self.expand_restricted(action(self._restricted[i]))
            else:
                image = self.expand(action(m.operator))
            columns.append(image.coefficients)
        return LinearMap(self, np.column_stack(columns))

    def map_from_superoperator(self, superop: np.ndarray) -> "LinearMap":
        """Inverse of :meth:`LinearMap.superoperator`."""
        n = self.dimension
        if superop.shape != (n, n):
            raise ValueError(f"Expected a {n}x{n} superoperator, got shape {superop.shape}")
        return LinearMap(self, self._coordinates @ superop @ self._basis)

    def identity_map(self) -> "LinearMap":
        return LinearMap(self, np.eye(self.dimension, dtype=complex))

    def parity_map(self) -> "LinearMap":
        """``Theta_I`` as a linear map."""
        return LinearMap(self, np.diag(self.parity_signs).astype(complex))


# ---------------------------------------------------------------------------
# Elements and maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraElement:
    algebra: CARAlgebra
    coefficients: np.ndarray

    @property
    def support(self) -> Tuple[int, ...]:
        return self.algebra.support

    @cached_property
    def operator(self) -> sp.csr_matrix:
        return self.algebra.operator(self.coefficients)

    @cached_property
    def restricted(self) -> np.ndarray:
        return self.algebra.restricted(self.coefficients)

    def coefficient(self, creators: Iterable[int] = (), annihilators: Iterable[int] = ()) -> complex:
        return complex(self.coefficients[self.algebra.index(creators, annihilators)])

    def _same_algebra(self, other: "AlgebraElement") -> None:
        if other.algebra is not self.algebra:
            raise ValueError(f"Elements live in different algebras: A({list(self.support)}) vs A({list(other.support)})")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same_algebra(other)
        return AlgebraElement(self.algebra, self.coefficients + other.coefficients)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._same_algebra(other)
        return AlgebraElement(self.algebra, self.coefficients - other.coefficients)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, -self.coefficients)

    def __mul__(self, scalar: object) -> "AlgebraElement":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return AlgebraElement(self.algebra, complex(scalar) * self.coefficients)

    __rmul__ = __mul__

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        """Algebra product, computed in ``pi_I``."""
        self._same_algebra(other)
        return self.algebra.expand_restricted(self.restricted @ other.restricted)

    def adjoint(self) -> "AlgebraElement":
        return self.algebra.expand_restricted(self.restricted.conj().T)

    def allclose(self, other: "AlgebraElement", *, tol: float = DEFAULT_TOLERANCE) -> bool:
        self._same_algebra(other)
        return bool(np.max(np.abs(self.coefficients - other.coefficients), initial=0.0) < tol)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map ``A(I) -> A(I)`` as a matrix on monomial coordinates.

    Column ``i`` holds the coordinates of the image of monomial ``i``.
    """

    algebra: CARAlgebra
    matrix: np.ndarray

    def __call__(self, element: AlgebraElement) -> AlgebraElement:
        if element.algebra is not self.algebra:
            raise ValueError(f"Map on A({list(self.algebra.support)}) applied to an element of A({list(element.support)})")
        return AlgebraElement(self.algebra, self.matrix @ element.coefficients)

    def _same_algebra(self, other: "LinearMap") -> None:
        if other.algebra is not self.algebra:
            raise ValueError("Maps act on different algebras")

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        """Composition ``self ∘ other``."""
        self._same_algebra(other)
        return LinearMap(self.algebra, self.matrix @ other.matrix)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        self._same_algebra(other)
        return LinearMap(self.algebra, self.matrix + other.matrix)

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        self._same_algebra(other)
        return LinearMap(self.algebra, self.matrix - other.matrix)

    def __mul__(self, scalar: object) -> "LinearMap":
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return LinearMap(self.algebra, complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def superoperator(self) -> np.ndarray:
        """The same map acting on row-major ``vec(pi_I(a))``."""
        return self.algebra._basis @ self.matrix @ self.algebra._coordinates

    def distance(self, other: "LinearMap") -> float:
        """Spectral-norm distance of the coordinate matrices."""
        self._same_algebra(other)
        return float(np.linalg.norm(self.matrix - other.matrix, 2))

    def is_unital(self, *, tol: float = DEFAULT_TOLERANCE) -> bool:
        unit = self.algebra.unit()
        return self(unit).allclose(unit, tol=tol)


# ---------------------------------------------------------------------------
# Parity
# ---------------------------------------------------------------------------

def theta_auto(element: AlgebraElement) -> AlgebraElement:
    """``Theta(a) = theta a theta``: monomial ``(N, M)`` scaled by ``(-1)^(|N|+|M|)``."""
    return AlgebraElement(element.algebra, element.algebra.parity_signs * element.coefficients)


def is_even(linear_map: LinearMap, *, tol: float = DEFAULT_TOLERANCE) -> Tuple[bool, float]:
    """Whether *linear_map* commutes with ``Theta``; returns ``(even, deviation)``."""
    theta = linear_map.algebra.parity_map()
    deviation = float(np.linalg.norm(linear_map.matrix @ theta.matrix - theta.matrix @ linear_map.matrix, 2))
    return deviation < tol, deviation


# ---------------------------------------------------------------------------
# Relabelling eta: A(I) -> A(iota(I))
# ---------------------------------------------------------------------------

def check_iota(lattice: Lattice, iota: Mapping[int, int]) -> Dict[int, int]:
    """Validate a bijection ``I -> J`` with ``I ∩ J = ∅`` inside the lattice."""
    mapping = {int(k): int(v) for k, v in dict(iota).items()}
    for label in (*mapping.keys(), *mapping.values()):
        lattice.position(label)
    if len(set(mapping.values())) != len(mapping):
        raise ValueError(f"iota is not injective: {mapping}")
    overlap = set(mapping) & set(mapping.values())
    if overlap:
        raise ValueError(f"I and iota(I) must be disjoint; they share {sorted(overlap)}")
    return mapping


class LatticeIsomorphism:
    """``eta`` with ``eta(a_l) = a_iota(l)``, implemented as coordinate transport.

    When ``iota`` does not preserve the label order, the reordered creator
    and annihilator strings contribute their permutation signs, so ``eta``
    stays multiplicative.
    """

    def __init__(self, source: CARAlgebra, iota: Mapping[int, int]) -> None:
        space = source.space
        self.iota = check_iota(space.lattice, iota)
        if set(self.iota) != set(source.support):
            raise ValueError(f"iota must be defined exactly on I={list(source.support)}, got keys {sorted(self.iota)}")
        self.source = source
        self.target: CARAlgebra = space.algebra(self.iota[l] for l in source.support)
        transport = np.zeros((source.dimension, source.dimension))
        for i, m in enumerate(source.monomials):
            creators = [self.iota[l] for l in m.creators]
            annihilators = [self.iota[l] for l in m.annihilators]
            sign = sequence_sign(space.lattice, creators).sign * sequence_sign(space.lattice, annihilators).sign
            transport[self.target.index(creators, annihilators), i] = sign
        self.matrix = transport

    def __call__(self, element: AlgebraElement) -> AlgebraElement:
        if element.algebra is not self.source:
            raise ValueError(f"eta is defined on A({list(self.source.support)})")
        return AlgebraElement(self.target, self.matrix @ element.coefficients)

    def inverse(self, element: AlgebraElement) -> AlgebraElement:
        if element.algebra is not self.target:
            raise ValueError(f"eta^-1 is defined on A({list(self.target.support)})")
        return AlgebraElement(self.source, self.matrix.T @ element.coefficients)

    def conjugate(self, linear_map: LinearMap) -> LinearMap:
        """``eta ∘ map ∘ eta^-1`` on ``A(iota(I))``."""
        if linear_map.algebra is not self.source:
            raise ValueError(f"Expected a map on A({list(self.source.support)})")
        return LinearMap(self.target, self.matrix @ linear_map.matrix @ self.matrix.T)


def eta_iso(element: AlgebraElement, iota: Mapping[int, int]) -> AlgebraElement:
    """Transport *element* from ``A(I)`` to ``A(iota(I))``."""
    return LatticeIsomorphism(element.algebra, iota)(element)
