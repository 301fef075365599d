"""
FermiBalance – Diagonal, product and entangled fermionic states
================================================================
Probability tables on ``D_I``, the diagonal density matrices ``rho_I``, the
fermionic product state, the entangled vector

    Phi = sum_M p_M^(1/2) f_{M iota(M)}

and the state ``phi(a) = <Phi, a Phi>`` with its reduction checks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.car_algebra import AlgebraElement, CARAlgebra, LatticeIsomorphism, check_iota
from core.fock import AnyOperator, FockSpace, ket_bra
from core.settings import DEFAULT_TOLERANCE, PROBABILITY_TOLERANCE

log = logging.getLogger(__name__)

Operator = Union[AnyOperator, AlgebraElement]


# ---------------------------------------------------------------------------
# Probability tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbabilityTable:
    """``p_M`` for ``M`` in ``D_I``, stored in local bitmask order over ascending ``I``."""

    support: Tuple[int, ...]
    probs: Tuple[float, ...]

    @property
    def strict(self) -> bool:
        """All ``p_M > 0``; required for duality."""
        return all(p > 0.0 for p in self.probs)

    def subsets(self) -> List[Tuple[int, ...]]:
        return [tuple(l for j, l in enumerate(self.support) if local >> j & 1) for local in range(len(self.probs))]

    def items(self) -> List[Tuple[Tuple[int, ...], float]]:
        return list(zip(self.subsets(), self.probs))

    def local_index(self, subset: Iterable[int]) -> int:
        items = set(int(l) for l in subset)
        if not items <= set(self.support):
            raise ValueError(f"Subset {sorted(items)} is not contained in I={list(self.support)}")
        return sum(1 << j for j, l in enumerate(self.support) if l in items)

    def __getitem__(self, subset: Iterable[int]) -> float:
        return self.probs[self.local_index(subset)]

    def relabel(self, iota: Mapping[int, int]) -> "ProbabilityTable":
        """The same weights on ``iota(I)``: ``p_iota(M) = p_M``."""
        image = sorted(iota[l] for l in self.support)
        values = {tuple(iota[l] for l in subset): p for subset, p in self.items()}
        return make_probability_table(image, values)


def make_probability_table(
    support: Iterable[int],
    values: Union[Mapping[Tuple[int, ...], float], Sequence[float]],
    *,
    tol: float = PROBABILITY_TOLERANCE,
) -> ProbabilityTable:
    """Validate and normalise a probability table on ``D_I``.

    Parameters
    ----------
    support : iterable of int
        The subset ``I`` (any order; stored ascending).
    values : mapping or sequence
        Either ``{subset: p}`` (missing subsets get 0) or a sequence of
        ``2^|I|`` numbers in local bitmask order.
    tol : float
        Allowed deviation of the sum from 1; within it the table is rescaled.

    Raises
    ------
    ValueError
        Negative entries, unknown subsets, wrong length or a bad sum.
    """
    labels = tuple(sorted(int(l) for l in support))
    if len(set(labels)) != len(labels):
        raise ValueError(f"Support contains repeated labels: {list(labels)}")
    size = 1 << len(labels)
    probs = [0.0] * size
    if isinstance(values, Mapping):
        draft = ProbabilityTable(labels, tuple(probs))
        for subset, p in values.items():
            subset = tuple(subset)
            if len(set(subset)) != len(subset):
                raise ValueError(f"Subset {list(subset)} repeats a label")
            probs[draft.local_index(subset)] += float(p)
    else:
        if len(values) != size:
            raise ValueError(f"Expected {size} probabilities for |I|={len(labels)}, got {len(values)}")
        probs = [float(p) for p in values]

    negative = [p for p in probs if p < 0.0]
    if negative:
        raise ValueError(f"Probabilities must be non-negative, got {negative}")
    total = sum(probs)
    if abs(total - 1.0) > tol:
        raise ValueError(f"Probabilities must sum to 1, got {total!r}")
    return ProbabilityTable(labels, tuple(p / total for p in probs))


def uniform_table(support: Iterable[int]) -> ProbabilityTable:
    labels = sorted(support)
    size = 1 << len(labels)
    return make_probability_table(labels, [1.0 / size] * size)


def length_table(support: Iterable[int], weight: Callable[[int], float]) -> ProbabilityTable:
    """``p_M`` proportional to ``weight(|M|)``; equal on equal lengths."""
    labels = sorted(support)
    raw = [float(weight(bin(local).count("1"))) for local in range(1 << len(labels))]
    total = sum(raw)
    return make_probability_table(labels, [w / total for w in raw], tol=1e-9)


def random_table(support: Iterable[int], rng: np.random.Generator, *, strict: bool = True) -> ProbabilityTable:
    """Dirichlet-distributed table; with ``strict=False`` some entries are zeroed."""
    labels = sorted(support)
    size = 1 << len(labels)
    probs = rng.dirichlet(np.ones(size))
    if not strict and size > 1:
        probs[rng.choice(size, size=size // 2, replace=False)] = 0.0
        if probs.sum() == 0.0:
            probs[0] = 1.0
        probs = probs / probs.sum()
    return make_probability_table(labels, list(probs), tol=1e-9)


# ---------------------------------------------------------------------------
# Density operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityOperator:
    operator: sp.csr_matrix
    support: Tuple[int, ...]

    def trace(self) -> float:
        return float(self.operator.diagonal().sum().real)

    def expectation(self, op: Operator) -> complex:
        return complex((self.operator @ _as_matrix(op)).diagonal().sum())

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue, read off the diagonal when the operator is diagonal."""
        diagonal = self.operator.diagonal()
        if self.operator.count_nonzero() == np.count_nonzero(diagonal):
            return float(diagonal.real.min())
        return float(np.linalg.eigvalsh(self.operator.toarray()).min())


def _as_matrix(op: Operator) -> AnyOperator:
    if isinstance(op, AlgebraElement):
        return op.operator
    return op if sp.issparse(op) else np.asarray(op)


def diagonal_density(space: FockSpace, table: ProbabilityTable) -> DensityOperator:
    """``rho_I = sum_M p_M f_M ⋈ f_M``."""
    rho = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for subset, p in table.items():
        f = space.basis_vector(subset)
        rho = rho + p * ket_bra(f, f)
    return DensityOperator(rho, table.support)


def product_state(space: FockSpace, p: ProbabilityTable, q: ProbabilityTable) -> DensityOperator:
    """``rho = sum_{M,N} p_M q_N f_MN ⋈ f_MN`` for disjoint supports."""
    overlap = set(p.support) & set(q.support)
    if overlap:
        raise ValueError(f"Product state needs disjoint supports; both contain {sorted(overlap)}")
    rho = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for m, pm in p.items():
        for n, qn in q.items():
            f = space.f_vector(m + n)
            rho = rho + pm * qn * ket_bra(f, f)
    return DensityOperator(rho, tuple(sorted(p.support + q.support)))


# ---------------------------------------------------------------------------
# Entangled state
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeConfig:
    """``I``, the bijection ``iota: I -> J`` and the table ``p_M`` on ``D_I``."""

    space: FockSpace
    support: Tuple[int, ...]
    iota: Dict[int, int]
    probs: ProbabilityTable

    @property
    def copy_support(self) -> Tuple[int, ...]:
        return tuple(sorted(self.iota[l] for l in self.support))

    @cached_property
    def algebra(self) -> CARAlgebra:
        return self.space.algebra(self.support)

    @cached_property
    def eta(self) -> LatticeIsomorphism:
        return LatticeIsomorphism(self.algebra, self.iota)

    @property
    def copy_algebra(self) -> CARAlgebra:
        return self.eta.target

    @cached_property
    def copy_probs(self) -> ProbabilityTable:
        return self.probs.relabel(self.iota)


def make_config(
    space: FockSpace,
    support: Iterable[int],
    iota: Mapping[int, int],
    probs: ProbabilityTable,
) -> LatticeConfig:
    """Validate ``I``, ``iota`` and the table against each other."""
    labels = space.lattice.check_subset(support)
    mapping = check_iota(space.lattice, iota)
    if set(mapping) != set(labels):
        raise ValueError(f"iota must be defined exactly on I={list(labels)}, got keys {sorted(mapping)}")
    if tuple(sorted(probs.support)) != tuple(sorted(labels)):
        raise ValueError(f"Probability table lives on {list(probs.support)}, expected I={list(labels)}")
    return LatticeConfig(space, labels, mapping, probs)


@dataclass(frozen=True, eq=False)
class EntangledState:
    vector: np.ndarray
    config: LatticeConfig

    @property
    def space(self) -> FockSpace:
        return self.config.space

    def phi(self, op: Operator) -> complex:
        return phi(self, op)


def entangled_vector(config: LatticeConfig) -> EntangledState:
    """``Phi = sum_M p_M^(1/2) f_{M iota(M)}`` with concatenation signs."""
    space = config.space
    vec = np.zeros(space.dimension, dtype=complex)
    for subset, p in config.probs.items():
        if p > 0.0:
            vec += np.sqrt(p) * space.f_vector(subset + tuple(config.iota[l] for l in subset))
    log.info("Entangled state on I=%s, iota(I)=%s (norm %.15f)",
             list(config.support), list(config.copy_support), np.linalg.norm(vec))
    return EntangledState(vec, config)


def phi(state: EntangledState, op: Operator) -> complex:
    """``<Phi, a Phi>``."""
    return complex(np.vdot(state.vector, _as_matrix(op) @ state.vector))


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionReport:
    deviation_source: float
    deviation_copy: float

    @property
    def max_deviation(self) -> float:
        return max(self.deviation_source, self.deviation_copy)


def _reduction_gap(expect_a: Callable[[np.ndarray], complex], expect_b: Callable[[np.ndarray], complex],
                   algebra: CARAlgebra) -> float:
    return max(abs(expect_a(m.operator) - expect_b(m.operator)) for m in algebra.monomials)


def reduction_report(state: EntangledState) -> ReductionReport:
    """Compare ``phi`` with ``rho_I`` on ``A(I)`` and with ``rho_iota(I)`` on ``A(iota(I))``."""
    config = state.config
    rho_source = diagonal_density(config.space, config.probs)
    rho_copy = diagonal_density(config.space, config.copy_probs)
    report = ReductionReport(
        deviation_source=_reduction_gap(state.phi, rho_source.expectation, config.algebra),
        deviation_copy=_reduction_gap(state.phi, rho_copy.expectation, config.copy_algebra),
    )
    log.info("Reduction deviation: %.3e", report.max_deviation)
    return report


def product_reduction_report(space: FockSpace, p: ProbabilityTable, q: ProbabilityTable) -> ReductionReport:
    """Compare the product state with ``rho_I`` on ``A(I)`` and ``rho_J`` on ``A(J)``."""
    rho = product_state(space, p, q)
    return ReductionReport(
        deviation_source=_reduction_gap(rho.expectation, diagonal_density(space, p).expectation, space.algebra(p.support)),
        deviation_copy=_reduction_gap(rho.expectation, diagonal_density(space, q).expectation, space.algebra(q.support)),
    )


def reduced_density(state: EntangledState, *, side: str = "source") -> np.ndarray:
    """The density matrix on ``H_I`` (or ``H_iota(I)``) that reproduces ``phi``.

    Each matrix unit ``E_jk`` of ``pi_I`` is pulled back to ``A(I)``; the
    reduced matrix is ``sigma_kj = phi(E_jk)``.
    """
    if side not in ("source", "copy"):
        raise ValueError(f"side must be 'source' or 'copy', got {side!r}")
    algebra = state.config.algebra if side == "source" else state.config.copy_algebra
    d = algebra.local_dimension
    sigma = np.zeros((d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[j, k] = 1.0
            sigma[k, j] = state.phi(algebra.expand_restricted(unit))
    return sigma


@dataclass(frozen=True)
class EntanglementCertificate:
    vector_norm: float
    reduced_rank: int
    reduced_purity: float

    @property
    def entangled(self) -> bool:
        return abs(self.vector_norm - 1.0) < DEFAULT_TOLERANCE and self.reduced_rank >= 2


def entanglement_certificate(state: EntangledState, *, tol: float = DEFAULT_TOLERANCE) -> EntanglementCertificate:
    """``Phi`` is a unit vector; a reduced state of rank >= 2 certifies entanglement."""
    sigma = reduced_density(state)
    eigenvalues = np.linalg.eigvalsh(sigma)
    return EntanglementCertificate(
        vector_norm=float(np.linalg.norm(state.vector)),
        reduced_rank=int(np.sum(eigenvalues > tol)),
        reduced_purity=float(np.trace(sigma @ sigma).real),
    )


def pairing_matrix(state: EntangledState) -> np.ndarray:
    """``G_ij = phi(m_i n_j)`` over the monomials of ``A(I)`` and ``A(iota(I))``."""
    config = state.config
    left = np.stack([m.operator.conj().T @ state.vector for m in config.algebra.monomials])
    right = np.stack([n.operator @ state.vector for n in config.copy_algebra.monomials])
    return left.conj() @ right.T
