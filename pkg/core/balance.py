"""
FermiBalance – Detailed balance certificates
=============================================
Two conditions are checked over spanning sets, which is enough because
both sides are bilinear:

* standard quantum detailed balance on ``M_d`` with the transposition as
  reversing operation, ``omega(a ⊗ tau(b)) = omega(tau(a) ⊗ b)``, over
  matrix units;
* fermionic standard quantum detailed balance on ``A(I)``,
  ``phi(a tau^iota(b)) = phi(tau(a) b)``, over the monomial bases of
  ``A(I)`` and ``A(iota(I))``.

Both reduce to matrix identities against a pairing table ``G``:
``lhs = T^T G`` and ``rhs = G T'``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.car_algebra import LinearMap
from core.dynamics import LatticePermutation, Semigroup
from core.settings import DEFAULT_TOLERANCE
from core.states import EntangledState, ProbabilityTable, pairing_matrix

log = logging.getLogger(__name__)

Weights = Union[ProbabilityTable, Sequence[float]]


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BalanceReport:
    """Both sides of a balance condition over every spanning pair.

    ``lhs[i, j]`` is the side with the dynamics on the first argument
    (``phi(tau(a_i) b_j)`` or ``omega(tau(a_i) ⊗ b_j)``), ``rhs[i, j]`` the
    side with the (copied) dynamics on the second argument.
    """

    lhs: np.ndarray
    rhs: np.ndarray
    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    tolerance: float = DEFAULT_TOLERANCE

    @cached_property
    def per_pair(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)

    @property
    def max_violation(self) -> float:
        return float(self.per_pair.max())

    @property
    def argmax_pair(self) -> Tuple[str, str]:
        i, j = np.unravel_index(int(np.argmax(self.per_pair)), self.per_pair.shape)
        return self.row_labels[i], self.col_labels[j]

    @property
    def verdict(self) -> bool:
        return self.max_violation < self.tolerance

    def pair(self, row: str, col: str) -> Tuple[complex, complex]:
        """``(lhs, rhs)`` for the spanning pair with these labels."""
        try:
            i, j = self.row_labels.index(row), self.col_labels.index(col)
        except ValueError:
            raise ValueError(f"No spanning pair ({row!r}, {col!r}) in this report") from None
        return complex(self.lhs[i, j]), complex(self.rhs[i, j])


# ---------------------------------------------------------------------------
# Fermionic standard quantum detailed balance
# ---------------------------------------------------------------------------

def fermionic_sqdb(
    tau: LinearMap,
    state: EntangledState,
    *,
    copy: Optional[LinearMap] = None,
    tol: float = DEFAULT_TOLERANCE,
) -> BalanceReport:
    """Evaluate ``phi(tau(a) b)`` against ``phi(a tau^iota(b))``.

    Parameters
    ----------
    tau : LinearMap
        Dynamics on ``A(I)``.
    state : EntangledState
        Supplies ``phi`` and ``iota``.
    copy : LinearMap, optional
        A ready-made map on ``A(iota(I))`` to use instead of ``eta ∘ tau ∘ eta^-1``.

    Raises
    ------
    ValueError
        *tau* (or *copy*) acts on the wrong algebra.
    """
    config = state.config
    if tau.algebra.space is not config.space or tau.algebra.support != config.support:
        raise ValueError(f"Dynamics act on A({list(tau.algebra.support)}) but the state is built on "
                         f"I={list(config.support)}")
    tau = LinearMap(config.algebra, tau.matrix)
    if copy is None:
        copy = config.eta.conjugate(tau)
    elif copy.algebra.support != config.copy_support:
        raise ValueError(f"Copied dynamics act on A({list(copy.algebra.support)}), expected "
                         f"A({list(config.copy_support)})")

    gram = pairing_matrix(state)
    report = BalanceReport(
        lhs=tau.matrix.T @ gram,
        rhs=gram @ copy.matrix,
        row_labels=tuple(config.algebra.labels),
        col_labels=tuple(config.copy_algebra.labels),
        tolerance=tol,
    )
    log.info("Fermionic SQDB on A(%s): max violation %.3e at %s -> %s",
             list(config.support), report.max_violation, report.argmax_pair,
             "holds" if report.verdict else "fails")
    return report


def fermionic_sqdb_continuous(
    semigroup: Semigroup,
    state: EntangledState,
    t_grid: Sequence[float],
    *,
    tol: float = DEFAULT_TOLERANCE,
) -> List[BalanceReport]:
    """:func:`fermionic_sqdb` for ``exp(t L)`` at every ``t`` in *t_grid*."""
    for t in t_grid:
        if t < 0:
            raise ValueError(f"Time grid must be non-negative, got {t}")
    return [fermionic_sqdb(semigroup.evolve(t), state, tol=tol) for t in t_grid]


# ---------------------------------------------------------------------------
# Standard quantum detailed balance on M_d
# ---------------------------------------------------------------------------

def _weights(probs: Weights) -> np.ndarray:
    values = probs.probs if isinstance(probs, ProbabilityTable) else probs
    return np.asarray(values, dtype=float)


def _basis_names(probs: Weights) -> List[str]:
    if isinstance(probs, ProbabilityTable):
        return ["(" + ",".join(str(l) for l in subset) + ")" for subset in probs.subsets()]
    return [str(j) for j in range(len(probs))]


def omega_vector(probs: Weights) -> np.ndarray:
    """``Omega = sum_j p_j^(1/2) d_j ⊗ d_j``."""
    weights = _weights(probs)
    d = len(weights)
    vec = np.zeros(d * d, dtype=complex)
    for j, p in enumerate(weights):
        vec[j * d + j] = np.sqrt(p)
    return vec


def omega(probs: Weights, x: np.ndarray, y: np.ndarray) -> complex:
    """``omega(x ⊗ y) = <Omega, (x ⊗ y) Omega>``."""
    vec = omega_vector(probs)
    return complex(np.vdot(vec, np.kron(x, y) @ vec))


def standard_sqdb(superop: np.ndarray, probs: Weights, *, tol: float = DEFAULT_TOLERANCE) -> BalanceReport:
    """Evaluate ``omega(tau(a) ⊗ b)`` against ``omega(a ⊗ tau(b))`` over matrix units.

    *superop* acts on row-major ``vec`` of ``d x d`` matrices in the basis
    ordered like *probs* (``D_I`` order for a :class:`ProbabilityTable`).
    """
    weights = _weights(probs)
    d = len(weights)
    if superop.shape != (d * d, d * d):
        raise ValueError(f"Superoperator of shape {superop.shape} does not act on M_{d}")
    # omega(E_jk ⊗ E_lm) vanishes unless (j, k) == (l, m)
    gram = np.diag(np.sqrt(np.outer(weights, weights)).reshape(-1))
    names = _basis_names(probs)
    units = tuple(f"|{names[j]}><{names[k]}|" for j in range(d) for k in range(d))
    report = BalanceReport(
        lhs=superop.T @ gram,
        rhs=gram @ superop,
        row_labels=units,
        col_labels=units,
        tolerance=tol,
    )
    log.info("Standard SQDB on M_%d: max violation %.3e -> %s",
             d, report.max_violation, "holds" if report.verdict else "fails")
    return report


def standard_sqdb_continuous(
    semigroup: Semigroup,
    probs: Weights,
    t_grid: Sequence[float],
    *,
    tol: float = DEFAULT_TOLERANCE,
) -> List[BalanceReport]:
    for t in t_grid:
        if t < 0:
            raise ValueError(f"Time grid must be non-negative, got {t}")
    return [standard_sqdb(semigroup.evolve(t).superoperator(), probs, tol=tol) for t in t_grid]


# ---------------------------------------------------------------------------
# Probability symmetry conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    inv: bool
    inv2: bool
    inv_prime: bool


def prob_symmetry(table: ProbabilityTable, sigma: LatticePermutation, *,
                  tol: float = DEFAULT_TOLERANCE) -> SymmetryReport:
    """Check the three invariance conditions on canonical subsets.

    * ``inv``: ``p`` of the subset ``sigma^-1(M)`` equals ``p_M``;
    * ``inv_prime``: ``p`` of the subset ``sigma(M)`` equals ``p_M``;
    * ``inv2``: ``p_M`` depends on ``|M|`` only.
    """
    if set(sigma.support) != set(table.support):
        raise ValueError(f"sigma permutes {list(sigma.support)} but the table lives on {list(table.support)}")
    inverse = sigma.inverse()
    items = table.items()
    inv = all(abs(table[inverse.image(m)] - p) < tol for m, p in items)
    inv_prime = all(abs(table[sigma.image(m)] - p) < tol for m, p in items)
    by_length: dict = {}
    for m, p in items:
        by_length.setdefault(len(m), []).append(p)
    inv2 = all(max(ps) - min(ps) < tol for ps in by_length.values())
    return SymmetryReport(inv=inv, inv2=inv2, inv_prime=inv_prime)


def permuted_entangled_vector(state: EntangledState, sigma: LatticePermutation) -> np.ndarray:
    """``Phi_1 = sum_M p_M^(1/2) f_{sigma(M) iota(sigma(M))}`` (sequences, not re-sorted)."""
    config = state.config
    vec = np.zeros(config.space.dimension, dtype=complex)
    for subset, p in config.probs.items():
        moved = sigma.image(subset)
        vec += np.sqrt(p) * config.space.f_vector(moved + tuple(config.iota[l] for l in moved))
    return vec
