"""
FermiBalance – Fermionic duals
===============================
The bilinear form ``B_phi(a, b) = phi(ab)`` on ``A(I) x A(iota(I))``, its
Gram matrix over the monomial bases, the duals it induces, and the example
showing that ``B_phi`` is not positive on positive pairs. The standard form
``B_omega(x, y) = omega(x ⊗ y)`` and its dual are included for comparison.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from core.balance import Weights, omega
from core.car_algebra import AlgebraElement, LinearMap
from core.settings import GRAM_CONDITION_LIMIT, GRAM_WARN_CONDITION
from core.states import EntangledState, pairing_matrix

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# B_phi
# ---------------------------------------------------------------------------

def _check_pair(state: EntangledState, a: AlgebraElement, b: AlgebraElement) -> None:
    config = state.config
    if a.support != config.support:
        raise ValueError(f"First argument must lie in A({list(config.support)}), got A({list(a.support)})")
    if b.support != config.copy_support:
        raise ValueError(f"Second argument must lie in A({list(config.copy_support)}), got A({list(b.support)})")


def bilinear_form(state: EntangledState, a: AlgebraElement, b: AlgebraElement) -> complex:
    """``B_phi(a, b) = phi(ab)`` for ``a`` in ``A(I)``, ``b`` in ``A(iota(I))``."""
    _check_pair(state, a, b)
    return state.phi(a.operator @ b.operator)


def reversed_bilinear_form(state: EntangledState, a: AlgebraElement, b: AlgebraElement) -> complex:
    """The other ordering, ``phi(ba)``."""
    _check_pair(state, a, b)
    return state.phi(b.operator @ a.operator)


@dataclass(frozen=True, eq=False)
class BilinearGram:
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int

    @property
    def condition(self) -> float:
        """Smallest over largest singular value (0 for a singular matrix)."""
        largest = float(self.singular_values.max())
        return float(self.singular_values.min()) / largest if largest > 0 else 0.0

    @property
    def full_rank(self) -> bool:
        return self.rank == self.matrix.shape[0]


def gram(state: EntangledState) -> BilinearGram:
    """``G_ij = B_phi(m_i, n_j)`` with its numerical rank."""
    matrix = pairing_matrix(state)
    singular = np.linalg.svd(matrix, compute_uv=False)
    cutoff = singular.max() * max(matrix.shape) * np.finfo(float).eps
    rank = int(np.sum(singular > cutoff))
    result = BilinearGram(matrix, singular, rank)
    if not state.config.probs.strict:
        log.warning("Gram matrix built from a table with zero probabilities; rank %d of %d", rank, matrix.shape[0])
    elif result.condition * GRAM_WARN_CONDITION < 1.0:
        log.warning("B_phi Gram matrix on I=%s is near-singular (singular value ratio %.3e)",
                    list(state.config.support), result.condition)
    log.info("B_phi Gram on I=%s: rank %d/%d, singular range [%.3e, %.3e]",
             list(state.config.support), rank, matrix.shape[0], singular.min(), singular.max())
    return result


def _factored_gram(state: EntangledState, condition_limit: float) -> BilinearGram:
    if not state.config.probs.strict:
        raise ValueError("Fermionic duals require strict positivity: p_M > 0 for every M in D_I")
    g = gram(state)
    if g.condition * condition_limit < 1.0:
        raise ValueError(f"B_phi Gram matrix is ill-conditioned (singular value ratio {g.condition:.3e})")
    return g


# ---------------------------------------------------------------------------
# Duals
# ---------------------------------------------------------------------------

def fermionic_dual(linear_map: LinearMap, state: EntangledState, *,
                   condition_limit: float = GRAM_CONDITION_LIMIT) -> LinearMap:
    """The unique map adjoint to *linear_map* with respect to ``B_phi``.

    For ``alpha`` on ``A(I)`` returns ``alpha^phi`` on ``A(iota(I))`` with
    ``B_phi(alpha(a), b) = B_phi(a, alpha^phi(b))``; for ``beta`` on
    ``A(iota(I))`` returns ``beta^phi`` on ``A(I)`` with
    ``B_phi(a, beta(b)) = B_phi(beta^phi(a), b)``.

    Raises
    ------
    ValueError
        Non-strict probability table, ill-conditioned Gram matrix, or a map
        on neither ``A(I)`` nor ``A(iota(I))``.
    """
    config = state.config
    support = linear_map.algebra.support
    if support not in (config.support, config.copy_support):
        raise ValueError(f"Map acts on A({list(support)}), expected A({list(config.support)}) "
                         f"or A({list(config.copy_support)})")
    g = _factored_gram(state, condition_limit).matrix
    if support == config.support:
        # T^T G = G D
        dual = lu_solve(lu_factor(g), linear_map.matrix.T @ g)
        log.info("Fermionic dual A(%s) -> A(%s)", list(config.support), list(config.copy_support))
        return LinearMap(config.copy_algebra, dual)
    # G S = E^T G
    dual = lu_solve(lu_factor(g.T), (g @ linear_map.matrix).T)
    log.info("Fermionic dual A(%s) -> A(%s)", list(config.copy_support), list(config.support))
    return LinearMap(config.algebra, dual)


def represent_functional(state: EntangledState, values: Sequence[complex], *, side: str = "source",
                         condition_limit: float = GRAM_CONDITION_LIMIT) -> AlgebraElement:
    """Represent a linear functional through ``B_phi``.

    With ``side="source"``, *values* are ``f(m_i)`` on the monomials of
    ``A(I)`` and the result is the unique ``b`` with ``f = B_phi(., b)``.
    With ``side="copy"``, *values* are ``g(n_j)`` on ``A(iota(I))`` and the
    result is the unique ``a`` with ``g = B_phi(a, .)``.
    """
    config = state.config
    g = _factored_gram(state, condition_limit).matrix
    rhs = np.asarray(values, dtype=complex)
    if rhs.shape != (g.shape[0],):
        raise ValueError(f"Expected {g.shape[0]} functional values, got shape {rhs.shape}")
    if side == "source":
        return AlgebraElement(config.copy_algebra, lu_solve(lu_factor(g), rhs))
    if side == "copy":
        return AlgebraElement(config.algebra, lu_solve(lu_factor(g.T), rhs))
    raise ValueError(f"side must be 'source' or 'copy', got {side!r}")


# ---------------------------------------------------------------------------
# Positivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositivityProbe:
    value: complex
    a_min_eig: float
    b_min_eig: float
    phi_cd: complex
    cross_term: complex


def positivity_probe(state: EntangledState, kappa: complex, lam: complex, label: int) -> PositivityProbe:
    """Evaluate ``B_phi(a, b)`` for ``a = (1 + kappa c)*(1 + kappa c)``, ``b = (1 + lam d)*(1 + lam d)``.

    ``c = a_l`` and ``d = a_iota(l)``. Both ``a`` and ``b`` are positive, yet
    ``B_phi(a, b)`` has imaginary part ``2 Im(kappa lam) phi(cd)``.
    ``cross_term`` is ``phi((kappa c + conj(kappa) c*) b)``.

    The eigenvalue bounds are taken on the one-mode blocks ``pi_{l}(a)`` and
    ``pi_{iota(l)}(b)``; a faithful representation keeps the spectrum.
    """
    config = state.config
    if label not in config.support:
        raise ValueError(f"Label {label} is not in I={list(config.support)}")
    space = config.space
    copy_label = config.iota[label]
    c = space.annihilation(label)
    d = space.annihilation(copy_label)
    one = space.identity()
    left = one + kappa * c
    right = one + lam * d
    a = left.conj().T @ left
    b = right.conj().T @ right
    probe = PositivityProbe(
        value=state.phi(a @ b),
        a_min_eig=float(np.linalg.eigvalsh(space.restrict(a, [label])).min()),
        b_min_eig=float(np.linalg.eigvalsh(space.restrict(b, [copy_label])).min()),
        phi_cd=state.phi(c @ d),
        cross_term=state.phi((kappa * c + complex(kappa).conjugate() * c.conj().T) @ b),
    )
    log.info("Positivity probe at l=%d: B_phi(a, b) = %s", label, probe.value)
    return probe


# ---------------------------------------------------------------------------
# Standard counterpart B_omega
# ---------------------------------------------------------------------------

def standard_bilinear_form(probs: Weights, x: np.ndarray, y: np.ndarray) -> complex:
    """``B_omega(x, y) = omega(x ⊗ y)``; non-negative whenever ``x, y >= 0``."""
    return omega(probs, x, y)


def standard_dual(superop: np.ndarray, probs: Weights) -> np.ndarray:
    """The superoperator ``alpha'`` with ``B_omega(alpha(a), b) = B_omega(a, alpha'(b))``."""
    values = np.asarray(getattr(probs, "probs", probs), dtype=float)
    if np.any(values <= 0.0):
        raise ValueError("The standard dual requires strictly positive probabilities")
    weights = np.sqrt(np.outer(values, values)).reshape(-1)
    if superop.shape != (weights.size, weights.size):
        raise ValueError(f"Superoperator of shape {superop.shape} does not act on M_{values.size}")
    return (superop.T * weights[None, :]) / weights[:, None]
