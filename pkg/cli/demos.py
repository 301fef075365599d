"""
FermiBalance – Worked examples
===============================
Three self-contained demos:

* ``section5`` – label-permutation mixtures at ``lambda = 1/2`` with
  length-only probabilities satisfy fermionic detailed balance;
* ``section6`` – a basis 4-cycle on ``H_I`` that satisfies standard but not
  fermionic detailed balance;
* ``duality`` – Gram rank, dual involution and the positivity failure of
  ``B_phi``.

Each demo records the outcome it is meant to reproduce in
``RunReport.expected``.
"""

from __future__ import annotations

from typing import Callable, Dict, Mapping, Sequence

import numpy as np

from cli.checks import record_duality
from cli.report import RunReport, balance_summary
from core.balance import fermionic_sqdb, fermionic_sqdb_continuous, permuted_entangled_vector, prob_symmetry, standard_sqdb
from core.car_algebra import LinearMap, is_even
from core.duality import fermionic_dual, positivity_probe
from core.dynamics import Semigroup, basis_cycle_unitary, make_permutation, mix_map, permutation_unitary
from core.fock import FockSpace, make_lattice
from core.settings import DEFAULT_TOLERANCE, INVOLUTION_TOLERANCE
from core.states import EntangledState, ProbabilityTable, entangled_vector, length_table, make_config, \
    make_probability_table, uniform_table

SECTION5_T_GRID = (0.1, 1.0, 5.0)
PROBE_PROBS = (0.4, 0.3, 0.2, 0.1)
PROBE_KAPPA = 1j
PROBE_LAMBDA = 1.0
PROBE_THRESHOLD = 0.1


def _state(labels: Sequence[int], support: Sequence[int], iota: Mapping[int, int],
           probs: ProbabilityTable) -> EntangledState:
    space = FockSpace(make_lattice(labels))
    return entangled_vector(make_config(space, support, iota, probs))


def _cycle_checks(report: RunReport, name: str, state: EntangledState, cycle: Sequence[int],
                  weight: float, tolerance: float) -> LinearMap:
    config = state.config
    sigma = make_permutation(config.space.lattice, config.support, [cycle])
    tau = mix_map(config.algebra, permutation_unitary(config.space, sigma), weight).as_map
    result = fermionic_sqdb(tau, state, tol=tolerance)
    report.record(name, result.verdict, cycle=list(cycle), weight=weight, **balance_summary(result))
    return tau


def section5(tolerance: float = DEFAULT_TOLERANCE) -> RunReport:
    report = RunReport(command="demo section5")
    report.scenario = {"lattice": [1, 2, 3, 4, 5, 6], "I": [1, 2, 3], "iota": {"1": 4, "2": 5, "3": 6},
                       "sigma": [[1, 2, 3]], "lambda": 0.5}

    with report.timed("three_cycle"):
        probs = length_table((1, 2, 3), lambda k: (2.0, 1.0, 1.0, 2.0)[k])
        state = _state((1, 2, 3, 4, 5, 6), (1, 2, 3), {1: 4, 2: 5, 3: 6}, probs)
        tau = _cycle_checks(report, "fermionic_sqdb", state, (1, 2, 3), 0.5, tolerance)
        even, deviation = is_even(tau, tol=tolerance)
        report.record("even", even, deviation=deviation)

        sigma = make_permutation(state.config.space.lattice, (1, 2, 3), [(1, 2, 3)])
        symmetry = prob_symmetry(probs, sigma, tol=tolerance)
        report.record("prob_symmetry_inv2", symmetry.inv2, inv=symmetry.inv, inv_prime=symmetry.inv_prime)
        moved = permuted_entangled_vector(state, sigma)
        gap = float(np.linalg.norm(moved - state.vector))
        report.record("permuted_vector_invariant", gap < tolerance, distance=gap)

    with report.timed("continuous"):
        per_time = fermionic_sqdb_continuous(Semigroup.from_map(tau), state, SECTION5_T_GRID, tol=tolerance)
        report.record("fermionic_sqdb_continuous", all(r.verdict for r in per_time),
                      per_time=[{"t": t, "max_violation": r.max_violation} for t, r in zip(SECTION5_T_GRID, per_time)])

    with report.timed("dual"):
        dual = fermionic_dual(tau, state)
        distance = dual.distance(state.config.eta.conjugate(tau))
        report.record("dual_equals_copy", distance < INVOLUTION_TOLERANCE, distance=distance)

    _cycle_checks(report, "fermionic_sqdb_lambda_0.3", state, (1, 2, 3), 0.3, tolerance)
    report.expected["fermionic_sqdb_lambda_0.3"] = False

    with report.timed("two_cycle"):
        probs2 = length_table((1, 2), lambda k: (3.0, 2.0, 1.0)[k])
        state2 = _state((1, 2, 3, 4), (1, 2), {1: 3, 2: 4}, probs2)
        _cycle_checks(report, "fermionic_sqdb_two_cycle", state2, (1, 2), 0.5, tolerance)
    return report


def section6(tolerance: float = DEFAULT_TOLERANCE) -> RunReport:
    report = RunReport(command="demo section6")
    report.scenario = {"lattice": [1, 2, 3, 4], "I": [1, 2], "iota": {"1": 3, "2": 4},
                       "basis_cycle": [[], [1], [1, 2], [2]], "lambda": 0.5}
    state = _state((1, 2, 3, 4), (1, 2), {1: 3, 2: 4}, uniform_table((1, 2)))
    config = state.config

    with report.timed("balance"):
        unitary = basis_cycle_unitary(config.algebra, [(), (1,), (1, 2), (2,)])
        alpha = mix_map(config.algebra, unitary, 0.5).as_map

        standard = standard_sqdb(alpha.superoperator(), config.probs, tol=tolerance)
        report.record("standard_sqdb", standard.verdict, **balance_summary(standard))

        fermionic = fermionic_sqdb(alpha, state, tol=tolerance)
        lhs, rhs = fermionic.pair("a_1", "a*_4")
        report.record("fermionic_sqdb", fermionic.verdict, pair=["a_1", "a*_4"], lhs=lhs, rhs=rhs,
                      **balance_summary(fermionic))
        report.expected["fermionic_sqdb"] = False

    even, deviation = is_even(alpha, tol=tolerance)
    report.record("even", even, deviation=deviation)

    # tau^iota built from V_J directly against the eta transport of alpha
    copy_unitary = basis_cycle_unitary(config.copy_algebra, [(), (3,), (3, 4), (4,)])
    copy_alpha = mix_map(config.copy_algebra, copy_unitary, 0.5).as_map
    distance = copy_alpha.distance(config.eta.conjugate(alpha))
    report.record("copy_routes_agree", distance < tolerance, distance=distance)

    frozen = mix_map(config.algebra, unitary, 0.0).as_map
    standard0 = standard_sqdb(frozen.superoperator(), config.probs, tol=tolerance)
    report.record("standard_sqdb_lambda_0", standard0.verdict, **balance_summary(standard0))
    report.expected["standard_sqdb_lambda_0"] = False
    return report


def duality(tolerance: float = DEFAULT_TOLERANCE) -> RunReport:
    report = RunReport(command="demo duality")
    report.scenario = {"lattice": [1, 2, 3, 4], "I": [1, 2], "iota": {"1": 3, "2": 4},
                       "probs": list(PROBE_PROBS), "kappa": [PROBE_KAPPA.real, PROBE_KAPPA.imag],
                       "lambda_s": PROBE_LAMBDA, "label": 1}
    state = _state((1, 2, 3, 4), (1, 2), {1: 3, 2: 4}, make_probability_table((1, 2), PROBE_PROBS))
    algebra = state.config.algebra

    rng = np.random.default_rng(0)
    n = algebra.dimension
    record_duality(report, state, LinearMap(algebra, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))))

    with report.timed("probe"):
        probe = positivity_probe(state, PROBE_KAPPA, PROBE_LAMBDA, 1)
    p = state.config.probs
    closed_form = -np.sqrt(p[()] * p[(1,)]) + np.sqrt(p[(2,)] * p[(1, 2)])
    report.record("a_positive", probe.a_min_eig >= -1e-12, min_eigenvalue=probe.a_min_eig)
    report.record("b_positive", probe.b_min_eig >= -1e-12, min_eigenvalue=probe.b_min_eig)
    report.record("positivity_violated", abs(probe.value.imag) > PROBE_THRESHOLD,
                  value=probe.value, imaginary_part=probe.value.imag, phi_cd=probe.phi_cd,
                  phi_cd_closed_form=float(closed_form), cross_term=probe.cross_term)
    return report


DEMOS: Dict[str, Callable[[float], RunReport]] = {
    "section5": section5,
    "section6": section6,
    "duality": duality,
}
