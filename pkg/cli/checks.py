"""
FermiBalance – Scenario checks
===============================
The work behind ``check`` and ``dual``: run the balance, reduction and
duality checks on a built scenario and record them in a :class:`RunReport`.
"""

from __future__ import annotations

import logging

import numpy as np

from cli.report import RunReport, balance_summary
from cli.scenario import Scenario
from core.balance import (
    fermionic_sqdb,
    fermionic_sqdb_continuous,
    prob_symmetry,
    standard_sqdb,
    standard_sqdb_continuous,
)
from core.car_algebra import LinearMap, is_even
from core.duality import fermionic_dual, gram
from core.settings import ADJOINT_TOLERANCE, INVOLUTION_TOLERANCE
from core.states import EntangledState, pairing_matrix, reduction_report

log = logging.getLogger(__name__)

MAP_SPECS = "identity, dynamics, parity, evolve:<t> or random:<seed>"


def resolve_map(scenario: Scenario, spec: str) -> LinearMap:
    """Turn a ``--map`` value into a map on ``A(I)``."""
    algebra = scenario.state.config.algebra
    if spec == "identity":
        return algebra.identity_map()
    if spec == "dynamics":
        return scenario.dynamics.as_map
    if spec == "parity":
        return algebra.parity_map()
    kind, _, argument = spec.partition(":")
    if kind == "evolve" and argument:
        try:
            t = float(argument)
        except ValueError:
            raise ValueError(f"evolve needs a time, got {argument!r}") from None
        return scenario.semigroup.evolve(t)
    if kind == "random" and argument:
        try:
            seed = int(argument)
        except ValueError:
            raise ValueError(f"random needs an integer seed, got {argument!r}") from None
        rng = np.random.default_rng(seed)
        n = algebra.dimension
        return LinearMap(algebra, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    raise ValueError(f"Unknown map spec {spec!r}; expected {MAP_SPECS}")


def record_duality(report: RunReport, state: EntangledState, alpha: LinearMap, *, prefix: str = "") -> LinearMap:
    """Dual of *alpha*, its adjoint-identity and involution residuals."""
    config = state.config
    with report.timed(prefix + "dual"):
        dual = fermionic_dual(alpha, state)
        back = fermionic_dual(dual, state)
        g = gram(state)
    pairing = pairing_matrix(state)
    adjoint_residual = float(np.max(np.abs(alpha.matrix.T @ pairing - pairing @ dual.matrix)))
    involution_residual = back.distance(alpha)
    report.record(prefix + "gram_full_rank", g.full_rank, rank=g.rank, size=g.matrix.shape[0], condition=g.condition)
    report.record(prefix + "adjoint_identity", adjoint_residual < ADJOINT_TOLERANCE, residual=adjoint_residual)
    report.record(prefix + "involution", involution_residual < INVOLUTION_TOLERANCE, residual=involution_residual)
    report.note(prefix + "dual_vs_copy", distance=dual.distance(config.eta.conjugate(alpha)))
    return dual


def run_check(scenario: Scenario, tolerance: float) -> RunReport:
    """Reduction, fermionic and standard balance, evenness and (optionally) duality."""
    config = scenario.config
    state = scenario.state
    probs = state.config.probs
    tau = scenario.dynamics.as_map
    report = RunReport(command="check", scenario=config.echo())

    with report.timed("reduction"):
        reduction = reduction_report(state)
    report.record("reduction", reduction.max_deviation < tolerance,
                  deviation_source=reduction.deviation_source, deviation_copy=reduction.deviation_copy)

    with report.timed("fermionic_sqdb"):
        fermionic = fermionic_sqdb(tau, state, tol=tolerance)
    report.record("fermionic_sqdb", fermionic.verdict, **balance_summary(fermionic))

    with report.timed("standard_sqdb"):
        standard = standard_sqdb(tau.superoperator(), probs, tol=tolerance)
    report.record("standard_sqdb", standard.verdict, **balance_summary(standard))

    even, deviation = is_even(tau, tol=tolerance)
    report.record("even", even, deviation=deviation)

    if config.t_grid:
        with report.timed("continuous"):
            per_time = fermionic_sqdb_continuous(scenario.semigroup, state, config.t_grid, tol=tolerance)
            per_time_standard = standard_sqdb_continuous(scenario.semigroup, probs, config.t_grid, tol=tolerance)
        report.record("fermionic_sqdb_continuous", all(r.verdict for r in per_time),
                      per_time=[{"t": t, "max_violation": r.max_violation} for t, r in zip(config.t_grid, per_time)])
        report.record("standard_sqdb_continuous", all(r.verdict for r in per_time_standard),
                      per_time=[{"t": t, "max_violation": r.max_violation}
                                for t, r in zip(config.t_grid, per_time_standard)])

    if scenario.sigma is not None:
        symmetry = prob_symmetry(probs, scenario.sigma, tol=tolerance)
        report.note("prob_symmetry", inv=symmetry.inv, inv2=symmetry.inv2, inv_prime=symmetry.inv_prime)

    if config.duality:
        record_duality(report, state, tau)

    log.info("check %s: %s", config.name, "passed" if report.passed else "failed")
    return report


def run_dual(scenario: Scenario, spec: str) -> RunReport:
    """Fermionic dual of the map named by *spec*, printed as a monomial-basis matrix."""
    state = scenario.state
    config = state.config
    alpha = resolve_map(scenario, spec)
    report = RunReport(command="dual", scenario=scenario.config.echo())
    dual = record_duality(report, state, alpha)
    report.note("dual", map=spec, support=list(config.copy_support),
                labels=config.copy_algebra.labels, matrix=dual.matrix)
    return report
