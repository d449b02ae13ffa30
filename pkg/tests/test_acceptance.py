"""End-to-end acceptance suite.

Each test exercises one headline guarantee of the package at its stated
tolerance and prints a single pass/fail line. Run with ``-s`` to see the
lines as they happen::

    python3 -m pytest tests/test_acceptance.py -v -s
"""

import dataclasses
import math

import numpy as np

from qclose.amplitude_estimation import (
    AmplitudeProblem,
    dense_qpe_distribution,
    qae_error_bound,
    qpe_outcome_distribution,
    sample_phase_estimates,
)
from qclose.closeness_tester import (
    TesterParams as Params,
    l1_effective_epsilon,
    prepare_instance,
    query_count_formula,
)
from qclose.core_linalg import MatrixOp, RegisterLayout
from qclose.distributions import bump_pair, dirichlet_random, l2_distance
from qclose.experiment import ExperimentConfig, fit_scaling, run_experiment
from qclose.oracles import build_oracle, extraction_check


def _report(index: int, label: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {index} [{label}]: {status} ({detail})")
    assert ok, f"criterion {index} ({label}) failed: {detail}"


def rotation_problem(a: float) -> AmplitudeProblem:
    theta = math.asin(math.sqrt(a))
    ry = np.array([
        [math.cos(theta), -math.sin(theta)],
        [math.sin(theta), math.cos(theta)],
    ], dtype=complex)
    layout = RegisterLayout((1, 1, 1, 2))
    return AmplitudeProblem(MatrixOp(ry, ("D",)), (0, 0, 0, 1), layout)


def test_criterion_1_probe_extraction_identity():
    """Probe composite places p_k on amplitude (0,0,k) for every input."""
    rng = np.random.default_rng(11)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(2, 17))
        p = dirichlet_random(n, seed=1000 + i)
        for style in ("mirror", "permuted"):
            check = extraction_check(build_oracle(p, style, seed=i))
            worst = max(worst, check.max_deviation, check.residual_projection)
    _report(1, "probe extraction identity", worst <= 1e-10,
            f"worst deviation {worst:.3e} over 50 distributions, both styles")


def test_criterion_2_amplitude_identity():
    """Tester good-state amplitude equals ||p - q||_2^2 / 4."""
    rng = np.random.default_rng(23)
    params = Params(epsilon=0.2)
    worst = 0.0
    for i in range(50):
        n = int(rng.integers(2, 9))
        p = dirichlet_random(n, seed=2000 + i)
        q = dirichlet_random(n, seed=3000 + i)
        inst = prepare_instance(p, q, params)
        worst = max(worst, abs(inst.problem.amplitude() - l2_distance(p, q) ** 2 / 4))
    _report(2, "amplitude identity", worst <= 1e-10,
            f"worst |Delta_sim - l2^2/4| = {worst:.3e} over 50 pairs")


def test_criterion_3_qae_error_envelope():
    """Single-run estimates land inside the error bound with freq >= 8/pi^2 - 0.03."""
    floor = 8 / math.pi**2 - 0.03
    rng = np.random.default_rng(31)
    worst = 1.0
    worst_cell = None
    for a in (0.1, 0.25, 0.5, 0.9):
        for t in (16, 64, 256):
            estimates = sample_phase_estimates(a, t, 1000, rng)
            freq = float(np.mean(np.abs(estimates - a) <= qae_error_bound(a, t)))
            if freq < worst:
                worst, worst_cell = freq, (a, t)
    _report(3, "QAE error envelope", worst >= floor,
            f"min frequency {worst:.3f} at (a,t)={worst_cell}, floor {floor:.3f}")


def test_criterion_4_backend_equivalence():
    """Analytic and dense-QPE phase distributions agree to 1e-8 TV."""
    problems = [rotation_problem(a)
                for a in (0.0, 0.1, 0.25, 0.5, math.sin(3 * math.pi / 16) ** 2,
                          0.75, 1.0)]
    params = Params(epsilon=0.3, repeats=1)
    for n in (2, 3, 4):
        p = dirichlet_random(n, seed=40 + n)
        q = dirichlet_random(n, seed=50 + n)
        problems.append(prepare_instance(p, q, params).problem)
    worst = 0.0
    for prob, m in zip(problems, (2, 3, 4, 5, 6, 4, 3, 4, 5, 6)):
        exact = qpe_outcome_distribution(prob.amplitude(), m)
        dense = dense_qpe_distribution(prob, m)
        worst = max(worst, 0.5 * float(np.abs(exact - dense).sum()))
    _report(4, "backend equivalence", worst <= 1e-8,
            f"max TV distance {worst:.3e} over 10 problems, m <= 6")


def test_criterion_5_tester_success_grid():
    """Boundary instances decided correctly with probability >= 2/3 per cell."""
    worst = 1.0
    worst_cell = None
    for eps in (0.1, 0.2, 0.4):
        for nu in (0.25, 0.5, 1.0):
            for n in (2, 4, 16):
                for target, side in ((eps, "FAR"), ((1 - nu) * eps, "CLOSE")):
                    config = ExperimentConfig(
                        mode="l2", n=n, family="bump_pair",
                        target_distance=target, epsilon=eps, nu=nu,
                        repeats=15, t_rule="proof", trials=300, seed=5)
                    rate = run_experiment(config).success_rate
                    if worst_cell is None or rate < worst:
                        worst, worst_cell = rate, (eps, nu, n, side)
    _report(5, "tester success probability", worst >= 2 / 3,
            f"min success rate {worst:.3f} at (eps,nu,n,side)={worst_cell}")


def test_criterion_6_query_scaling():
    """Per-run query totals scale linearly in 1/(nu*eps) and in sqrt(n)/eps."""
    l2_records = []
    for eps, nu in ((0.4, 1.0), (0.2, 1.0), (0.1, 1.0), (0.1, 0.5), (0.1, 0.25)):
        config = ExperimentConfig(
            mode="l2", n=2, family="bump_pair", target_distance=eps,
            epsilon=eps, nu=nu, repeats=15, trials=1, seed=6)
        l2_records.append(run_experiment(config))
    l2_fit = fit_scaling(l2_records, "inv_nu_eps")

    # The l1 sweep spans support sizes beyond dense simulation; ledger
    # totals there come from the closed-form count, which the simulated
    # n = 4 run below is checked against exactly.
    eps = 0.4
    base = run_experiment(ExperimentConfig(
        mode="l1", n=4, family="bump_pair", target_distance=0.0,
        epsilon=eps, repeats=15, trials=1, seed=6))
    assert base.ledger_total == base.predicted_ledger_total
    l1_records = []
    for n in (4, 16, 64, 256):
        params = Params(epsilon=l1_effective_epsilon(eps, n), repeats=15)
        total = query_count_formula(params)
        l1_records.append(dataclasses.replace(
            base, config={**base.config, "n": n},
            ledger_total=total, predicted_ledger_total=total, t=params.t))
    l1_fit = fit_scaling(l1_records, "sqrt_n_over_eps")

    ok = abs(l2_fit.slope - 1.0) <= 0.05 and abs(l1_fit.slope - 1.0) <= 0.05
    _report(6, "query scaling", ok,
            f"l2 slope {l2_fit.slope:.3f} vs 1/(nu*eps), "
            f"l1 slope {l1_fit.slope:.3f} vs sqrt(n)/eps")


def test_criterion_7_classical_vs_quantum_scaling():
    """Classical cost grows quadratically in 1/eps, quantum linearly."""
    epsilons = (0.4, 0.2, 0.1, 0.05)
    classical = []
    quantum = []
    min_rate = 1.0
    for eps in epsilons:
        c = run_experiment(ExperimentConfig(
            mode="classical_l2", n=4, family="bump_pair",
            target_distance=eps, epsilon=eps, trials=300, seed=7))
        q = run_experiment(ExperimentConfig(
            mode="l2", n=4, family="bump_pair", target_distance=eps,
            epsilon=eps, repeats=15, trials=60, seed=7))
        min_rate = min(min_rate, c.success_rate, q.success_rate)
        classical.append(c)
        quantum.append(q)
    c_fit = fit_scaling(classical, "inv_eps")
    q_fit = fit_scaling(quantum, "inv_eps")
    ok = (abs(c_fit.slope - 2.0) <= 0.1 and abs(q_fit.slope - 1.0) <= 0.05
          and min_rate >= 2 / 3)
    _report(7, "classical vs quantum scaling", ok,
            f"classical slope {c_fit.slope:.3f}, quantum slope {q_fit.slope:.3f}, "
            f"min success rate {min_rate:.3f}")


def test_criterion_8_reduction_constants():
    """Equality threshold is eps^2/8; l1 reduction runs at eps/sqrt(n)."""
    worst_thresh = 0.0
    worst_eps = 0.0
    for eps in (0.05, 0.1, 0.2, 0.3, 0.4, 0.7):
        params = Params(epsilon=eps, nu=1.0)
        worst_thresh = max(worst_thresh, abs(params.threshold - eps**2 / 8))
        for n in (2, 3, 4, 16, 100, 256):
            worst_eps = max(
                worst_eps, abs(l1_effective_epsilon(eps, n) - eps / math.sqrt(n)))
    ok = worst_thresh == 0.0 and worst_eps <= 1e-15
    _report(8, "reduction constants", ok,
            f"threshold deviation {worst_thresh:.1e}, "
            f"effective-epsilon deviation {worst_eps:.1e}")
