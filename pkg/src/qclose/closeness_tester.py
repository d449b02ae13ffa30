"""End-to-end l2 closeness tester, plus the equality and l1 reductions.

The tester entangles the two purified probes on a control qubit so that
the squared l2 distance appears as four times the amplitude of the
(0,0,·,0) block, estimates that amplitude, and thresholds at
(1/4 - ν/8)ε².  The Grover-power budget defaults to the ``proof`` rule
t = ceil(20π/(νε)); the looser ``algorithm`` rule t = ceil(10π/(νε)) is
exposed so the two constants can be compared empirically, but only the
former provably clears the νε²/8 error margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .amplitude_estimation import AmplitudeProblem, estimate_amplitude
from .core_linalg import (
    Composed,
    Controlled,
    HADAMARD,
    MatrixOp,
    PAULI_X,
    RegisterLayout,
)
from .distributions import Distribution, l2_distance
from .errors import ParameterError, StructuralError
from .oracles import PurifiedOracle, QueryLedger, build_oracle, build_tilde

T_RULES = ("proof", "algorithm")

#: ledger charge for a single application of the tester unitary: the two
#: probes each contain one oracle call and one inverse, both controlled.
COST_PER_UNITARY = {"ctrl_U_p": 2, "ctrl_U_q": 2}

#: slack used only to annotate whether an instance sits inside the promise gap
_PROMISE_TOL = 1e-12


@dataclass(frozen=True)
class TesterParams:
    epsilon: float
    nu: float = 1.0
    t_rule: str = "proof"
    repeats: int = 15
    purification_style: str = "mirror"
    backend: str = "subspace_exact"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0.0 < self.nu <= 1.0:
            raise ParameterError(f"nu must be in (0, 1], got {self.nu}")
        if self.t_rule not in T_RULES:
            raise ParameterError(f"t_rule must be one of {T_RULES}, got {self.t_rule!r}")
        if self.repeats < 1 or self.repeats % 2 == 0:
            raise ParameterError(f"repeats must be a positive odd integer, got {self.repeats}")

    @property
    def t(self) -> int:
        base = 20.0 if self.t_rule == "proof" else 10.0
        return max(1, math.ceil(base * math.pi / (self.nu * self.epsilon)))

    @property
    def threshold(self) -> float:
        return (0.25 - self.nu / 8.0) * self.epsilon**2


@dataclass
class TestVerdict:
    verdict: str  # "CLOSE" or "FAR"
    delta_estimate: float
    delta_true: float
    threshold: float
    l2_true: float
    epsilon_effective: float
    t: int
    ledger: QueryLedger
    params: TesterParams
    promise_violated: bool
    expected_verdict: str | None


def build_tester_unitary(
    oracle_p: PurifiedOracle,
    oracle_q: PurifiedOracle,
    layout: RegisterLayout,
) -> AmplitudeProblem:
    """Assemble the estimation problem whose amplitude is ‖p−q‖₂²/4.

    The control qubit D is driven through HX, selects which probe acts,
    and is closed with H; the projector keeps A = B = 0 and D = 0 so the
    surviving amplitudes are the (p_i − q_i)/2 differences.
    """
    if oracle_p.n != oracle_q.n:
        raise StructuralError(
            f"support sizes differ: {oracle_p.n} vs {oracle_q.n}"
        )
    if layout.dims[:3] != (oracle_p.n,) * 3 or layout.dims[3] != 2:
        raise StructuralError(f"layout {layout.dims} does not fit support {oracle_p.n}")
    ledger = oracle_p.ledger
    unitary = Composed([
        MatrixOp(HADAMARD @ PAULI_X, ("D",)),
        Controlled(build_tilde(oracle_p, layout), "D", 0),
        Controlled(build_tilde(oracle_q, layout), "D", 1),
        MatrixOp(HADAMARD, ("D",)),
    ])
    return AmplitudeProblem(
        unitary=unitary,
        projector_spec=(0, 0, None, 0),
        layout=layout,
        ledger=ledger,
        cost_per_application=dict(COST_PER_UNITARY),
    )


@dataclass
class TesterInstance:
    """A prepared tester run: oracles, problem and derived quantities."""

    problem: AmplitudeProblem
    params: TesterParams
    l2_true: float
    ledger: QueryLedger

    @property
    def delta_true(self) -> float:
        return self.problem.amplitude()


def prepare_instance(
    p: Distribution,
    q: Distribution,
    params: TesterParams,
    *,
    permutation_seed: int = 0,
) -> TesterInstance:
    if p.n != q.n:
        raise StructuralError(f"support sizes differ: {p.n} vs {q.n}")
    layout = RegisterLayout.for_support(p.n)
    ledger = QueryLedger()
    oracle_p = build_oracle(p, params.purification_style, seed=permutation_seed,
                            ledger=ledger, name="p")
    oracle_q = build_oracle(q, params.purification_style, seed=permutation_seed + 1,
                            ledger=ledger, name="q")
    problem = build_tester_unitary(oracle_p, oracle_q, layout)
    return TesterInstance(problem, params, l2_distance(p, q), ledger)


def _verdict_from_instance(inst: TesterInstance, rng_seed) -> TestVerdict:
    params = inst.params
    result = estimate_amplitude(
        inst.problem, params.t, params.repeats, params.backend, rng_seed
    )
    verdict = "CLOSE" if result.estimate < params.threshold else "FAR"
    return TestVerdict(
        verdict=verdict,
        delta_estimate=result.estimate,
        delta_true=inst.delta_true,
        threshold=params.threshold,
        l2_true=inst.l2_true,
        epsilon_effective=params.epsilon,
        t=params.t,
        ledger=inst.ledger,
        params=params,
        promise_violated=promise_violated(inst.l2_true, params),
        expected_verdict=expected_verdict(inst.l2_true, params),
    )


def promise_violated(l2: float, params: TesterParams) -> bool:
    lo = (1.0 - params.nu) * params.epsilon
    return lo + _PROMISE_TOL < l2 < params.epsilon - _PROMISE_TOL


def expected_verdict(l2: float, params: TesterParams) -> str | None:
    """Promised answer, or None inside the gap where none is guaranteed."""
    if l2 <= (1.0 - params.nu) * params.epsilon + _PROMISE_TOL:
        return "CLOSE"
    if l2 >= params.epsilon - _PROMISE_TOL:
        return "FAR"
    return None


def run_l2_tester(
    p: Distribution,
    q: Distribution,
    params: TesterParams,
    rng_seed=None,
) -> TestVerdict:
    """One full robust-tester run with fresh oracles and ledger."""
    inst = prepare_instance(p, q, params)
    return _verdict_from_instance(inst, rng_seed)


def run_equality_tester(
    p: Distribution,
    q: Distribution,
    epsilon: float,
    rng_seed=None,
    **kwargs,
) -> TestVerdict:
    """Equality-vs-far tester: the robust tester with ν = 1 (threshold ε²/8)."""
    params = TesterParams(epsilon=epsilon, nu=1.0, **kwargs)
    return run_l2_tester(p, q, params, rng_seed)


def l1_effective_epsilon(epsilon: float, n: int) -> float:
    return epsilon / math.sqrt(n)


def run_l1_tester(
    p: Distribution,
    q: Distribution,
    epsilon: float,
    rng_seed=None,
    **kwargs,
) -> TestVerdict:
    """l1 tester via the norm inequality ‖·‖₂ ≥ ‖·‖₁/√n: run at ε′ = ε/√n, ν = 1.

    The l1 promise (p = q vs ‖p−q‖₁ ≥ ε) maps onto the l2 promise at ε′,
    so the verdict carries over; cost grows by the √n factor in t.
    """
    if not 0.0 < epsilon < 1.0 * math.sqrt(p.n):
        raise ParameterError(f"l1 epsilon must be in (0, sqrt(n)), got {epsilon}")
    eps_eff = l1_effective_epsilon(epsilon, p.n)
    params = TesterParams(epsilon=eps_eff, nu=1.0, **kwargs)
    verdict = run_l2_tester(p, q, params, rng_seed)
    return verdict


def query_count_formula(params: TesterParams) -> int:
    """Exact ledger total a tester run reports.

    Per raw estimation run: one state preparation plus t Grover
    iterations, each iteration one U and one U†, each such application
    costing two controlled calls to each oracle.
    """
    per_unitary = sum(COST_PER_UNITARY.values())
    return params.repeats * (1 + 2 * params.t) * per_unitary
