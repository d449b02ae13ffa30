"""Amplitude estimation with two interchangeable simulation backends.

Given a unitary U and a basis-pattern projector Π with
U|0⟩ = sqrt(a)|good⟩ + sqrt(1-a)|bad⟩, phase estimation on the Grover
operator Q = -U S0 U† SΠ yields an m-bit phase reading y and the
estimate sin²(πy/M), M = 2^m.

Because U|0⟩ lies in a 2-D invariant subspace where Q is a rotation by
2θ (a = sin²θ), the measurement distribution over y has a closed form:
an equal mixture of two squared-Dirichlet (Fejér-type) kernels centered
at ±θ/π.  The ``subspace_exact`` backend samples that distribution
directly and scales to any t; ``dense_qpe`` simulates the full
ancilla ⊗ system circuit and exists as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_linalg import Operator, MatrixOp, RegisterLayout, projector_diagonal, projector_norm_sq
from .errors import CapacityError, ParameterError
from .oracles import QueryLedger

#: largest total system dimension accepted by the dense backend
DENSE_DIM_LIMIT = 4096
#: largest ancilla-grid x system product accepted by the dense backend
DENSE_WORK_LIMIT = 1 << 21

BACKENDS = ("subspace_exact", "dense_qpe")


@dataclass
class AmplitudeProblem:
    """A unitary/projector pair whose good-state amplitude is to be estimated.

    ``cost_per_application`` gives the ledger charge for one application
    of the unitary (or its inverse); estimation charges the ledger in
    closed form rather than per operator call, so the total matches the
    run's declared budget exactly.
    """

    unitary: Operator
    projector_spec: tuple[int | None, ...]
    layout: RegisterLayout
    ledger: QueryLedger | None = None
    cost_per_application: dict[str, int] = field(default_factory=dict)
    _amplitude: float | None = field(default=None, repr=False)

    def prepared_state(self) -> np.ndarray:
        return self.unitary.apply(self.layout.zero_state(), self.layout, counting=False)

    def amplitude(self) -> float:
        """Exact a = ‖Π U|0⟩‖², computed once and cached."""
        if self._amplitude is None:
            a = projector_norm_sq(self.prepared_state(), self.projector_spec, self.layout)
            self._amplitude = min(1.0, max(0.0, a))
        return self._amplitude


@dataclass
class QaeResult:
    estimate: float
    t: int
    phase_bits: int
    repeats: int
    raw_estimates: list[float]
    backend: str


def qae_error_bound(a: float, t: int) -> float:
    """Additive error radius 2π·sqrt(a(1-a))/t + π²/t² guaranteed per run."""
    if not 0.0 <= a <= 1.0:
        raise ParameterError(f"amplitude {a} outside [0, 1]")
    if t < 1:
        raise ParameterError("t must be >= 1")
    return 2.0 * math.pi * math.sqrt(a * (1.0 - a)) / t + math.pi**2 / t**2


def phase_bits_for(t: int) -> int:
    """Ancilla width m with 2^m >= t (at least one bit)."""
    if t < 1:
        raise ParameterError("t must be >= 1")
    return max(1, math.ceil(math.log2(t)))


def grover_operator(prob: AmplitudeProblem) -> MatrixOp:
    """Dense Q = -U S0 U† SΠ on the full register space.

    On the invariant plane of U|0⟩ this is a rotation by 2θ with
    a = sin²θ; its eigenphases there are ±2θ.
    """
    layout = prob.layout
    dim = layout.total_dim
    if dim > DENSE_DIM_LIMIT:
        raise CapacityError(f"dense Grover operator limited to dim <= {DENSE_DIM_LIMIT}")
    u = prob.unitary.to_dense(layout)
    s0 = np.eye(dim, dtype=complex)
    s0[0, 0] = -1.0
    s_pi = np.eye(dim, dtype=complex) - 2.0 * np.diag(projector_diagonal(prob.projector_spec, layout))
    q = -u @ s0 @ u.conj().T @ s_pi
    return MatrixOp(q, ("A", "B", "C", "D"))


def _squared_dirichlet_kernel(delta: np.ndarray, big_m: int) -> np.ndarray:
    """(sin(Mπδ) / (M sin(πδ)))², continued to 1 at δ ≡ 0 (mod 1)."""
    d = delta - np.round(delta)
    s = np.sin(np.pi * d)
    tiny = np.abs(s) < 1e-14
    safe = np.where(tiny, 1.0, s)
    out = (np.sin(np.pi * big_m * d) / (big_m * safe)) ** 2
    return np.where(tiny, 1.0, out)


def qpe_outcome_distribution(a: float, m: int) -> np.ndarray:
    """Exact distribution of the m-bit phase reading for amplitude a.

    The prepared state splits evenly between the two Grover eigenvectors
    (eigenphases ±θ/π of a full turn), whose system components are
    orthogonal, so the reading distribution is the plain half/half kernel
    mixture with no interference.
    """
    if not 0.0 <= a <= 1.0:
        raise ParameterError(f"amplitude {a} outside [0, 1]")
    big_m = 1 << m
    theta = math.asin(math.sqrt(a))
    f = theta / math.pi
    grid = np.arange(big_m) / big_m
    dist = 0.5 * (_squared_dirichlet_kernel(grid - f, big_m)
                  + _squared_dirichlet_kernel(grid + f, big_m))
    total = dist.sum()
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"phase distribution sums to {total}, expected 1")
    return dist / total


def dense_qpe_distribution(prob: AmplitudeProblem, m: int) -> np.ndarray:
    """Phase-reading distribution from the full ancilla ⊗ system circuit.

    The ancilla is held in its computational basis: after the Hadamard
    layer, branch y carries Q^y applied to U|0⟩; the inverse Fourier
    transform over the branch index then gives the final ancilla
    marginal.
    """
    layout = prob.layout
    dim = layout.total_dim
    big_m = 1 << m
    if dim > DENSE_DIM_LIMIT or big_m * dim > DENSE_WORK_LIMIT:
        raise CapacityError(
            f"dense QPE infeasible: dim={dim}, M={big_m} exceeds the budget"
        )
    q = grover_operator(prob).matrix
    psi = prob.prepared_state()
    branches = np.empty((big_m, dim), dtype=complex)
    branches[0] = psi
    for y in range(1, big_m):
        branches[y] = q @ branches[y - 1]
    final = np.fft.fft(branches, axis=0) / big_m
    dist = np.sum(np.abs(final) ** 2, axis=1)
    total = dist.sum()
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"phase distribution sums to {total}, expected 1")
    return dist / total


def sample_phase_estimates(
    a: float, t: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Vectorized draws of single-run estimates sin²(πy/M) for amplitude a."""
    m = phase_bits_for(t)
    big_m = 1 << m
    dist = qpe_outcome_distribution(a, m)
    ys = rng.choice(big_m, size=size, p=dist)
    return np.sin(np.pi * ys / big_m) ** 2


def estimate_amplitude(
    prob: AmplitudeProblem,
    t: int,
    repeats: int = 1,
    backend: str = "subspace_exact",
    rng_seed=None,
) -> QaeResult:
    """Median of ``repeats`` independent phase-estimation runs.

    Each raw run uses M = 2^m >= t Grover powers; the ledger (when the
    problem carries one) is charged for one state preparation plus t
    Grover iterations (one U and one U† each) per raw run.
    """
    if t < 1:
        raise ParameterError("t must be >= 1")
    if repeats < 1 or repeats % 2 == 0:
        raise ParameterError("repeats must be a positive odd integer")
    if backend not in BACKENDS:
        raise ParameterError(f"unknown backend {backend!r}")
    m = phase_bits_for(t)
    big_m = 1 << m
    if backend == "subspace_exact":
        dist = qpe_outcome_distribution(prob.amplitude(), m)
    else:
        dist = dense_qpe_distribution(prob, m)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    ys = rng.choice(big_m, size=repeats, p=dist)
    raw = np.sin(np.pi * ys / big_m) ** 2
    if prob.ledger is not None and prob.cost_per_application:
        prob.ledger.add_scaled(prob.cost_per_application, repeats * (1 + 2 * t))
    return QaeResult(
        estimate=float(np.median(raw)),
        t=t,
        phase_bits=m,
        repeats=repeats,
        raw_estimates=[float(x) for x in raw],
        backend=backend,
    )
