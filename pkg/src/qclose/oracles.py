"""Purified query-access oracles and the composite probe operator.

An oracle for a distribution p acts on registers A (environment) and B
(index) as |0⟩|0⟩ → Σ_i sqrt(p_i)|φ_i⟩|i⟩ with orthonormal |φ_i⟩.  Only
that one column is constrained; the rest of the unitary is completed by
a deterministic Householder reflection mapping |0,0⟩ to the target
column.  The composite probe Ũ = U† U_copy U places each probability
p_k directly on the (0,0,k) amplitude, which is what the closeness
tester estimates.  Every counted oracle application lands in a
QueryLedger keyed by oracle, inverse and controlled use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core_linalg import (
    Composed,
    Controlled,
    MatrixOp,
    Operator,
    RegisterLayout,
    projector_norm_sq,
)
from .distributions import Distribution
from .errors import CapacityError, ParameterError, StructuralError

LEDGER_KEYS = ("U_p", "U_p_dag", "ctrl_U_p", "U_q", "U_q_dag", "ctrl_U_q")

PURIFICATION_STYLES = ("mirror", "permuted")

#: n above which dense oracle synthesis is refused
DENSE_SUPPORT_LIMIT = 64


@dataclass
class QueryLedger:
    """Monotone counts of oracle invocations, keyed per LEDGER_KEYS."""

    counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(LEDGER_KEYS, 0))

    def record(self, name: str, *, dagger: bool = False, controlled: bool = False) -> None:
        if controlled:
            key = f"ctrl_U_{name}"
        elif dagger:
            key = f"U_{name}_dag"
        else:
            key = f"U_{name}"
        if key not in self.counts:
            raise StructuralError(f"unknown ledger key {key!r}")
        self.counts[key] += 1

    def add_scaled(self, cost: dict[str, int], factor: int) -> None:
        for key, c in cost.items():
            if key not in self.counts:
                raise StructuralError(f"unknown ledger key {key!r}")
            self.counts[key] += c * factor

    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "QueryLedger") -> None:
        for key, c in other.counts.items():
            self.counts[key] += c


@dataclass
class PurifiedOracle:
    """A concrete unitary realizing purified query access for one distribution."""

    source: Distribution
    style: str
    matrix: np.ndarray  # dense n^2 x n^2 unitary on registers A, B
    ledger: QueryLedger
    name: str = "p"  # ledger attribution: "p" or "q"

    @property
    def n(self) -> int:
        return self.source.n

    def op(self) -> MatrixOp:
        return MatrixOp(self.matrix, ("A", "B"), self.ledger, (self.name, False))

    def op_dagger(self) -> MatrixOp:
        return self.op().dagger()


def _householder_with_first_column(column: np.ndarray) -> np.ndarray:
    """Real orthogonal matrix whose first column is the given unit vector."""
    dim = column.shape[0]
    w = column.astype(float).copy()
    w[0] -= 1.0
    nw2 = float(w @ w)
    if nw2 < 1e-28:
        return np.eye(dim)
    return np.eye(dim) - 2.0 * np.outer(w, w) / nw2


def build_oracle(
    p: Distribution,
    style: str = "mirror",
    *,
    seed: int = 0,
    ledger: QueryLedger | None = None,
    name: str = "p",
) -> PurifiedOracle:
    """Synthesize a purified oracle for p on registers A ⊗ B.

    ``mirror`` pairs each index with its own environment state
    (|φ_i⟩ = |i⟩); ``permuted`` uses a seeded permutation, which exists to
    verify that downstream results are purification-independent.
    """
    if style not in PURIFICATION_STYLES:
        raise ParameterError(f"unknown purification style {style!r}")
    n = p.n
    if n > DENSE_SUPPORT_LIMIT:
        raise CapacityError(f"dense oracle synthesis limited to n <= {DENSE_SUPPORT_LIMIT}")
    if style == "mirror":
        phi = np.arange(n)
    else:
        phi = np.random.default_rng(seed).permutation(n)
    column = np.zeros(n * n)
    for i, pi in enumerate(p.probs):
        column[phi[i] * n + i] = np.sqrt(pi)
    matrix = _householder_with_first_column(column).astype(complex)
    return PurifiedOracle(p, style, matrix, ledger if ledger is not None else QueryLedger(), name)


def build_copy_unitary(layout: RegisterLayout) -> MatrixOp:
    """Permutation on B ⊗ C sending |i⟩|c⟩ to |i⟩|c + i mod n⟩.

    Restricted to c = 0 this is the index-copy map |i⟩|0⟩ → |i⟩|i⟩; the
    modular addition is the simplest permutation completion.
    """
    n = layout.dims[1]
    if layout.dims[2] != n:
        raise StructuralError("copy unitary needs matching B and C dimensions")
    perm = np.zeros((n * n, n * n))
    for b in range(n):
        for c in range(n):
            perm[b * n + (c + b) % n, b * n + c] = 1.0
    return MatrixOp(perm, ("B", "C"))


def build_tilde(oracle: PurifiedOracle, layout: RegisterLayout) -> Operator:
    """Composite probe U† U_copy U acting on A ⊗ B ⊗ C.

    Each counted application charges the ledger with one oracle call and
    one inverse call.
    """
    if layout.dims[0] != oracle.n or layout.dims[1] != oracle.n:
        raise StructuralError(
            f"layout {layout.dims} does not match oracle support {oracle.n}"
        )
    return Composed([oracle.op(), build_copy_unitary(layout), oracle.op_dagger()])


class ExtractionCheck(NamedTuple):
    max_deviation: float
    residual_projection: float


def extraction_check(oracle: PurifiedOracle) -> ExtractionCheck:
    """Verify that the probe writes each p_k onto the (0,0,k) amplitude.

    Returns the max deviation |⟨0,0,k|Ũ|0,0,0⟩ − p_k| over k, and the
    squared norm of what remains in the (0,0,·) block after subtracting
    those amplitudes (zero when the off-block residual is orthogonal, as
    it must be).  The probe is applied once, so the ledger picks up one
    call and one inverse.
    """
    n = oracle.n
    if n > DENSE_SUPPORT_LIMIT:
        raise CapacityError(f"extraction check limited to n <= {DENSE_SUPPORT_LIMIT}")
    layout = RegisterLayout((n, n, n, 1))
    tilde = build_tilde(oracle, layout)
    state = tilde.apply(layout.zero_state(), layout)
    amps = state.reshape(layout.dims)[0, 0, :, 0]
    probs = oracle.source.as_array()
    max_dev = float(np.max(np.abs(amps - probs)))
    residual = state.copy().reshape(layout.dims)
    residual[0, 0, :, 0] -= probs
    resid_proj = projector_norm_sq(residual.reshape(-1), (0, 0, None, None), layout)
    return ExtractionCheck(max_dev, resid_proj)


def controlled(op: Operator, control_register: str, control_value: int) -> Controlled:
    """Block operator: ``op`` when the control holds the value, identity otherwise.

    Counted applications of oracle factors inside ``op`` are attributed to
    the ctrl ledger keys.
    """
    return Controlled(op, control_register, control_value)


def b_marginal(oracle: PurifiedOracle) -> np.ndarray:
    """Analytic computational-basis marginal of register B of U|0⟩|0⟩."""
    n = oracle.n
    column = oracle.matrix[:, 0].reshape(n, n)
    return np.sum(np.abs(column) ** 2, axis=0)
