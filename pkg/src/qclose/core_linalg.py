"""Dense complex linear algebra over a fixed four-register state space.

The simulator works on a Hilbert space split into four named registers
A, B, C, D (most significant first).  A flat state index is the
mixed-radix encoding of the per-register indices, so non-power-of-two
register dimensions are supported directly without qubit padding.
States are plain 1-D ``numpy`` arrays of ``complex128`` amplitudes;
operators are either dense matrices on a contiguous block of registers
or lazy compositions of such factors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import StructuralError

REGISTERS = ("A", "B", "C", "D")

#: pattern entry meaning "match every basis index of this register"
ANY = None


@dataclass(frozen=True)
class RegisterLayout:
    """Dimensions of the four registers, in A, B, C, D order."""

    dims: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.dims) != 4:
            raise StructuralError(f"expected 4 register dims, got {self.dims}")
        if any(int(d) < 1 for d in self.dims):
            raise StructuralError(f"register dims must be positive: {self.dims}")
        if self.dims[1] != self.dims[2]:
            raise StructuralError(
                f"register C must have the dimension of register B: {self.dims}"
            )
        if self.dims[3] not in (1, 2):
            raise StructuralError(f"register D must be a qubit: {self.dims}")

    @classmethod
    def for_support(cls, n: int) -> "RegisterLayout":
        """Layout used by the tester for distributions on n outcomes."""
        return cls((n, n, n, 2))

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def axis(self, register: str) -> int:
        try:
            return REGISTERS.index(register)
        except ValueError:
            raise StructuralError(f"unknown register {register!r}") from None

    def dim_of(self, registers: tuple[str, ...]) -> int:
        return int(np.prod([self.dims[self.axis(r)] for r in registers]))

    def with_dim(self, register: str, dim: int) -> "RegisterLayout":
        dims = list(self.dims)
        dims[self.axis(register)] = dim
        return dataclasses.replace(self, dims=tuple(dims))

    def zero_state(self) -> np.ndarray:
        state = np.zeros(self.total_dim, dtype=complex)
        state[0] = 1.0
        return state

    def basis_index(self, indices: tuple[int, ...]) -> int:
        """Flat index of |a⟩|b⟩|c⟩|d⟩ under mixed-radix encoding."""
        if len(indices) != 4:
            raise StructuralError(f"expected 4 register indices, got {indices}")
        flat = 0
        for i, d in zip(indices, self.dims):
            if not 0 <= i < d:
                raise StructuralError(f"index {indices} out of range for {self.dims}")
            flat = flat * d + i
        return flat


def norm_sq(state: np.ndarray) -> float:
    return float(np.real(np.vdot(state, state)))


def tensor_apply(
    matrix: np.ndarray,
    targets: tuple[str, ...],
    state: np.ndarray,
    layout: RegisterLayout,
) -> np.ndarray:
    """Apply ``matrix`` to the listed registers, identity elsewhere.

    ``matrix`` must be square with dimension equal to the product of the
    target register dimensions; the flat result has the same shape as
    ``state``.
    """
    if state.size != layout.total_dim:
        raise StructuralError(
            f"state dim {state.size} does not match layout total {layout.total_dim}"
        )
    axes = [layout.axis(r) for r in targets]
    if len(set(axes)) != len(axes):
        raise StructuralError(f"duplicate target registers: {targets}")
    tdims = tuple(layout.dims[a] for a in axes)
    block = int(np.prod(tdims))
    if matrix.shape != (block, block):
        raise StructuralError(
            f"operator shape {matrix.shape} does not match target dims {tdims}"
        )
    psi = np.asarray(state, dtype=complex).reshape(layout.dims)
    op = matrix.reshape(tdims + tdims)
    k = len(axes)
    out = np.tensordot(op, psi, axes=(tuple(range(k, 2 * k)), tuple(axes)))
    out = np.moveaxis(out, tuple(range(k)), tuple(axes))
    return out.reshape(-1)


def projector_norm_sq(
    state: np.ndarray,
    pattern: tuple[int | None, ...],
    layout: RegisterLayout,
) -> float:
    """Squared norm of the component matching a per-register basis pattern.

    Each pattern entry is either a fixed basis index for that register or
    ``ANY`` (``None``) to match every index.
    """
    if len(pattern) != 4:
        raise StructuralError(f"pattern must name all 4 registers, got {pattern}")
    idx = []
    for p, d in zip(pattern, layout.dims):
        if p is ANY:
            idx.append(slice(None))
        else:
            if not 0 <= int(p) < d:
                raise StructuralError(f"pattern {pattern} out of range for {layout.dims}")
            idx.append(int(p))
    psi = state.reshape(layout.dims)
    block = psi[tuple(idx)]
    return float(np.sum(np.abs(block) ** 2))


def projector_diagonal(
    pattern: tuple[int | None, ...], layout: RegisterLayout
) -> np.ndarray:
    """0/1 diagonal of the projector onto a basis pattern, as a flat vector."""
    if len(pattern) != 4:
        raise StructuralError(f"pattern must name all 4 registers, got {pattern}")
    mask = np.zeros(layout.dims, dtype=float)
    idx = tuple(slice(None) if p is ANY else int(p) for p in pattern)
    mask[idx] = 1.0
    return mask.reshape(-1)


class Operator:
    """Base class for operators acting on a subset of the registers."""

    @property
    def registers(self) -> frozenset[str]:
        raise NotImplementedError

    def apply(
        self,
        state: np.ndarray,
        layout: RegisterLayout,
        counting: bool = True,
        _controlled: bool = False,
    ) -> np.ndarray:
        raise NotImplementedError

    def dagger(self) -> "Operator":
        raise NotImplementedError

    def to_dense(self, layout: RegisterLayout) -> np.ndarray:
        raise NotImplementedError


@dataclass
class MatrixOp(Operator):
    """Dense matrix on a contiguous block of named registers.

    ``query_label`` tags oracle invocations: a ``(name, dagger)`` pair such
    as ``("p", False)``; every counted application records one entry in
    ``ledger`` (controlled applications are attributed to the ctrl key).
    """

    matrix: np.ndarray
    targets: tuple[str, ...]
    ledger: "object | None" = None
    query_label: tuple[str, bool] | None = None

    @property
    def registers(self) -> frozenset[str]:
        return frozenset(self.targets)

    def apply(self, state, layout, counting=True, _controlled=False):
        if counting and self.ledger is not None and self.query_label is not None:
            name, dag = self.query_label
            self.ledger.record(name, dagger=dag, controlled=_controlled)
        return tensor_apply(self.matrix, self.targets, state, layout)

    def dagger(self) -> "MatrixOp":
        label = None
        if self.query_label is not None:
            name, dag = self.query_label
            label = (name, not dag)
        return MatrixOp(self.matrix.conj().T, self.targets, self.ledger, label)

    def to_dense(self, layout):
        axes = sorted(layout.axis(r) for r in self.targets)
        if axes != list(range(axes[0], axes[0] + len(axes))):
            raise StructuralError(
                f"dense form requires contiguous registers, got {self.targets}"
            )
        pre = int(np.prod([layout.dims[a] for a in range(axes[0])], initial=1))
        post = int(
            np.prod([layout.dims[a] for a in range(axes[-1] + 1, 4)], initial=1)
        )
        return np.kron(np.kron(np.eye(pre), self.matrix), np.eye(post))


@dataclass
class Composed(Operator):
    """Product of factors, applied in list order (first entry acts first)."""

    factors: list[Operator] = field(default_factory=list)

    @property
    def registers(self) -> frozenset[str]:
        regs: frozenset[str] = frozenset()
        for f in self.factors:
            regs |= f.registers
        return regs

    def apply(self, state, layout, counting=True, _controlled=False):
        for f in self.factors:
            state = f.apply(state, layout, counting, _controlled)
        return state

    def dagger(self) -> "Composed":
        return Composed([f.dagger() for f in reversed(self.factors)])

    def to_dense(self, layout):
        dense = np.eye(layout.total_dim, dtype=complex)
        for f in self.factors:
            dense = f.to_dense(layout) @ dense
        return dense


@dataclass
class Controlled(Operator):
    """Apply the wrapped operator only when the control register holds a value."""

    op: Operator
    control: str
    value: int

    def __post_init__(self):
        if self.control in self.op.registers:
            raise StructuralError(
                f"control register {self.control!r} overlaps operator targets"
            )

    @property
    def registers(self) -> frozenset[str]:
        return self.op.registers | {self.control}

    def apply(self, state, layout, counting=True, _controlled=False):
        ax = layout.axis(self.control)
        if not 0 <= self.value < layout.dims[ax]:
            raise StructuralError(
                f"control value {self.value} out of range for {self.control}"
            )
        psi = np.array(state, dtype=complex).reshape(layout.dims)
        sub = np.expand_dims(np.take(psi, self.value, axis=ax), ax)
        reduced = layout.with_dim(self.control, 1)
        out_sub = self.op.apply(sub.reshape(-1), reduced, counting, _controlled=True)
        idx = [slice(None)] * 4
        idx[ax] = self.value
        psi[tuple(idx)] = out_sub.reshape(sub.shape).squeeze(ax)
        return psi.reshape(-1)

    def dagger(self) -> "Controlled":
        return Controlled(self.op.dagger(), self.control, self.value)

    def to_dense(self, layout):
        # The control must be the last register so the kron split is valid.
        ax = layout.axis(self.control)
        if ax != 3:
            raise StructuralError("dense controlled form supports control on D only")
        d_ctrl = layout.dims[3]
        reduced = layout.with_dim(self.control, 1)
        sub = self.op.to_dense(reduced)
        sel = np.zeros((d_ctrl, d_ctrl))
        sel[self.value, self.value] = 1.0
        ident = np.eye(sub.shape[0])
        return np.kron(sub, sel) + np.kron(ident, np.eye(d_ctrl) - sel)


# Fixed 2x2 gates used on register D.
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    n = matrix.shape[0]
    return bool(
        np.max(np.abs(matrix.conj().T @ matrix - np.eye(n))) <= tol
    )
