"""Dense state vectors and local operators over labeled tensor-product spaces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels

DEFAULT_DIM_CAP = 2**20
OPERATOR_TOL = 1e-10
EIGEN_TOL = 1e-9
ZERO_NORM = 1e-14


class ImpossibleOutcome(ValueError):
    """Raised when normalizing a vector whose norm vanishes."""


@dataclass(frozen=True)
class SubsystemLabel:
    name: str
    dim: int

    def __post_init__(self):
        if not self.name or any(c in self.name for c in " ,;=[]()"):
            raise ValueError(f"invalid subsystem name {self.name!r}")
        if int(self.dim) < 1:
            raise ValueError(f"subsystem {self.name} has non-positive dimension")


class SpaceDescriptor:
    """Ordered list of subsystems; amplitudes are indexed row-major in this order."""

    def __init__(self, labels: Sequence[SubsystemLabel], cap: int = DEFAULT_DIM_CAP):
        labels = tuple(labels)
        names = [lab.name for lab in labels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate subsystem names in {names}")
        self.labels = labels
        self.total_dim = math.prod(lab.dim for lab in labels)
        if self.total_dim > cap:
            raise ValueError(f"total dimension {self.total_dim} exceeds cap {cap}")
        self._index = {name: k for k, name in enumerate(names)}

    @property
    def names(self) -> tuple:
        return tuple(lab.name for lab in self.labels)

    @property
    def dims(self) -> tuple:
        return tuple(lab.dim for lab in self.labels)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown subsystem label {name!r}") from None

    def dim_of(self, names: Sequence[str]) -> int:
        return math.prod(self.labels[self.index(n)].dim for n in names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, SpaceDescriptor) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        inner = ", ".join(f"{lab.name}:{lab.dim}" for lab in self.labels)
        return f"SpaceDescriptor({inner})"


class StateVector:
    """Complex amplitude vector over a :class:`SpaceDescriptor` (immutable)."""

    def __init__(self, space: SpaceDescriptor, amplitudes):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != space.total_dim:
            raise ValueError(
                f"expected {space.total_dim} amplitudes for {space!r}, got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        self.space = space
        self.amplitudes = amps

    @classmethod
    def basis(cls, space: SpaceDescriptor, index: int) -> "StateVector":
        amps = np.zeros(space.total_dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(space, amps)

    @cached_property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm2)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def allclose(self, other: "StateVector", atol: float = 1e-12) -> bool:
        return self.space == other.space and bool(
            np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)
        )

    def __repr__(self):
        return f"StateVector({self.space!r}, norm2={self.norm2:.6g})"


class OperatorKind(enum.Enum):
    UNITARY = "unitary"
    PROJECTOR = "projector"
    HERMITIAN = "hermitian"


class LocalOperator:
    """A dense matrix acting on an ordered subset of subsystems.

    ``dims`` gives the dimension of each target; it is checked against the
    state's space when the operator is applied.
    """

    def __init__(self, targets, matrix, kind: OperatorKind, dims=None, tol=OPERATOR_TOL):
        targets = (targets,) if isinstance(targets, str) else tuple(targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"repeated target labels {targets}")
        mat = np.array(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("operator matrix must be square")
        if dims is None:
            if len(targets) != 1:
                raise ValueError("dims required for multi-target operators")
            dims = (mat.shape[0],)
        dims = tuple(int(d) for d in dims)
        if len(dims) != len(targets) or math.prod(dims) != mat.shape[0]:
            raise ValueError(f"matrix shape {mat.shape} does not match target dims {dims}")
        _check_kind(mat, kind, tol)
        mat.setflags(write=False)
        self.targets = targets
        self.dims = dims
        self.matrix = mat
        self.kind = kind

    def relabeled(self, targets) -> "LocalOperator":
        return LocalOperator(targets, self.matrix, self.kind, self.dims)

    def __repr__(self):
        return f"LocalOperator({self.kind.value}, targets={self.targets})"


def _check_kind(mat, kind, tol):
    eye = np.eye(mat.shape[0])
    herm_err = np.abs(mat - mat.conj().T).max(initial=0.0)
    if kind is OperatorKind.UNITARY:
        err = np.abs(mat.conj().T @ mat - eye).max(initial=0.0)
        if err > tol:
            raise ValueError(f"matrix is not unitary (|U^dag U - 1| = {err:.3g})")
    elif kind is OperatorKind.PROJECTOR:
        err = max(np.abs(mat @ mat - mat).max(initial=0.0), herm_err)
        if err > tol:
            raise ValueError(f"matrix is not an orthogonal projector (error {err:.3g})")
    elif kind is OperatorKind.HERMITIAN:
        if herm_err > tol:
            raise ValueError(f"matrix is not Hermitian (error {herm_err:.3g})")
    else:
        raise TypeError(f"unknown operator kind {kind!r}")


def unitary(targets, matrix, dims=None) -> LocalOperator:
    return LocalOperator(targets, matrix, OperatorKind.UNITARY, dims)


def projector(targets, matrix, dims=None) -> LocalOperator:
    return LocalOperator(targets, matrix, OperatorKind.PROJECTOR, dims)


def hermitian(targets, matrix, dims=None) -> LocalOperator:
    return LocalOperator(targets, matrix, OperatorKind.HERMITIAN, dims)


# --- state algebra -------------------------------------------------------


def kron_state(factors: Sequence[StateVector]) -> StateVector:
    """Tensor product of states on disjoint spaces, in the given order."""
    if not factors:
        raise ValueError("kron_state needs at least one factor")
    labels = []
    for f in factors:
        labels.extend(f.space.labels)
    names = [lab.name for lab in labels]
    if len(set(names)) != len(names):
        raise ValueError(f"overlapping subsystem labels in tensor product: {names}")
    amps = factors[0].amplitudes
    for f in factors[1:]:
        amps = np.kron(amps, f.amplitudes)
    return StateVector(SpaceDescriptor(labels), amps)


def permute_state(psi: StateVector, names: Sequence[str]) -> StateVector:
    """Same state with subsystems reordered to ``names``."""
    axes = [psi.space.index(n) for n in names]
    if sorted(axes) != list(range(len(psi.space.labels))):
        raise ValueError("permute_state needs every subsystem exactly once")
    labels = [psi.space.labels[k] for k in axes]
    amps = np.transpose(psi.tensor(), axes).reshape(-1)
    return StateVector(SpaceDescriptor(labels), amps)


def _target_axes(op: LocalOperator, space: SpaceDescriptor) -> list:
    axes = []
    for name, dim in zip(op.targets, op.dims):
        k = space.index(name)
        if space.labels[k].dim != dim:
            raise ValueError(
                f"operator expects dim {dim} on {name}, space has {space.labels[k].dim}"
            )
        axes.append(k)
    return axes


def apply_local(op: LocalOperator, psi: StateVector) -> StateVector:
    """Apply ``op`` (identity elsewhere) to ``psi`` without building the full matrix."""
    axes = _target_axes(op, psi.space)
    out = _kernels.apply_matrix(psi.amplitudes, psi.space.dims, axes, op.matrix)
    return StateVector(psi.space, out)


def project(p: LocalOperator, psi: StateVector):
    """Return ``(P psi, ||P psi||**2)``; the vector is not renormalized."""
    if p.kind is not OperatorKind.PROJECTOR:
        raise ValueError(f"project needs a projector, got {p.kind.value}")
    out = apply_local(p, psi)
    return out, out.norm2


def normalize(psi: StateVector) -> StateVector:
    norm = psi.norm
    if norm < ZERO_NORM:
        raise ImpossibleOutcome(f"cannot normalize a vector of norm {norm:.3g}")
    return StateVector(psi.space, psi.amplitudes / norm)


def inner(phi: StateVector, psi: StateVector) -> complex:
    """``<phi|psi>``."""
    if phi.space != psi.space:
        raise ValueError("inner product of states on different spaces")
    return complex(np.vdot(phi.amplitudes, psi.amplitudes))


def expectation(op: LocalOperator, psi: StateVector) -> float:
    value = inner(psi, apply_local(op, psi))
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > OPERATOR_TOL * scale:
        raise ValueError(f"expectation has imaginary part {value.imag:.3g}; operator not Hermitian?")
    return value.real


class Definiteness(NamedTuple):
    """Outcome of an eigenvector test: ``value`` is set only when ``definite``."""

    definite: bool
    value: Optional[float]
    residual: float


def eigencheck(op: LocalOperator, psi: StateVector, tol: float = EIGEN_TOL) -> Definiteness:
    """Decide whether normalized ``psi`` is an eigenvector of Hermitian ``op``."""
    if op.kind is OperatorKind.UNITARY:
        raise ValueError("eigencheck needs a Hermitian observable")
    o_psi = apply_local(op, psi)
    lam = inner(psi, o_psi).real
    residual = float(np.linalg.norm(o_psi.amplitudes - lam * psi.amplitudes))
    if residual < tol:
        return Definiteness(True, lam, residual)
    return Definiteness(False, None, residual)
