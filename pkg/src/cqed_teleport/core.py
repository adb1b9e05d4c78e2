"""
Dense linear algebra over composite Hilbert spaces.

Basis convention, global to the package: on every qubit index 0 is |↓⟩
(ground) and index 1 is |↑⟩ (excited), so σ_z = |↑⟩⟨↑| − |↓⟩⟨↓| and
σ_+ = |↑⟩⟨↓|. Composite spaces use the Kronecker convention with the left
factor as the most significant index; protocol states are ordered
(qubit1, resonator, qubit2).
"""

import functools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from cqed_teleport._enums import Pauli, Subsystem
from cqed_teleport._types import ComplexArray
from cqed_teleport.exceptions import (
    StateSupportError,
    TeleportLayoutError,
    TeleportValueError,
)

HERMITIAN_ATOL = 1e-12
ORTHOGONALITY_ATOL = 1e-10
PROBABILITY_ATOL = 1e-6

DOWN, UP = 0, 1

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

PAULI_MATRICES: dict[Pauli, ComplexArray] = {
    Pauli.I: IDENTITY_2,
    Pauli.X: SIGMA_X,
    Pauli.Y: SIGMA_Y,
    Pauli.Z: SIGMA_Z,
}

for _matrix in (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS):
    _matrix.flags.writeable = False


def destroy(levels: int) -> ComplexArray:
    """Truncated annihilation operator on Fock states |0⟩..|levels-1⟩."""
    return np.diag(np.sqrt(np.arange(1, levels)), k=1).astype(complex)


def _frozen(values, ndim: int) -> ComplexArray:
    array = np.array(values, dtype=complex)
    if ndim == 1:
        array = array.ravel()
    array.flags.writeable = False
    return array


def _is_hermitian(elements: ComplexArray, atol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(elements), initial=0.0)))
    return bool(
        np.allclose(elements, elements.conj().T, rtol=0.0, atol=atol * scale)
    )


@dataclass(frozen=True, slots=True)
class HilbertLayout:
    """Ordered subsystem dimensions, optionally labelled."""

    dims: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        dims = tuple(int(dim) for dim in self.dims)
        if not dims:
            raise TeleportLayoutError("A layout needs at least one subsystem")
        if any(dim < 2 for dim in dims):
            raise TeleportLayoutError(
                f"Subsystem dimensions must be at least 2, got {dims}"
            )
        object.__setattr__(self, "dims", dims)
        if self.labels is None:
            return
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != len(dims) or len(set(labels)) != len(labels):
            raise TeleportLayoutError(
                f"Labels {labels} do not name the {len(dims)} subsystems uniquely"
            )
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def dimension(self) -> int:
        return math.prod(self.dims)

    def has(self, label: str) -> bool:
        return self.labels is not None and label in self.labels

    def index(self, subsystem: str | int) -> int:
        """Position of a subsystem given by label or position."""
        if isinstance(subsystem, str):
            if not self.has(subsystem):
                raise TeleportLayoutError(
                    f"Layout {self.labels} has no subsystem '{subsystem}'"
                )
            return self.labels.index(subsystem)
        if not 0 <= subsystem < len(self.dims):
            raise TeleportLayoutError(
                f"Subsystem index {subsystem} out of range for {self.dims}"
            )
        return subsystem

    def concat(self, other: "HilbertLayout") -> "HilbertLayout":
        labels = None
        if (
            self.labels is not None
            and other.labels is not None
            and not set(self.labels) & set(other.labels)
        ):
            labels = self.labels + other.labels
        return HilbertLayout(self.dims + other.dims, labels)

    def subset(self, positions: Sequence[int]) -> "HilbertLayout":
        labels = (
            None
            if self.labels is None
            else tuple(self.labels[i] for i in positions)
        )
        return HilbertLayout(tuple(self.dims[i] for i in positions), labels)


def protocol_layout(n_max: int) -> HilbertLayout:
    """The (qubit1, resonator, qubit2) layout used by every protocol state."""
    if n_max < 1:
        raise TeleportLayoutError(
            f"The resonator needs at least Fock states |0⟩ and |1⟩, got n_max={n_max}"
        )
    return HilbertLayout(
        (2, n_max + 1, 2),
        (Subsystem.QUBIT1, Subsystem.RESONATOR, Subsystem.QUBIT2),
    )


def qubit_layout(label: str = Subsystem.QUBIT1) -> HilbertLayout:
    return HilbertLayout((2,), (label,))


@dataclass(frozen=True, slots=True)
class QuantumState:
    layout: HilbertLayout
    amplitudes: ComplexArray

    def __post_init__(self) -> None:
        amplitudes = _frozen(self.amplitudes, ndim=1)
        if amplitudes.size != self.layout.dimension:
            raise TeleportLayoutError(
                f"{amplitudes.size} amplitudes do not fit layout {self.layout.dims}"
            )
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "QuantumState":
        norm = self.norm
        if norm == 0.0:
            raise StateSupportError("Cannot normalize the zero vector")
        return QuantumState(self.layout, self.amplitudes / norm)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(
            self.layout, np.outer(self.amplitudes, self.amplitudes.conj())
        )

    def tensor_view(self) -> ComplexArray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.layout.dims)


@dataclass(frozen=True, slots=True)
class DensityMatrix:
    layout: HilbertLayout
    elements: ComplexArray

    def __post_init__(self) -> None:
        elements = _frozen(self.elements, ndim=2)
        dim = self.layout.dimension
        if elements.shape != (dim, dim):
            raise TeleportLayoutError(
                f"Matrix of shape {elements.shape} does not fit layout {self.layout.dims}"
            )
        object.__setattr__(self, "elements", elements)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.elements))

    @property
    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(hermitian)[0])

    def validate(
        self,
        hermitian_atol: float = 1e-9,
        trace_atol: float = 1e-8,
        min_eigenvalue: float = -1e-8,
    ) -> "DensityMatrix":
        """Raise unless the matrix is a physical density matrix."""
        if not np.allclose(
            self.elements, self.elements.conj().T, rtol=0.0, atol=hermitian_atol
        ):
            raise TeleportValueError("Density matrix is not Hermitian")
        if abs(self.trace - 1.0) > trace_atol:
            raise TeleportValueError(
                f"Density matrix trace {self.trace.real:.3e} differs from 1"
            )
        if (lowest := self.min_eigenvalue) < min_eigenvalue:
            raise TeleportValueError(
                f"Density matrix has negative eigenvalue {lowest:.3e}"
            )
        return self

    def symmetrized(self) -> "DensityMatrix":
        return DensityMatrix(
            self.layout, 0.5 * (self.elements + self.elements.conj().T)
        )

    def normalized(self) -> "DensityMatrix":
        trace = self.trace.real
        if trace <= 0.0:
            raise StateSupportError("Density matrix has no positive trace")
        return DensityMatrix(self.layout, self.elements / trace)


@dataclass(frozen=True, slots=True)
class OperatorMatrix:
    layout: HilbertLayout
    elements: ComplexArray
    hermitian_flag: bool = False

    # numpy scalars defer to __rmul__
    __array_ufunc__ = None

    def __post_init__(self) -> None:
        elements = _frozen(self.elements, ndim=2)
        dim = self.layout.dimension
        if elements.shape != (dim, dim):
            raise TeleportLayoutError(
                f"Operator of shape {elements.shape} does not fit layout {self.layout.dims}"
            )
        if self.hermitian_flag and not _is_hermitian(elements, HERMITIAN_ATOL):
            raise TeleportValueError("Operator flagged Hermitian is not")
        object.__setattr__(self, "elements", elements)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return _is_hermitian(self.elements, atol)

    def apply(self, state: QuantumState) -> QuantumState:
        _require_same_dims(self.layout, state.layout)
        return QuantumState(state.layout, self.elements @ state.amplitudes)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _require_same_dims(self.layout, other.layout)
        return OperatorMatrix(
            self.layout,
            self.elements + other.elements,
            self.hermitian_flag and other.hermitian_flag,
        )

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "OperatorMatrix":
        return OperatorMatrix(
            self.layout,
            scalar * self.elements,
            self.hermitian_flag and complex(scalar).imag == 0.0,
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _require_same_dims(self.layout, other.layout)
        return OperatorMatrix(self.layout, self.elements @ other.elements)


def _require_same_dims(a: HilbertLayout, b: HilbertLayout) -> None:
    if a.dims != b.dims:
        raise TeleportValueError(f"Layout mismatch: {a.dims} vs {b.dims}")


def zero_operator(layout: HilbertLayout) -> OperatorMatrix:
    return OperatorMatrix(
        layout,
        np.zeros((layout.dimension, layout.dimension)),
        hermitian_flag=True,
    )


def embed(
    local: ComplexArray, layout: HilbertLayout, subsystem: str | int
) -> OperatorMatrix:
    """Place a single-subsystem matrix into the composite space."""
    position = layout.index(subsystem)
    local = np.asarray(local, dtype=complex)
    if local.shape != (layout.dims[position],) * 2:
        raise TeleportLayoutError(
            f"Local operator {local.shape} does not match subsystem "
            f"'{subsystem}' of dimension {layout.dims[position]}"
        )
    factors = [
        local if i == position else np.eye(dim)
        for i, dim in enumerate(layout.dims)
    ]
    return OperatorMatrix(
        layout,
        functools.reduce(np.kron, factors),
        _is_hermitian(local, HERMITIAN_ATOL),
    )


def basis_state(layout: HilbertLayout, indices: Sequence[int]) -> QuantumState:
    """Computational basis state with one index per subsystem."""
    amplitudes = np.zeros(layout.dimension, dtype=complex)
    amplitudes[np.ravel_multi_index(tuple(indices), layout.dims)] = 1.0
    return QuantumState(layout, amplitudes)


def _tensor_pair(a, b):
    layout = a.layout.concat(b.layout)
    match a, b:
        case QuantumState(), QuantumState():
            return QuantumState(layout, np.kron(a.amplitudes, b.amplitudes))
        case DensityMatrix(), DensityMatrix():
            return DensityMatrix(layout, np.kron(a.elements, b.elements))
        case OperatorMatrix(), OperatorMatrix():
            return OperatorMatrix(
                layout,
                np.kron(a.elements, b.elements),
                a.hermitian_flag and b.hermitian_flag,
            )
    raise TeleportValueError(
        f"Cannot tensor {type(a).__name__} with {type(b).__name__}"
    )


def tensor(a, b, *more):
    """Kronecker product of states, density matrices or operators."""
    return functools.reduce(_tensor_pair, more, _tensor_pair(a, b))


def partial_trace(
    rho: DensityMatrix, keep: Iterable[int | str]
) -> DensityMatrix:
    """Trace out every subsystem not in ``keep``; kept order is preserved."""
    layout = rho.layout
    try:
        kept = sorted({layout.index(subsystem) for subsystem in keep})
    except TeleportLayoutError as e:
        raise TeleportValueError(f"Invalid keep set: {e}") from e
    if not kept:
        raise TeleportValueError("The keep set must name at least one subsystem")

    count = len(layout)
    dropped = [i for i in range(count) if i not in kept]
    kept_dim = math.prod(layout.dims[i] for i in kept)
    dropped_dim = math.prod(layout.dims[i] for i in dropped)

    order = kept + dropped
    tensor_form = rho.elements.reshape(layout.dims * 2).transpose(
        order + [i + count for i in order]
    )
    blocks = tensor_form.reshape(kept_dim, dropped_dim, kept_dim, dropped_dim)
    return DensityMatrix(
        layout.subset(kept), np.trace(blocks, axis1=1, axis2=3)
    )


def fidelity(a: QuantumState, b: QuantumState | DensityMatrix) -> float:
    """Overlap fidelity; insensitive to the global phase of either argument."""
    if not isinstance(a, QuantumState):
        raise TeleportValueError(
            "Fidelity needs a pure first argument; mixed-mixed fidelity is not supported"
        )
    _require_same_dims(a.layout, b.layout)
    if isinstance(b, QuantumState):
        value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    else:
        value = np.vdot(a.amplitudes, b.elements @ a.amplitudes).real
    return float(min(1.0, max(0.0, value)))


def expectation(
    state: QuantumState | DensityMatrix, op: OperatorMatrix
) -> complex:
    _require_same_dims(state.layout, op.layout)
    if isinstance(state, QuantumState):
        return complex(np.vdot(state.amplitudes, op.elements @ state.amplitudes))
    return complex(np.trace(state.elements @ op.elements))


def apply_operator(
    op: OperatorMatrix, state: QuantumState | DensityMatrix
) -> QuantumState | DensityMatrix:
    """U|ψ⟩ for a pure state, UρU† for a density matrix."""
    _require_same_dims(op.layout, state.layout)
    if isinstance(state, QuantumState):
        return QuantumState(state.layout, op.elements @ state.amplitudes)
    return DensityMatrix(
        state.layout, op.elements @ state.elements @ op.elements.conj().T
    )


@dataclass(frozen=True, slots=True)
class MeasurementOutcome:
    index: int
    probability: float
    state: QuantumState | DensityMatrix


def outcome_probabilities(
    state: QuantumState | DensityMatrix, projectors: Sequence[OperatorMatrix]
) -> np.ndarray:
    if isinstance(state, QuantumState):
        return np.array(
            [
                np.linalg.norm(p.elements @ state.amplitudes) ** 2
                for p in projectors
            ]
        )
    return np.array(
        [np.trace(p.elements @ state.elements).real for p in projectors]
    )


def _check_orthogonal(projectors: Sequence[OperatorMatrix]) -> None:
    for i, first in enumerate(projectors):
        for second in projectors[i + 1 :]:
            overlap = np.max(np.abs(first.elements @ second.elements))
            if overlap > ORTHOGONALITY_ATOL:
                raise TeleportValueError(
                    f"Projectors are not mutually orthogonal (overlap {overlap:.2e})"
                )


def measure_projective(
    state: QuantumState | DensityMatrix,
    projectors: Sequence[OperatorMatrix],
    rng: np.random.Generator,
) -> MeasurementOutcome:
    """
    Sample one outcome of a projective measurement with Born probabilities.

    Args:
        state: Pure state or density matrix to measure.
        projectors: Mutually orthogonal projectors, in outcome order.
        rng: Caller-owned generator; identical seeds give identical outcomes.

    Returns:
        MeasurementOutcome: Outcome index, its probability and the collapsed,
            renormalized state.

    Raises:
        TeleportValueError: If the projectors are not mutually orthogonal.
        StateSupportError: If the outcome probabilities do not sum to one.
    """
    for projector in projectors:
        _require_same_dims(state.layout, projector.layout)
    _check_orthogonal(projectors)

    probabilities = outcome_probabilities(state, projectors)
    total = probabilities.sum()
    if abs(total - 1.0) > PROBABILITY_ATOL:
        raise StateSupportError(
            f"Outcome probabilities sum to {total:.9f}, the state leaves the "
            "projectors' support"
        )

    cumulative = np.cumsum(probabilities / total)
    index = min(
        int(np.searchsorted(cumulative, rng.random(), side="right")),
        len(projectors) - 1,
    )
    probability = float(probabilities[index])
    projector = projectors[index].elements
    if isinstance(state, QuantumState):
        collapsed = QuantumState(
            state.layout,
            projector @ state.amplitudes / math.sqrt(probability),
        )
    else:
        collapsed = DensityMatrix(
            state.layout, projector @ state.elements @ projector / probability
        )
    return MeasurementOutcome(index, probability, collapsed)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    if rho.layout.dims != (2, 2):
        raise TeleportValueError(
            f"Concurrence needs a (2, 2) layout, got {rho.layout.dims}"
        )
    elements = 0.5 * (rho.elements + rho.elements.conj().T)
    flip = np.kron(SIGMA_Y, SIGMA_Y)
    spin_flipped = flip @ elements.conj() @ flip

    weights, vectors = np.linalg.eigh(elements)
    root = vectors @ np.diag(np.sqrt(np.clip(weights, 0.0, None))) @ vectors.conj().T
    spectrum = np.linalg.eigvalsh(root @ spin_flipped @ root)
    lambdas = np.sort(np.sqrt(np.clip(spectrum, 0.0, None)))[::-1]
    return float(max(0.0, lambdas[0] - lambdas[1:].sum()))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator from a 64-bit seed."""
    if not 0 <= seed < 2**64:
        raise TeleportValueError(f"Seed {seed} is not a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(seed))


def random_qubit_state(rng: np.random.Generator) -> tuple[complex, complex]:
    """Haar-random coefficients (C0, C1) of a single qubit."""
    real, imag = rng.normal(size=(2, 2))
    amplitudes = real + 1j * imag
    amplitudes /= np.linalg.norm(amplitudes)
    return complex(amplitudes[0]), complex(amplitudes[1])
