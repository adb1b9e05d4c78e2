"""
Hamiltonians of the charge-qubit + resonator device.

Public inputs are linear frequencies in MHz; every constructor multiplies
by 2π exactly once, so returned operators are angular frequencies in
rad/µs and ``exp(-i H t)`` takes ``t`` in microseconds.
"""

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from cqed_teleport import core
from cqed_teleport._enums import QUBIT_LABELS, Frame, QubitIndex, Subsystem
from cqed_teleport._logger import logger
from cqed_teleport._types import (
    CoherenceRates,
    ComplexArray,
    Drive,
    ResonatorDamping,
)
from cqed_teleport.config import DeviceParams
from cqed_teleport.core import HilbertLayout, OperatorMatrix
from cqed_teleport.exceptions import (
    SingularityError,
    TeleportConfigurationError,
    TeleportValueError,
    UnphysicalInputError,
)

TWO_PI = 2.0 * math.pi
DISPERSIVE_VALIDITY_LIMIT = 0.1
_ZERO_DETUNING = 1e-12


class DisplacedHamiltonian(NamedTuple):
    hamiltonian: OperatorMatrix
    rabi: float


class DispersiveHamiltonian(NamedTuple):
    hamiltonian: OperatorMatrix
    chi: float
    warning: bool


@dataclass(frozen=True, slots=True)
class CollapseChannel:
    """A Lindblad channel ``sqrt(2π·rate) · operator``; rate in linear MHz."""

    name: str
    rate: float
    operator: OperatorMatrix

    @property
    def scaled(self) -> ComplexArray:
        return math.sqrt(TWO_PI * self.rate) * self.operator.elements


@dataclass(frozen=True, slots=True)
class CollapseSet:
    channels: tuple[CollapseChannel, ...] = ()

    def __post_init__(self) -> None:
        if any(channel.rate < 0 for channel in self.channels):
            raise TeleportValueError("Collapse rates must be non-negative")

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self) -> Iterator[CollapseChannel]:
        return iter(self.channels)

    @property
    def total_rate(self) -> float:
        return sum(channel.rate for channel in self.channels)


def angular(frequency: float) -> float:
    return TWO_PI * frequency


def qubit_label(qubit: int) -> Subsystem:
    return QUBIT_LABELS[QubitIndex(qubit)]


def _layout(params: DeviceParams, layout: HilbertLayout | None) -> HilbertLayout:
    return layout if layout is not None else core.protocol_layout(params.n_max)


def _hamiltonian(layout: HilbertLayout, elements: ComplexArray) -> OperatorMatrix:
    return OperatorMatrix(
        layout, 0.5 * (elements + elements.conj().T), hermitian_flag=True
    )


def coupling(params: DeviceParams, qubit: int) -> float:
    """Coupling strength of a qubit; an uncoupled qubit has none."""
    return params.g if params.is_coupled(qubit) else 0.0


def require_coupled(params: DeviceParams, qubit: int) -> None:
    if not params.is_coupled(qubit):
        raise TeleportConfigurationError(
            f"{qubit_label(qubit)} is not coupled to the resonator"
        )


def annihilation(layout: HilbertLayout) -> OperatorMatrix:
    levels = layout.dims[layout.index(Subsystem.RESONATOR)]
    return core.embed(core.destroy(levels), layout, Subsystem.RESONATOR)


def number_operator(layout: HilbertLayout) -> OperatorMatrix:
    levels = layout.dims[layout.index(Subsystem.RESONATOR)]
    return core.embed(
        np.diag(np.arange(levels)).astype(complex), layout, Subsystem.RESONATOR
    )


def qubit_operator(
    matrix: ComplexArray, layout: HilbertLayout, qubit: int
) -> OperatorMatrix:
    return core.embed(matrix, layout, qubit_label(qubit))


def _exchange(layout: HilbertLayout, qubit: int) -> ComplexArray:
    """a†σ_- + aσ_+ for one qubit."""
    a = annihilation(layout).elements
    lower = qubit_operator(core.SIGMA_MINUS, layout, qubit).elements
    return a.conj().T @ lower + a @ lower.conj().T


def _transverse(layout: HilbertLayout, qubit: int, phase: float) -> ComplexArray:
    """cos φ σ_x + sin φ σ_y for one qubit."""
    return (
        math.cos(phase) * qubit_operator(core.SIGMA_X, layout, qubit).elements
        + math.sin(phase) * qubit_operator(core.SIGMA_Y, layout, qubit).elements
    )


def cpb_hamiltonian(E_el: float, E_J: float) -> OperatorMatrix:
    """
    Two-level Cooper pair box in the charge basis,
    H = -(E_el σ_z + E_J σ_x)/2, in the units of the arguments.
    """
    return _hamiltonian(
        core.qubit_layout(),
        -0.5 * (E_el * core.SIGMA_Z + E_J * core.SIGMA_X),
    )


def qubit_frequency(E_el: float, E_J: float) -> float:
    """Transition frequency of the box, √(E_el² + E_J²)."""
    return math.hypot(E_el, E_J)


def jaynes_cummings(
    params: DeviceParams,
    qubit: int = 0,
    layout: HilbertLayout | None = None,
    *,
    frame: Frame = Frame.LAB,
) -> OperatorMatrix:
    """
    Jaynes-Cummings Hamiltonian of one qubit and the resonator.

    The lab frame gives ω_r(a†a + 1/2) + (ω_a/2)σ_z + g(a†σ_- + aσ_+).
    The rotating frame at ω_r keeps ((ω_a - ω_r)/2)σ_z + g(a†σ_- + aσ_+).

    Raises:
        TeleportConfigurationError: If the qubit is uncoupled.
    """
    require_coupled(params, qubit)
    layout = _layout(params, layout)
    sigma_z = qubit_operator(core.SIGMA_Z, layout, qubit).elements
    exchange = params.g * _exchange(layout, qubit)
    if frame == Frame.ROTATING:
        detuning = params.qubit_frequency(qubit) - params.omega_r
        return _hamiltonian(layout, TWO_PI * (0.5 * detuning * sigma_z + exchange))

    number = number_operator(layout).elements
    identity = np.eye(layout.dimension)
    return _hamiltonian(
        layout,
        TWO_PI
        * (
            params.omega_r * (number + 0.5 * identity)
            + 0.5 * params.qubit_frequency(qubit) * sigma_z
            + exchange
        ),
    )


def resonant_jaynes_cummings(
    params: DeviceParams,
    qubit: int = 0,
    layout: HilbertLayout | None = None,
    detuning: float = 0.0,
) -> OperatorMatrix:
    """Rotating-frame exchange Hamiltonian of a qubit tuned to the resonator."""
    require_coupled(params, qubit)
    layout = _layout(params, layout)
    sigma_z = qubit_operator(core.SIGMA_Z, layout, qubit).elements
    return _hamiltonian(
        layout,
        TWO_PI * (0.5 * detuning * sigma_z + params.g * _exchange(layout, qubit)),
    )


def drive_hamiltonian(
    drives: Sequence[Drive], t: float, layout: HilbertLayout
) -> OperatorMatrix:
    """Σ_k [ε_k a† e^{-iω_k t} + ε_k* a e^{+iω_k t}] at time ``t`` (µs)."""
    creation = annihilation(layout).elements.conj().T
    term = np.zeros_like(creation)
    for epsilon, omega_d in drives:
        term = term + epsilon * np.exp(-1j * TWO_PI * omega_d * t) * creation
    return _hamiltonian(layout, TWO_PI * (term + term.conj().T))


def dispersive_shift(g: float, delta: float) -> float:
    """χ = g²/Δ."""
    if abs(delta) < _ZERO_DETUNING:
        raise SingularityError("Qubit-resonator detuning Δ is zero, χ is undefined")
    return g * g / delta


def dressed_qubit_frequency(params: DeviceParams, qubit: int = 0) -> float:
    """ω̃_a = ω_a + χ."""
    omega_a = params.qubit_frequency(qubit)
    return omega_a + dispersive_shift(
        coupling(params, qubit), omega_a - params.omega_r
    )


def drive_frequency(params: DeviceParams) -> float:
    """The configured drive frequency, or qubit 1's dressed frequency."""
    if params.omega_d is not None:
        return params.omega_d
    return dressed_qubit_frequency(params, 0)


def rabi_frequency(
    params: DeviceParams, qubit: int = 0, omega_d: float | None = None
) -> float:
    """Ω_R = 2εg/Δ_r for a drive at ``omega_d``."""
    omega_d = drive_frequency(params) if omega_d is None else omega_d
    delta_r = params.omega_r - omega_d
    if abs(delta_r) < _ZERO_DETUNING:
        raise SingularityError(
            "Drive is resonant with the resonator (Δ_r = 0), Ω_R is undefined"
        )
    return 2.0 * params.epsilon * coupling(params, qubit) / delta_r


def mean_photon_number(epsilon: float, delta_r: float) -> float:
    """n̄ ≈ (ε/Δ_r)² for a drive far from the resonator line."""
    if abs(delta_r) < _ZERO_DETUNING:
        raise SingularityError("Δ_r is zero, n̄ is undefined")
    return (epsilon / delta_r) ** 2


def rabi_from_photon_number(g: float, mean_photons: float) -> float:
    """Ω_R ≈ 2g√n̄."""
    return 2.0 * g * math.sqrt(mean_photons)


def displaced_hamiltonian(
    params: DeviceParams,
    qubit: int = 0,
    layout: HilbertLayout | None = None,
    *,
    phase: float = 0.0,
) -> DisplacedHamiltonian:
    """
    Displaced rotating-frame Hamiltonian of a driven qubit.

    Δ_r a†a + (Δ_a/2)σ_z - g(a†σ_- + aσ_+) + (Ω_R/2)(cos φ σ_x + sin φ σ_y)
    with Δ_r = ω_r - ω_d, Δ_a = ω_a - ω_d and Ω_R = 2εg/Δ_r.

    Returns:
        DisplacedHamiltonian: The operator and Ω_R in linear MHz.

    Raises:
        SingularityError: If Δ_r = 0.
    """
    layout = _layout(params, layout)
    omega_d = drive_frequency(params)
    rabi = rabi_frequency(params, qubit, omega_d)
    delta_r = params.omega_r - omega_d
    delta_a = params.qubit_frequency(qubit) - omega_d

    elements = (
        delta_r * number_operator(layout).elements
        + 0.5 * delta_a * qubit_operator(core.SIGMA_Z, layout, qubit).elements
        - coupling(params, qubit) * _exchange(layout, qubit)
        + 0.5 * rabi * _transverse(layout, qubit, phase)
    )
    return DisplacedHamiltonian(_hamiltonian(layout, TWO_PI * elements), rabi)


def dispersive_hamiltonian(
    params: DeviceParams,
    qubit: int = 0,
    layout: HilbertLayout | None = None,
    *,
    rabi: float | None = None,
    phase: float = 0.0,
    photon_shift: bool = False,
) -> DispersiveHamiltonian:
    """
    Dispersive Hamiltonian of a driven qubit far detuned from the resonator.

    Δ_r a†a + (Δ̃_a/2)σ_z + (Ω_R/2)(cos φ σ_x + sin φ σ_y) with χ = g²/Δ,
    ω̃_a = ω_a + χ and Δ̃_a = ω̃_a - ω_d. ``photon_shift`` adds χ a†a σ_z,
    the photon-number dependence whose vacuum sector is ω̃_a. ``rabi``
    overrides Ω_R = 2εg/Δ_r.

    Returns:
        DispersiveHamiltonian: The operator, χ in linear MHz, and whether
            g/|Δ| exceeds the validity limit.

    Raises:
        SingularityError: If Δ = 0, or Δ_r = 0 while Ω_R is derived.
    """
    layout = _layout(params, layout)
    g = coupling(params, qubit)
    omega_a = params.qubit_frequency(qubit)
    delta = omega_a - params.omega_r
    chi = dispersive_shift(g, delta)
    omega_d = drive_frequency(params)
    if rabi is None:
        rabi = rabi_frequency(params, qubit, omega_d)

    ratio = g / abs(delta)
    warning = ratio > DISPERSIVE_VALIDITY_LIMIT
    if warning:
        logger.warning(
            f"g/|Δ| = {ratio:.3f} for {qubit_label(qubit)} exceeds "
            f"{DISPERSIVE_VALIDITY_LIMIT}, the dispersive approximation is unreliable"
        )

    number = number_operator(layout).elements
    sigma_z = qubit_operator(core.SIGMA_Z, layout, qubit).elements
    elements = (
        (params.omega_r - omega_d) * number
        + 0.5 * (omega_a + chi - omega_d) * sigma_z
        + 0.5 * rabi * _transverse(layout, qubit, phase)
    )
    if photon_shift:
        elements = elements + chi * number @ sigma_z
    return DispersiveHamiltonian(
        _hamiltonian(layout, TWO_PI * elements), chi, warning
    )


def exact_dressed_shift(params: DeviceParams, qubit: int = 0) -> float:
    """
    Exact shift of the qubit-like one-excitation level of the
    Jaynes-Cummings Hamiltonian, in linear MHz.

    Compare with χ = g²/Δ; analytically (Δ/2)(√(1 + 4g²/Δ²) - 1).
    """
    label = qubit_label(qubit)
    layout = HilbertLayout((2, 2), (label, Subsystem.RESONATOR))
    hamiltonian = jaynes_cummings(params, qubit, layout).elements / TWO_PI
    excited_vacuum = np.ravel_multi_index((core.UP, 0), layout.dims)
    ground_photon = np.ravel_multi_index((core.DOWN, 1), layout.dims)
    block_indices = [excited_vacuum, ground_photon]
    block = hamiltonian[np.ix_(block_indices, block_indices)]

    bare = block[0, 0].real
    levels = np.linalg.eigvalsh(block)
    dressed = levels[np.argmin(np.abs(levels - bare))]
    return float(dressed - bare)


def rates_from_coherence_times(T1: float, T2: float) -> CoherenceRates:
    """
    Linear rates γ1 = 1/(2πT1), γ2 = 1/(2πT2), γ_φ = γ2 - γ1/2 in MHz.

    Raises:
        TeleportValueError: If a time is not positive.
        UnphysicalInputError: If T2 > 2·T1.
    """
    if T1 <= 0 or T2 <= 0:
        raise TeleportValueError(f"Coherence times must be positive, got T1={T1}, T2={T2}")
    if T2 > 2.0 * T1:
        raise UnphysicalInputError(
            f"T2 = {T2} µs exceeds the relaxation limit 2·T1 = {2.0 * T1} µs"
        )
    gamma1 = 1.0 / (TWO_PI * T1)
    gamma2 = 1.0 / (TWO_PI * T2)
    return CoherenceRates(
        gamma1=gamma1, gamma2=gamma2, gamma_phi=max(0.0, gamma2 - 0.5 * gamma1)
    )


def kappa_from_quality(omega_r: float, Q: float) -> ResonatorDamping:
    """κ = ω_r/Q in linear MHz and the photon lifetime 1/(2πκ) in µs."""
    if Q <= 0:
        raise TeleportValueError(f"Quality factor must be positive, got {Q}")
    if omega_r <= 0:
        raise TeleportValueError(f"Resonator frequency must be positive, got {omega_r}")
    kappa = omega_r / Q
    return ResonatorDamping(kappa=kappa, photon_lifetime=1.0 / (TWO_PI * kappa))


def collapse_operators(
    params: DeviceParams, layout: HilbertLayout | None = None
) -> CollapseSet:
    """
    Lindblad channels present in ``layout``: photon loss √κ·a, and for each
    coupled qubit relaxation √γ1·σ_- and dephasing √(γ_φ/2)·σ_z. Channels
    with zero rate are left out.
    """
    layout = _layout(params, layout)
    channels: list[CollapseChannel] = []
    if layout.has(Subsystem.RESONATOR) and params.kappa > 0:
        channels.append(
            CollapseChannel("kappa", params.kappa, annihilation(layout))
        )
    for qubit, label in enumerate(QUBIT_LABELS):
        if not layout.has(label) or not params.is_coupled(qubit):
            continue
        if params.gamma1 > 0:
            channels.append(
                CollapseChannel(
                    f"gamma1:{label}",
                    params.gamma1,
                    qubit_operator(core.SIGMA_MINUS, layout, qubit),
                )
            )
        if params.gamma_phi > 0:
            channels.append(
                CollapseChannel(
                    f"gamma_phi:{label}",
                    0.5 * params.gamma_phi,
                    qubit_operator(core.SIGMA_Z, layout, qubit),
                )
            )
    return CollapseSet(tuple(channels))
