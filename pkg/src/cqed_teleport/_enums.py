from enum import IntEnum, StrEnum


class Subsystem(StrEnum):
    QUBIT1 = "qubit1"
    RESONATOR = "resonator"
    QUBIT2 = "qubit2"


class QubitIndex(IntEnum):
    QUBIT1 = 0
    QUBIT2 = 1


class Axis(StrEnum):
    X = "x"
    Y = "y"
    Z = "z"


class PulseKind(StrEnum):
    XY = "xy"
    Z = "z"


class PulseMode(StrEnum):
    IDEAL = "ideal"
    INTEGRATED = "integrated"


class ChannelMode(StrEnum):
    IDEAL = "ideal"
    JC_PULSE = "jc_pulse"


class MeasurementMode(StrEnum):
    IDEAL = "ideal"
    PHYSICAL = "physical"


class Frame(StrEnum):
    LAB = "lab"
    ROTATING = "rotating"


class BellLabel(StrEnum):
    PSI_PLUS = "Psi+"
    PSI_MINUS = "Psi-"
    PHI_PLUS = "Phi+"
    PHI_MINUS = "Phi-"


class Pauli(StrEnum):
    I = "I"  # noqa: E741
    X = "X"
    Y = "Y"
    Z = "Z"


class OutputFormat(StrEnum):
    CSV = "csv"
    JSON = "json"


class ExperimentType(StrEnum):
    TELEPORT = "teleport"
    RABI = "rabi"
    DISPERSIVE_CHECK = "dispersive-check"
    TOMO = "tomo"


QUBIT_LABELS: tuple[Subsystem, Subsystem] = (
    Subsystem.QUBIT1,
    Subsystem.QUBIT2,
)
