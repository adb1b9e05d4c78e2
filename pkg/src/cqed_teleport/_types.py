from dataclasses import dataclass, field
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from cqed_teleport._enums import Axis, Pauli

ComplexArray: TypeAlias = npt.NDArray[np.complex128]
RealArray: TypeAlias = npt.NDArray[np.float64]

AxisSpec: TypeAlias = Axis | float
Drive: TypeAlias = tuple[complex, float]
PauliPair: TypeAlias = tuple[Pauli, Pauli]
ShotCount: TypeAlias = tuple[int, int]

CellValue: TypeAlias = str | int | float
Row: TypeAlias = dict[str, CellValue]
Rows: TypeAlias = list[Row]


@dataclass(slots=True, frozen=True)
class OscillationFit:
    frequency: float
    amplitude: float
    phase: float
    offset: float
    rms_residual: float


@dataclass(slots=True, frozen=True)
class CoherenceRates:
    gamma1: float
    gamma2: float
    gamma_phi: float


@dataclass(slots=True, frozen=True)
class ResonatorDamping:
    kappa: float
    photon_lifetime: float


@dataclass(slots=True)
class ResultSet:
    """Rows of one experiment run plus an optional time series."""

    columns: list[str]
    rows: Rows = field(default_factory=list)
    summary: Row = field(default_factory=dict)
    series_columns: list[str] = field(default_factory=list)
    series: Rows = field(default_factory=list)
