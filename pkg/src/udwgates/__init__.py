"""Qubit gates mediated by a smeared scalar field, evaluated as quantum channels."""

__version__ = "0.1.0"

from .channels import QuantumChannel, channel_from_circuit, field_channels, reference_channels  # noqa: E402
from .field import (  # noqa: E402
    DisplacementWord,
    FieldCalibration,
    FockBackend,
    SmearingSpec,
    calibrate_gamma,
    coherent_overlap,
    spectral_moments,
    vacuum_expectation,
    weyl_reduce,
)
from .metrics import capacity_estimate, coherent_information, diamond_distance, trace_distance  # noqa: E402

__all__ = [
    "DisplacementWord",
    "FieldCalibration",
    "FockBackend",
    "QuantumChannel",
    "SmearingSpec",
    "calibrate_gamma",
    "capacity_estimate",
    "channel_from_circuit",
    "coherent_information",
    "coherent_overlap",
    "diamond_distance",
    "field_channels",
    "reference_channels",
    "spectral_moments",
    "trace_distance",
    "vacuum_expectation",
    "weyl_reduce",
]
