"""Spectral Galerkin simulator for the 1-D stochastic Landau-Lifshitz-Gilbert equation."""

__version__ = "0.1.0"

from .basis import SpectralBasis, build_basis
from .diagnostics import Observer, TestFunction, TrajectoryRecord
from .ensemble import EnsembleSpec, run_ensemble
from .integrators import IntegrationError, StepperConfig, StepSizeError, integrate
from .model import Anisotropy, InitialDatum, ModelParams, NoiseChannel
from .wiener import WienerPath

__all__ = [
    "Anisotropy", "EnsembleSpec", "InitialDatum", "IntegrationError", "ModelParams",
    "NoiseChannel", "Observer", "SpectralBasis", "StepSizeError", "StepperConfig",
    "TestFunction", "TrajectoryRecord", "WienerPath", "build_basis", "integrate",
    "run_ensemble",
]
