"""Multi-fidelity Gaussian-process surrogates with gradient enhancement.

Kriging, gradient-enhanced Kriging, two-fidelity Cokriging and
gradient-enhanced Cokriging with a Gaussian kernel, trained by a seedable
genetic algorithm on concentrated likelihoods.
"""
__version__ = "0.1.0"

from .data import GradObservationSet, MultiFidelityData
from .errors import MFGPError
from .kernel import Kernel, KernelParams
from .optimizer import GAConfig
from .surrogates import (
    COKRIGING,
    GECOKRIGING,
    GEKRIGING,
    KRIGING,
    Hyperparameters,
    Prediction,
    Predictions,
    TrainConfig,
    TrainedSurrogate,
    predict,
    train,
    train_cokriging,
    train_cokriging_gradient_baseline,
    train_gecokriging,
    train_gekriging,
    train_kriging,
)

__all__ = [
    "COKRIGING",
    "GECOKRIGING",
    "GEKRIGING",
    "KRIGING",
    "GAConfig",
    "GradObservationSet",
    "Hyperparameters",
    "Kernel",
    "KernelParams",
    "MFGPError",
    "MultiFidelityData",
    "Prediction",
    "Predictions",
    "TrainConfig",
    "TrainedSurrogate",
    "predict",
    "train",
    "train_cokriging",
    "train_cokriging_gradient_baseline",
    "train_gecokriging",
    "train_gekriging",
    "train_kriging",
]
