"""ISAC-assisted V2I link simulator and trainable predictive beamformer."""

from .config import SimConfig, load_config

__version__ = "0.1.0"

__all__ = ["SimConfig", "load_config", "__version__"]
