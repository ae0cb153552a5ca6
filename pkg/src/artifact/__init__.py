"""Lyapunov spectra, entropy formulas and orbit-space counting for commuting pairs of maps."""

from .errors import (ArtifactError, DegenerateFrameError, InvalidInputError, InvalidStateError,
                     ResourceError, UnsupportedMapError)

__version__ = "0.1.0"

__all__ = ["ArtifactError", "DegenerateFrameError", "InvalidInputError", "InvalidStateError",
           "ResourceError", "UnsupportedMapError", "__version__"]
