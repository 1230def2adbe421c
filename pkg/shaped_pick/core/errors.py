"""Exception types raised across the training stack."""

from __future__ import annotations


class ShapedPickError(Exception):
    """Base class for every error the package raises on purpose."""


class EnvConfigurationError(ShapedPickError):
    """Raised when reset cannot satisfy its separation constraints."""


class HorizonExceededError(ShapedPickError):
    """Raised when an episode is stepped past its horizon."""


class ShapeMismatchError(ShapedPickError):
    """Raised when arrays, networks or checkpoints disagree on shapes."""


class NonFiniteGradientError(ShapedPickError):
    """Raised when an optimizer receives NaN or infinite gradients."""


class NonFiniteLossError(ShapedPickError):
    """Raised when a training loss becomes NaN or infinite."""

    def __init__(self, message: str, *, epoch: int | None = None) -> None:
        super().__init__(message)
        self.epoch = epoch

    def with_epoch(self, epoch: int) -> NonFiniteLossError:
        return NonFiniteLossError(f"epoch {epoch}: {self}", epoch=epoch)


class ConfigError(ShapedPickError):
    """Raised when a run configuration fails strict parsing."""

    def __init__(self, message: str, *, key: str | None = None) -> None:
        super().__init__(message)
        self.key = key


class EmptyBufferError(ShapedPickError):
    """Raised when sampling from an empty replay buffer."""


class EmptyEpisodeError(ShapedPickError):
    """Raised when an episode without steps is stored."""


class TraceFormatError(ShapedPickError):
    """Raised when a trace CSV cannot be parsed."""


class MissingArtifactError(ShapedPickError):
    """Raised when a run directory lacks a file a command needs."""


__all__ = [
    "ConfigError",
    "EmptyBufferError",
    "EmptyEpisodeError",
    "EnvConfigurationError",
    "HorizonExceededError",
    "MissingArtifactError",
    "NonFiniteGradientError",
    "NonFiniteLossError",
    "ShapeMismatchError",
    "ShapedPickError",
    "TraceFormatError",
]
