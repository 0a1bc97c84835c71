"""Exception types shared across the package."""


class RadSourceError(Exception):
    """Base class for all package errors."""


class MeshError(RadSourceError):
    """Invalid mesh, curve, or mesh file."""


class ConfigError(RadSourceError):
    """Invalid run configuration."""


class NumericsError(RadSourceError):
    """A numerical stage failed (non-convergence, bad parameters)."""


class StageError(NumericsError):
    """Reconstruction stage failure, tagged with the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
