"""Exception types shared across the package."""


class AffbnError(Exception):
    """Base class for all affbn errors."""


class CycleDetected(AffbnError):
    """The arc set admits no topological ordering."""


class UnknownNode(AffbnError):
    """An arc or query references a node name that does not exist."""


class ShapeMismatch(AffbnError):
    """A CPT's row/column layout disagrees with the network spec."""


class NotNormalized(AffbnError):
    """A CPT row does not sum to 1 (or contains out-of-range entries)."""


class EvidenceShapeMismatch(AffbnError):
    """Soft-evidence vectors do not match the network's nodes."""


class AllZeroLikelihood(AffbnError):
    """The evidence assigns zero weight to every joint configuration."""


class InitializationError(AffbnError):
    """Network spec and sensor model shapes disagree."""


class SpecMismatch(AffbnError):
    """Two networks that should share a spec do not."""


class ConfigError(AffbnError):
    """A benchmark or template configuration violates its constraints."""
