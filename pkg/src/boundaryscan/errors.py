"""Exception taxonomy for the scanner.

Grouped by the layer that raises them. The CLI maps these onto exit codes;
everything else propagates them unchanged.
"""


class ScanError(Exception):
    """Base class for every error raised by this package."""


# geometry


class DegenerateTriplet(ScanError):
    """Triplet samples are collinear or duplicated; no plane exists."""


class InvalidEta(ScanError):
    """Expansion factor below 1."""


class InvalidDensity(ScanError):
    """Grid density below 2."""


# oracle


class ConfigError(ScanError):
    """Malformed or incomplete configuration."""


class BackendUnavailable(ScanError):
    """Referenced file missing or remote endpoint unreachable."""


class ShapeMismatch(ScanError):
    """Inputs do not match the oracle's expected dimension."""


class TransportError(ScanError):
    """Remote predict call failed after all retries."""


# boundary and metrics


class PaletteTooSmall(ScanError):
    """Palette has fewer colors than the oracle has classes."""


class InvalidAlpha(ScanError):
    """Entropy order below 1."""


class InvalidT(ScanError):
    """Area constraint threshold outside (0, 1]."""


class EmptyInput(ScanError):
    """An aggregate or ranking operation received no data."""


class InconsistentParams(ScanError):
    """Per-plot metrics disagree on alpha, t, or class count."""


# detector and synth lab


class InsufficientSamples(ScanError):
    """Sample pool cannot supply the requested triplets."""


class SingleClassInput(ScanError):
    """Calibration scores contain only one ground-truth class."""


class ManifestError(ScanError):
    """Zoo manifest lacks a clean or a backdoored entry."""


class InvalidParams(ScanError):
    """Synthetic model parameters out of range."""
