"""Exception hierarchy. Each class maps to one failure category of the toolkit
(configuration, physical domain, file format, row-level ingestion, statistics,
fitting, calibration) so the CLI can translate them into stable exit codes."""


class KdtliError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(KdtliError):
    """Invalid configuration value, key, or inconsistent instrument geometry."""


class DomainError(KdtliError):
    """Physically meaningless argument (non-positive speed, temperature, ...)."""


class FormulaError(KdtliError):
    """Unparseable chemical formula or unknown element symbol."""


class FormatError(KdtliError):
    """Input file does not match any supported grammar (bad header, bad key)."""


class IngestionError(KdtliError):
    """A specific row of an otherwise well-formed table is malformed; carries
    the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StatisticsError(KdtliError):
    """Not enough data (or degenerate data) for the requested statistic."""


class FitError(KdtliError):
    """Least-squares failure: degenerate design matrix or non-convergence."""


class CalibrationError(FitError):
    """Deflector calibration cannot be determined (e.g. a single voltage)."""
