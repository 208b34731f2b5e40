"""Error taxonomy shared across the package.

The CLI maps these onto its exit-code contract: ConfigError (and bare
ValueError) exit 1, FormatError and OSError exit 2, InvariantError
exit 3.
"""


class ConfigError(ValueError):
    """Bad user-supplied configuration (flags, config file, arguments)."""


class FormatError(RuntimeError):
    """Malformed input data or binary artifact (parse errors, bad magic,
    version mismatch, truncation)."""


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug or a
    corrupted artifact, never bad user input."""
