"""Exception taxonomy for the workbench.

Every error raised by the package derives from WorkbenchError and carries a
short machine-readable ``category`` used by the CLI to pick exit codes.
"""


class WorkbenchError(Exception):
    category = "error"


class InvalidArgumentError(WorkbenchError):
    category = "invalid-argument"


class ShapeError(WorkbenchError):
    category = "shape"


class StateError(WorkbenchError):
    category = "state"


class NumericError(WorkbenchError):
    category = "numeric"


class ConfigError(WorkbenchError):
    category = "config"


class DataFormatError(WorkbenchError):
    category = "format"


class DataConsistencyError(WorkbenchError):
    category = "consistency"


class DataIOError(WorkbenchError):
    category = "io"


class CheckpointError(WorkbenchError):
    category = "checkpoint"


class CheckpointMagicError(CheckpointError):
    category = "checkpoint-magic"


class CheckpointVersionError(CheckpointError):
    category = "checkpoint-version"


class CheckpointChecksumError(CheckpointError):
    category = "checkpoint-checksum"
