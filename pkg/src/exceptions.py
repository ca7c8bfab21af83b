class SLS4DError(Exception):
    """Common base class for SLS4D exceptions."""

    def __init__(self, message: str | None = None):
        self.message = message or 'SLS4D exception occurred.'

        super().__init__(self.message)


class ConfigurationError(SLS4DError):
    """Error class for invalid hyperparameters and incompatible shapes."""

    def __init__(self, message: str | None = None, field: str | None = None):
        self.message = message or 'Configuration is invalid.'
        self.field = field or 'config'

        super().__init__(self.message)


class InputDomainError(SLS4DError):
    """Error class for values outside of an operation's domain."""

    def __init__(self, message: str | None = None, value: float | None = None):
        self.message = message or 'Input is outside of the valid domain.'
        self.value = value

        super().__init__(self.message)


class NonFiniteError(SLS4DError):
    """Error class for NaN or Inf values produced during computation."""

    def __init__(self,
                 message: str | None = None,
                 op: str | None = None,
                 dump_path: str | None = None):
        self.op = op or 'unknown'
        self.dump_path = dump_path
        if message is not None:
            self.message = message
        else:
            self.message = f'non-finite values produced by {self.op}'
            if dump_path is not None:
                self.message += f' (batch dumped to {dump_path})'

        super().__init__(self.message)


class DataError(SLS4DError):
    """Error class for missing or unreadable dataset content."""

    def __init__(self,
                 message: str | None = None,
                 file_name: str | None = None):
        if message is not None:
            self.message = message
        elif file_name is not None:
            self.message = f'{file_name} is not a valid dataset file'
        else:
            self.message = 'dataset content is invalid'
        self.file_name = file_name

        super().__init__(self.message)


class CheckpointError(SLS4DError):
    """Common base class for checkpoint persistence errors."""

    def __init__(self, message: str | None = None):
        self.message = message or 'Checkpoint could not be processed.'

        super().__init__(self.message)


class IntegrityError(CheckpointError):
    """Error class for corrupt or truncated checkpoint files."""

    def __init__(self, message: str | None = None):
        self.message = message or 'Checkpoint failed its integrity check.'

        super().__init__(self.message)


class VersionError(CheckpointError):
    """Error class for checkpoints written with another format version."""

    def __init__(self,
                 message: str | None = None,
                 found: int | None = None,
                 expected: int | None = None):
        self.found = found
        self.expected = expected
        if message is not None:
            self.message = message
        else:
            self.message = (f'checkpoint format version {found} is not'
                            f' supported (expected {expected})')

        super().__init__(self.message)


class UsageError(SLS4DError):
    """Error class for command line misuse."""

    def __init__(self, message: str | None = None):
        self.message = message or 'Invalid command line usage.'

        super().__init__(self.message)
