"""Exception hierarchy shared by all fmlearn modules."""


class FmlearnError(Exception):
    """Base class for domain errors raised by fmlearn."""


class StructuralError(FmlearnError):
    """A feature model or configuration refers to something that does not exist
    or violates the tree structure."""


class InvalidConfigurationError(FmlearnError):
    """A configuration given as input is not valid in its feature model."""


class ModelVoidError(FmlearnError):
    """A feature model admits no valid configuration."""


class ProtocolError(FmlearnError):
    """The candidate/outcome protocol of an exploration episode was violated."""


class OracleIncompleteError(FmlearnError):
    """A quality dataset has no entry for the requested configuration."""


class DatasetError(FmlearnError):
    """A quality dataset is malformed or does not match its feature model."""


class ConfigError(FmlearnError):
    """An experiment or generator specification is malformed."""
