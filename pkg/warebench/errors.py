from __future__ import annotations

from typing import ClassVar


class WarebenchError(Exception):
    """Common base class for all warebench errors"""

    exit_code: ClassVar[int] = 1


class ConfigError(WarebenchError):
    """Bad or missing configuration"""

    exit_code = 1


class ParameterError(ConfigError):
    """Parameter outside of its legal range"""


class ConfigTooLargeError(ConfigError):
    """Configuration would generate more data than allowed"""


class UsageError(ConfigError):
    """Invalid command-line usage"""


class BackendError(WarebenchError):
    """Failure reported by the database backend"""

    exit_code = 2


class ConnectionFailedError(BackendError):
    """Backend is unreachable or refused the connection"""


class DdlError(BackendError):
    """DDL statement failed"""

    def __init__(self, message: str, index: int, statement: str) -> None:
        super().__init__(message)
        self.index = index
        self.statement = statement


class BatchInsertError(BackendError):
    """Bulk insertion of a batch failed"""

    def __init__(self, message: str, table_name: str, ordinal: int) -> None:
        super().__init__(message)
        self.table_name = table_name
        self.ordinal = ordinal


class QueryError(BackendError):
    """Query execution failed"""

    def __init__(self, message: str, excerpt: str) -> None:
        super().__init__(message)
        self.excerpt = excerpt


class UnsupportedDialectError(BackendError):
    """Dialect is unknown or lacks a required mapping"""


class UnsupportedConstructError(BackendError):
    """Dialect can't express a query construct and no expansion is available"""


class PreconditionError(WarebenchError):
    """Operation called in a state where it can't run"""

    exit_code = 3


class EmptyTableError(PreconditionError):
    """Random key requested from an empty table"""


class DimensionExhaustedError(PreconditionError):
    """Every dimension is already attached to the fact table"""


class GenerationError(WarebenchError):
    """Generation or parsing of benchmark artifacts failed"""

    exit_code = 1


class InvalidRangeError(GenerationError):
    """Random range with lower bound above upper bound"""


class WorkloadParseError(GenerationError):
    """Malformed workload file"""

    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ResultsParseError(GenerationError):
    """Malformed results CSV file"""


class RefreshError(WarebenchError):
    """Load or refresh of the warehouse failed"""

    exit_code = 2


class LoadError(RefreshError):
    """Warehouse load stopped part way"""

    def __init__(self, message: str, last_completed_table: str | None) -> None:
        super().__init__(message)
        self.last_completed_table = last_completed_table


class FactTableSaturatedError(RefreshError):
    """No free composite key found for a fact insertion"""


class StaleKeyError(RefreshError):
    """Key selected for modification does not exist"""
