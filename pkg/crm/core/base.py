"""
Core Base Module

This module provides the error hierarchy, the response envelope and the shared
command wrapper. Every subcommand and every numerical module depends on it.
"""

import json
import traceback
from typing import Any, Callable, Dict, Optional, Tuple

from ..common import logger
from .utils import to_jsonable

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class CRMError(Exception):
    """Base class of every error raised by the package."""

    error_type = "server_error"
    exit_code = EXIT_NUMERIC

    def __init__(self, message: str, details: Any = None):
        super().__init__(message)
        self.message = message
        self.details = details


class ConfigError(CRMError):
    """Invalid experiment configuration or CLI usage."""

    error_type = "config_error"
    exit_code = EXIT_CONFIG


class ArgumentError(CRMError, ValueError):
    """Argument violates a precondition (dimension mismatch, bad range...)."""

    error_type = "validation_error"
    exit_code = EXIT_CONFIG


class NumericError(CRMError):
    """A numerical procedure cannot produce a meaningful value."""

    error_type = "numeric_error"
    exit_code = EXIT_NUMERIC


class NoEffectiveSamplesError(NumericError):
    """Every kernel weight vanished, p-hat is zero."""

    error_type = "no_effective_samples"


class DegenerateDesignError(NumericError):
    """The normal matrix of a least squares problem is singular."""

    error_type = "degenerate_design"


class VacuousRegimeError(NumericError):
    """t*D0 <= K2*D2*d^2*b^2, the concentration bound says nothing."""

    error_type = "vacuous_regime"

    def __init__(self, message: str, margin: float):
        super().__init__(message, details={"margin": margin})
        self.margin = margin


class NotMixingError(NumericError):
    """The latent chain is reducible or periodic."""

    error_type = "not_mixing"


class InconsistentObservationError(NumericError):
    """An observation has zero likelihood under every latent state."""

    error_type = "inconsistent_observation"


class UnsupportedDimensionError(ArgumentError):
    """Tensor-grid quadrature requested in too many dimensions."""

    error_type = "unsupported_dimension"


class CommandResponse:
    """
    Standard command response formatter

    Handles creating consistent JSON envelopes for command results,
    including error reporting and exit codes.
    """

    @staticmethod
    def success(
        data: Any = None,
        message: str = "Operation successful",
        meta: Optional[Dict] = None,
    ) -> str:
        """
        Format a successful command response.

        Args:
            data: The data to include in the response
            message: Success message
            meta: Optional metadata dictionary

        Returns:
            JSON formatted response string
        """
        result = {
            "status": "success",
            "message": message,
            "code": EXIT_OK,
        }
        if data is not None:
            result["data"] = to_jsonable(data)
        if meta is not None:
            result["meta"] = to_jsonable(meta)
        return json.dumps(result, indent=2)

    @staticmethod
    def error(
        message: str = "An error occurred",
        exit_code: int = EXIT_NUMERIC,
        error_type: str = "numeric_error",
        details: Any = None,
    ) -> str:
        """
        Format an error command response.

        Args:
            message: Error message
            exit_code: process exit code the command will return
            error_type: Type of error
            details: Additional error details

        Returns:
            JSON formatted response string
        """
        result = {
            "status": "error",
            "message": message,
            "code": exit_code,
            "error_type": error_type,
        }
        if details is not None:
            result["details"] = to_jsonable(details)
        return json.dumps(result, indent=2)


def classify_error(e: BaseException) -> Tuple[int, str]:
    """
    Map an exception to (exit code, error type).

    Args:
        e: the exception raised by a command or a sweep row

    Returns:
        tuple: exit code and error type tag
    """
    if isinstance(e, CRMError):
        return e.exit_code, e.error_type
    if isinstance(e, (ValueError, KeyError, TypeError, FileNotFoundError)):
        return EXIT_CONFIG, "validation_error"
    return EXIT_NUMERIC, "server_error"


def handle_command(name: str, fn: Callable[..., Any], *args, **kwargs) -> Tuple[int, str]:
    """
    Run a command with consistent logging and error handling.

    Args:
        name: command name, used in logs
        fn: callable returning the data to report
        *args, **kwargs: forwarded to fn

    Returns:
        tuple: (exit code, JSON envelope)
    """
    try:
        logger.info(f"Command - {name}")
        data = fn(*args, **kwargs)
        logger.info(f"Command {name} completed")
        return EXIT_OK, CommandResponse.success(data=data, message=f"{name} completed")

    except CRMError as e:
        logger.error(f"{type(e).__name__} in {name}: {e.message}")
        return e.exit_code, CommandResponse.error(
            message=e.message,
            exit_code=e.exit_code,
            error_type=e.error_type,
            details=e.details,
        )

    except Exception as e:
        exit_code, error_type = classify_error(e)
        logger.error(f"Unexpected Error in {name}: {str(e)}")
        logger.error(f"Exception type: {type(e).__name__}")
        logger.debug(traceback.format_exc())
        return exit_code, CommandResponse.error(
            message=str(e),
            exit_code=exit_code,
            error_type=error_type,
            details={"exception_type": type(e).__name__},
        )
