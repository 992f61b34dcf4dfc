"""
Configuration validation utilities.
"""

from pathlib import Path
from typing import Any, Iterable, List, Sequence


class ValidationError(Exception):
    """Raised when configuration validation fails."""

    pass


class ConfigValidator:
    """Validates configuration values and structure."""

    @staticmethod
    def validate_cost(cost: Any) -> bool:
        """
        Validate the SVM cost parameter.

        Args:
            cost: Cost value to validate (must be a positive number)
        """
        try:
            cost_float = float(cost)
        except (ValueError, TypeError):
            raise ValidationError(f"Cost must be a number, got: {cost}")
        if not cost_float > 0:
            raise ValidationError(f"Cost must be positive, got: {cost_float}")
        return True

    @staticmethod
    def validate_positive(value: Any, name: str, integer: bool = False) -> bool:
        """
        Validate a strictly positive number.

        Args:
            value: Value to validate
            name: Setting name used in the error message
            integer: Require an integer value
        """
        try:
            number = int(value) if integer else float(value)
            if integer and isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
        except (ValueError, TypeError):
            kind = "an integer" if integer else "a number"
            raise ValidationError(f"{name} must be {kind}, got: {value}")
        if isinstance(value, bool) or not number > 0:
            raise ValidationError(f"{name} must be positive, got: {value}")
        return True

    @staticmethod
    def validate_n_prev(values: Any, max_val: int = 5) -> bool:
        """
        Validate the list of context sizes to sweep.

        Args:
            values: A single integer or a list of integers within 0..max_val
        """
        items = values if isinstance(values, (list, tuple)) else [values]
        if not items:
            raise ValidationError("n_prev list cannot be empty")
        for item in items:
            if isinstance(item, bool) or not isinstance(item, int):
                raise ValidationError(f"n_prev values must be integers, got: {item}")
            if not 0 <= item <= max_val:
                raise ValidationError(f"n_prev must be between 0-{max_val}, got: {item}")
        if len(set(items)) != len(items):
            raise ValidationError(f"n_prev values must be unique, got: {items}")
        return True

    @staticmethod
    def validate_folds(folds: Any) -> bool:
        """
        Validate the number of cross-validation folds.

        Args:
            folds: Number of folds (at least 2)
        """
        if isinstance(folds, bool) or not isinstance(folds, int):
            raise ValidationError(f"Folds must be a valid integer, got: {folds}")
        if folds < 2:
            raise ValidationError(f"Folds must be at least 2, got: {folds}")
        return True

    @staticmethod
    def validate_choice(value: Any, choices: Sequence[str], name: str) -> bool:
        """
        Validate that a setting is one of a fixed set of strings.

        Args:
            value: Value to validate
            choices: Allowed values
            name: Setting name used in the error message
        """
        if str(value).lower() not in [c.lower() for c in choices]:
            raise ValidationError(f"{name} must be one of {list(choices)}, got: {value}")
        return True

    @staticmethod
    def validate_paths(paths: Iterable[Any]) -> List[Path]:
        """
        Validate that every path exists.

        Args:
            paths: File or directory paths
        """
        resolved = [Path(p) for p in paths]
        missing = [str(p) for p in resolved if not p.exists()]
        if missing:
            raise ValidationError(f"Paths not found: {', '.join(missing)}")
        return resolved

    @staticmethod
    def validate_log_level(level: str) -> bool:
        """
        Validate log level.

        Args:
            level: Log level string
        """
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

        if str(level).upper() not in valid_levels:
            raise ValidationError(
                f"Log level must be one of {valid_levels}, got: {level}"
            )

        return True

    @staticmethod
    def validate_log_format(format_type: str) -> bool:
        """
        Validate log format.

        Args:
            format_type: Log format type
        """
        valid_formats = ["text", "json"]

        if str(format_type).lower() not in valid_formats:
            raise ValidationError(
                f"Log format must be one of {valid_formats}, got: {format_type}"
            )

        return True
