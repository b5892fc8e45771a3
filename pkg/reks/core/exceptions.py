from typing import Any, Dict, Optional


class ReksError(Exception):
    pass


class ValidationError(ReksError):
    """An input table violates its axioms"""

    def __init__(self, message: str, counterexample: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.counterexample = counterexample or {}


class SchemaError(ReksError):
    """
    JSON input does not match the input schema, or no input was given
    """

    exit_code = 2


class BoundError(ReksError):
    """A configured enumeration cap was exceeded"""

    def __init__(self, setting: str, limit: int, requested: int):
        super().__init__(f"{setting} exceeded: requested {requested}, limit {limit}")
        self.setting = setting
        self.limit = limit
        self.requested = requested


class GroupMismatchError(ReksError):
    pass


class CheckFailure(ReksError):
    """
    A verification ran to completion and found a counterexample
    """

    exit_code = 1

    def __init__(self, message: str, payload: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.payload = payload or {}


def check_bound(setting: str, limit: int, requested: int) -> None:
    if requested > limit:
        raise BoundError(setting, limit, requested)
