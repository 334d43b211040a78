"""Shared exception types.

The CLI maps InputError (malformed/out-of-range input) to exit code 2 and
Refusal (a precondition the tool will not silently work around) to exit
code 3, so scripted pipelines can tell "won't parse" from "can't do".
"""


class InputError(ValueError):
    """Malformed input or an argument outside its documented domain."""


class RangeError(InputError):
    """Index or stage outside the available finite prefix."""


class Refusal(RuntimeError):
    """Precondition failure reported with a diagnostic instead of a guess."""
