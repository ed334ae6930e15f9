"""Shared error base class.

Everything raised on bad data or failed validation derives from
:class:`WorkbenchError`, so front ends (CLI, HTTP service) can map the
whole family to one exit code / status class without enumerating every
concrete error.
"""


class WorkbenchError(Exception):
    """Base class for data and validation errors raised by pwbench."""
