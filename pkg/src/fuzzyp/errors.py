"""Exception types shared across the package.

The CLI maps ``InputError`` to exit code 1 and ``DomainError`` to exit code 2.
"""


class InputError(ValueError):
    """Malformed or inconsistent user input (files, records, identifiers)."""


class DomainError(ValueError):
    """A numerical argument lies outside the domain of the operation."""
