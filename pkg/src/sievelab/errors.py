"""Error types shared across the package.

DomainError signals an argument outside an operation's contract (bad
range, missing table coverage). ResourceError signals a request that is
valid but would exceed the configured memory or term-count budget.
"""


class DomainError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass
