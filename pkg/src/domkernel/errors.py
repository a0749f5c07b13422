"""Exception types shared across the package.

The CLI maps these onto exit codes: input problems (parsing, manifests,
model files) exit with 2, resource-budget exhaustion with 3, and anything
else with 4.
"""

from __future__ import annotations


class DomKernelError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDocument(DomKernelError):
    """No element node could be recovered from the input document."""


class DepthLimitExceeded(DomKernelError):
    """Element nesting exceeded the configured depth limit."""

    def __init__(self, depth: int, limit: int):
        super().__init__(f"element nesting depth {depth} exceeds limit {limit}")
        self.depth = depth
        self.limit = limit

    def __reduce__(self):
        return (type(self), (self.depth, self.limit))


class NodeBudgetExceeded(DomKernelError):
    """The node-pair product of two trees exceeds the configured budget.

    Callers can fall back, subsample, or (in lenient pipelines) record the
    pair as skipped.  ``component`` identifies the (strategy, kernel) cell
    that failed when raised from feature extraction.
    """

    def __init__(self, n1: int, n2: int, budget: int, component: str | None = None):
        where = f" while computing {component}" if component else ""
        super().__init__(
            f"node pair product {n1} x {n2} = {n1 * n2} exceeds budget {budget}{where}"
        )
        self.n1 = n1
        self.n2 = n2
        self.budget = budget
        self.component = component

    def __reduce__(self):
        return (type(self), (self.n1, self.n2, self.budget, self.component))


class DegenerateData(DomKernelError):
    """Training data cannot support a multiclass fit."""


class FormatError(DomKernelError):
    """A serialized artifact (model file, feature CSV) is malformed."""


class ManifestError(DomKernelError):
    """A pair manifest is malformed; carries the offending row number."""

    def __init__(self, message: str, row: int | None = None):
        self._message = message
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row

    def __reduce__(self):
        return (type(self), (self._message, self.row))
