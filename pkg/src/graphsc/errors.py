"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: bad inputs / unreadable files -> 2,
domain-level failures (validation violations, solver breakdown) -> 1,
internal consistency violations (things that signal a bug) -> 3.
"""


class InputError(ValueError):
    """Caller supplied an argument outside an operation's contract."""


class SolverError(RuntimeError):
    """A linear or ODE solve did not reach the requested tolerance."""

    def __init__(self, message, achieved_residual=None):
        super().__init__(message)
        self.achieved_residual = achieved_residual


class InternalConsistencyError(RuntimeError):
    """A mathematical invariant that should hold by construction failed.

    Raised e.g. when exhaustion values decrease beyond solver tolerance or a
    resolvent of a nonnegative function comes back negative.  Seeing this
    exception means a bug, not a user mistake.
    """
