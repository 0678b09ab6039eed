"""Exception hierarchy.

Every precondition failure named by an operation contract raises a subclass
of :class:`HypercrossError`, so callers (and the CLI) can catch one type.
"""


class HypercrossError(Exception):
    pass


class UnknownNodeError(HypercrossError, KeyError):
    def __str__(self):  # KeyError quotes its argument; keep plain text
        return str(self.args[0]) if self.args else ""


class InvalidStructureError(HypercrossError, ValueError):
    """Input violates a structural invariant (not a tree, not symmetric, ...)."""


class MissingEntryError(HypercrossError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class TooLargeError(HypercrossError, ValueError):
    """Input exceeds the exhaustive regime of an operation."""


class ResolutionError(HypercrossError, ValueError):
    """The finite resolution (depth, precision) is too coarse to decide."""


class PrecisionError(ResolutionError):
    """p-adic computation lost every significant digit."""


class NoWitnessError(HypercrossError):
    """A search over a finite candidate space came back empty."""
