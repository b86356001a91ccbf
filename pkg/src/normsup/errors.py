"""Exception types shared across the package."""


class NormsupError(Exception):
    """Base class for all errors raised by normsup."""


class UnknownAtom(NormsupError):
    """A formula references an atom outside the declared vocabulary."""

    def __init__(self, names, vocabulary=None):
        self.names = tuple(sorted(names))
        self.vocabulary = frozenset(vocabulary) if vocabulary is not None else None
        super().__init__(f"unknown atom(s): {', '.join(self.names)}")


class VocabularyTooLarge(NormsupError):
    """An exhaustive valuation sweep was requested over too many atoms."""


class VocabularyMismatch(NormsupError):
    """Two objects that must share a vocabulary do not."""


class NotTotal(NormsupError):
    """A reachable state of the transition system has no outgoing edge."""

    def __init__(self, deadlocks):
        self.deadlocks = tuple(sorted(deadlocks))
        super().__init__(
            "transition system is not total; deadlock state(s): "
            + ", ".join(self.deadlocks)
        )


class BudgetExceeded(NormsupError):
    """An enumeration or search exceeded its configured budget."""


class RegimentationDeadlock(NormsupError):
    """Regimentation removed every successor of a state (reported as a flag,
    raised only when callers request strict mode)."""
