"""Exception hierarchy shared by every module."""


class BcfLabError(Exception):
    """Base class for errors raised by module operations."""


class InsufficientDigitsError(BcfLabError):
    pass


class AllTwosWindowError(InsufficientDigitsError):
    """A BCF window ended inside a run of 2's, so the next RCF quotient is unknown."""


class MalformedTailError(BcfLabError):
    pass


class TerminatedStreamError(BcfLabError):
    pass


class BudgetExceededError(BcfLabError):
    pass


class RefinementBudgetExceeded(BudgetExceededError):
    pass


class NoWordsError(BcfLabError):
    pass


class EmptyAlphabetError(BcfLabError):
    pass


class InsufficientSeedError(BcfLabError):
    pass


class ScheduleError(BcfLabError):
    pass


class ConstructionError(BcfLabError):
    pass
