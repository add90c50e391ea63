"""Exception hierarchy shared by every kgap module."""


class KgapError(Exception):
    """Base class for all errors raised by kgap."""


class RankDeficiencyError(KgapError, ValueError):
    """A basis is singular or numerically too close to singular."""


class BudgetError(KgapError):
    """A computation would exceed its configured enumeration budget."""


class CapabilityError(KgapError):
    """The request is outside the supported range (e.g. dimension cap)."""


class InfeasibleError(KgapError):
    """A constructive search failed to find an object it was expected to find."""


class GapComputationError(KgapError):
    """An expanding search window hit its hard cap without resolving."""
