"""Exception hierarchy.

Everything below DataError maps to CLI exit code 2; UsageError maps to 1.
"""

from __future__ import annotations


class DataError(Exception):
    """Base for contract violations in data handling or computation."""


class EmptyClass(DataError):
    """A dataset has no elements in one of the two classes."""


class ParseError(DataError):
    """Malformed CSV cell or inconsistent row length."""


class LabelError(DataError):
    """Label column contains a value outside {0, 1}."""


class MajorityMislabeled(DataError):
    """Class 1 is the majority and relabeling was not requested."""


class TooFewElements(DataError):
    """A class has fewer elements than the number of folds."""


class ConfigError(DataError):
    """Invalid generator configuration (empty or out-of-bounds ranges)."""


class MultiplierOutOfRange(DataError):
    """Resampling multiplier outside (1, IR(S)]."""


class MinorityTooSmall(DataError):
    """SMOTE needs at least two minor-class elements."""


class WouldEmptyMajority(DataError):
    """Undersampling would remove every major-class element."""


class DimensionMismatch(DataError):
    """Feature matrix width differs from the training dimension."""


class NoPositives(DataError):
    """PR-AUC is undefined without at least one positive label."""


class EmptyGrid(DataError):
    """No multiplier grid point satisfies 1 < m <= IR(S)."""


class NoComparableRows(DataError):
    """Every task row was dropped from the profile comparison."""


class MismatchedGrids(DataError):
    """Curves passed to the emitter do not share a beta grid."""


class UsageError(Exception):
    """Invalid command line (exit code 1)."""
