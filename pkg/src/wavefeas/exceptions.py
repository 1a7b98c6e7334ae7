"""Exception types raised by wavefeas."""


class WaveFeasError(Exception):
    """Base class for all package errors."""


class DegenerateTriple(WaveFeasError, ValueError):
    """Circumcenter requested for a colinear (or coincident) triple."""


class InconsistentCoefficients(WaveFeasError, ValueError):
    """Coefficients do not come from an ensemble obeying ``U_{j+M/2} = J U_j``."""


class RankDeficiency(WaveFeasError, ValueError):
    """Regularity functionals are linearly dependent for this (M, D)."""


class StructureViolation(WaveFeasError, ValueError):
    """Transform coefficients lack the ``(-1)^k`` row pattern."""


class Divergence(WaveFeasError, RuntimeError):
    """The cascade iteration blew up."""


class EmptySolvedByAll(WaveFeasError):
    """No benchmark instance was solved by every algorithm."""
