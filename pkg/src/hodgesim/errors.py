"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class HodgeSimError(Exception):
    """Base class for all errors raised by hodgesim."""


class MismatchedField(HodgeSimError):
    pass


class DimensionMismatch(HodgeSimError):
    pass


class DegenerateForm(HodgeSimError):
    pass


class ZeroScale(HodgeSimError):
    pass


class FactorizationLimit(HodgeSimError):
    pass


class ParseError(HodgeSimError):
    pass


class NotASimilarity(HodgeSimError):
    pass


class Singular(HodgeSimError):
    pass


class NotEndomorphism(HodgeSimError):
    pass


class PreconditionFailed(HodgeSimError):
    pass


class SpaceMismatch(HodgeSimError):
    pass


class TooLarge(HodgeSimError):
    pass


class ZeroCoefficient(HodgeSimError):
    pass


class AlgebraMismatch(HodgeSimError):
    pass


class NotEven(HodgeSimError):
    pass


class WellDefinednessFailure(HodgeSimError):
    pass


class BadPolarizationPair(HodgeSimError):
    pass


class ZeroNormBasePoint(HodgeSimError):
    pass


class ConventionError(HodgeSimError):
    pass


class UnknownLattice(HodgeSimError):
    pass


class UnknownName(HodgeSimError):
    pass


class CatalogCorrupt(HodgeSimError):
    pass
