"""Exception types shared across the toolkit."""


class PenBanditsError(Exception):
    """Base class for all toolkit errors."""


class TooFewArms(PenBanditsError):
    """An instance needs at least two arms."""


class FairnessInfeasible(PenBanditsError):
    """The fairness fractions sum to 1 or more, leaving no slack."""


class BadDistribution(PenBanditsError):
    """A reward distribution violates one of its parameter invariants."""


class DivisionByZeroCount(PenBanditsError):
    """An index was requested for an arm with zero pulls (driver bug)."""


class CountMismatch(PenBanditsError):
    """Per-arm pull counts do not sum to the stated horizon."""


class TooLarge(PenBanditsError):
    """Brute-force enumeration bounds (K <= 4, T <= 30) exceeded."""


class TiedSums(PenBanditsError):
    """Two arms share the same mu + penalty value; the deficit
    coefficients are undefined under ties."""


class HorizonTooShort(PenBanditsError):
    """The horizon is shorter than the forced initialization phase."""


class FileUnreadable(PenBanditsError):
    """A ratings file could not be opened or read."""


class TooManyMalformed(PenBanditsError):
    """More than 0.1% of ratings lines failed to parse."""


class NoArmsSurvive(PenBanditsError):
    """The rating-count filter removed every movie."""


class UnknownSetting(PenBanditsError):
    """Unrecognized experiment preset identifier."""


class SchemaMismatch(PenBanditsError):
    """A CSV file does not carry the columns a plot kind requires."""
