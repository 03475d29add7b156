"""Named error kinds raised by the library.

Every domain failure surfaced to a user is one of these classes; the CLI
maps them to machine-readable error records with ``kind`` set to the class
name.  Anything else escaping to the CLI is a bug.
"""


class IwalabError(Exception):
    """Base class for all domain errors."""

    @property
    def kind(self) -> str:
        return type(self).__name__


class FieldMismatch(IwalabError):
    """Operands belong to different extension fields."""


class DivisionByPrecisionZero(IwalabError):
    """Divisor is indistinguishable from 0 at its precision."""


class NotAUnit(IwalabError):
    """Operation requires a unit (valuation 0)."""


class RamifiedFieldUnsupported(IwalabError):
    """Teichmuller lift requested over a field where it is not defined."""


class OutsideConvergenceDomain(IwalabError):
    """Series argument outside its p-adic convergence domain."""


class PrecisionExhausted(IwalabError):
    """A truncation index or precision budget was exceeded."""


class RootOfUnityUnavailable(IwalabError):
    """The target field contains no primitive root of unity of the needed order."""


class OddCharacter(IwalabError):
    """p-adic L-functions are only attached to even characters."""


class Assumption2Required(IwalabError):
    """p = 2 path requires the Iwasawa main-conjecture assumption flag."""


class PoleAtOne(IwalabError):
    """Evaluation at the pole of the p-adic L-function of the trivial character."""


class IntegralityViolation(IwalabError):
    """A power series that must be integral has a certified negative-valuation coefficient."""


class ZeroToPrecision(IwalabError):
    """Input is identically 0 at the working precision."""


class MuAmbiguous(IwalabError):
    """mu-invariant cannot be certified at the working precision."""


class PivotAmbiguous(IwalabError):
    """Matrix pivot is 0 to precision but not structurally 0."""


class IndeterminateAtPrecision(IwalabError):
    """Value is 0 to precision; finiteness cannot be decided."""


class HypothesisNotMet(IwalabError):
    """Main-conjecture link invoked outside its hypotheses."""


class InadmissibleTwist(IwalabError):
    """Twist point lies outside the admissible domain."""


class ParityMismatch(IwalabError):
    """Dimension and conjugation trace have incompatible parity."""


class CacheCorrupt(IwalabError):
    """Persistent cache file contains an invalid record."""

    def __init__(self, line_number: int, detail: str):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number
