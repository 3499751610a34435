"""Exception hierarchy for the whole engine."""


class SmtOptError(Exception):
    """Base class for all engine errors."""


# --- expression evaluation ---

class EvalError(SmtOptError):
    pass


class DivisionByZero(EvalError):
    pass


class NonRationalValue(EvalError):
    """Exp nodes and non-integer exponents have no exact rational value."""


# --- input parsing ---

class ParseError(SmtOptError):
    pass


class UnsupportedOperator(ParseError):
    def __init__(self, name: str):
        super().__init__(f"unsupported operator: {name}")
        self.name = name


class MultipleObjectives(ParseError):
    pass


class MalformedDocument(ParseError):
    pass


class InconsistentCounts(ParseError):
    pass


class UnknownSection(ParseError):
    pass


class DuplicateRow(ParseError):
    pass


class UnknownRowReference(ParseError):
    pass


class MalformedField(ParseError):
    def __init__(self, lineno: int, detail: str):
        super().__init__(f"line {lineno}: {detail}")
        self.lineno = lineno


# --- preprocessing ---

class PreprocessError(SmtOptError):
    pass


class UnboundedInteger(PreprocessError):
    def __init__(self, name: str):
        super().__init__(f"integer variable {name!r} is unbounded")
        self.name = name


class EmptyIntegerRange(PreprocessError):
    def __init__(self, name: str):
        super().__init__(f"integer variable {name!r} has an empty range")
        self.name = name


class NotBinarized(PreprocessError):
    def __init__(self, name: str):
        super().__init__(f"integer variable {name!r} does not have bounds [0, 1]")
        self.name = name


class RangeTooWide(PreprocessError):
    def __init__(self, width, cap):
        super().__init__(f"integer range width {width} exceeds cap {cap}")
        self.width = width
        self.cap = cap


# --- SMT session ---

class SessionError(SmtOptError):
    pass


class SpawnFailure(SessionError):
    pass


class HandshakeFailure(SessionError):
    pass


class SolverDied(SessionError):
    pass


class ProtocolError(SessionError):
    pass


class PopOnEmptyStack(SessionError):
    pass


class NonIntegerExponent(SessionError):
    pass


class ExponentTooLarge(SessionError):
    def __init__(self, exponent, cap):
        super().__init__(f"power exponent {exponent} exceeds unroll cap {cap}")
        self.exponent = exponent
        self.cap = cap


# --- integrality management ---

class IntegerValue(SmtOptError):
    """cut_for was handed a value that is already integral."""


# --- oracle ---

class OracleError(SmtOptError):
    pass


class TooLarge(OracleError):
    pass


class UnboundedVariable(OracleError):
    pass


# --- reporting ---

class MissingLogs(SmtOptError):
    pass
