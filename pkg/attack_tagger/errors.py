from __future__ import annotations

from typing import Optional


class AttackTaggerError(RuntimeError):
    pass


class ParseError(AttackTaggerError):
    """
    Input bytes do not follow the expected file format.
    `line` is 1-based when the format is line-oriented.
    """

    def __init__(self, message: str, *, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(AttackTaggerError):
    pass


class UnknownTactic(AttackTaggerError):
    pass


class EmptyCorpus(AttackTaggerError):
    pass


class InvalidFraction(AttackTaggerError):
    pass


class EmptyVocabulary(AttackTaggerError):
    pass


class NotFitted(AttackTaggerError):
    pass


class DimensionMismatch(AttackTaggerError):
    pass


class SingleClass(AttackTaggerError):
    pass


class NOutOfRange(AttackTaggerError):
    pass


class FormatError(AttackTaggerError):
    pass


class VersionMismatch(AttackTaggerError):
    pass


class NotTrained(AttackTaggerError):
    pass


class MissingComponent(AttackTaggerError):
    pass


class LengthMismatch(AttackTaggerError):
    pass


class IncompatibleMetric(AttackTaggerError):
    pass


class EmptyTestSet(AttackTaggerError):
    pass


class EmptySentence(AttackTaggerError):
    pass


class TransportError(AttackTaggerError):
    pass


class UsageError(AttackTaggerError):
    pass
