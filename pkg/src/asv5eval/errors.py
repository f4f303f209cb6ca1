"""Exception hierarchy. Each family maps to one CLI exit code."""

from __future__ import annotations


class EvalError(Exception):
    """Base class for every error raised by asv5eval."""

    exit_code = 1


class InputError(EvalError):
    """A file cannot be read or does not match its documented format."""

    exit_code = 3


class MalformedScore(InputError):
    def __init__(self, row: int, reason: str, path: str | None = None):
        self.row = row
        self.reason = reason
        self.path = path
        where = f"{path}:" if path else "row "
        super().__init__(f"{where}{row}: malformed score line ({reason})")


class MalformedKey(InputError):
    def __init__(self, row: int, reason: str, path: str | None = None):
        self.row = row
        self.reason = reason
        self.path = path
        where = f"{path}:" if path else "row "
        super().__init__(f"{where}{row}: malformed key line ({reason})")


class UnknownLabel(MalformedKey):
    pass


class LabelAttackMismatch(MalformedKey):
    pass


class QualityOutOfRange(MalformedKey):
    pass


class DuplicateTrial(InputError):
    def __init__(self, trial: str, row: int, path: str | None = None):
        self.trial = trial
        self.row = row
        super().__init__(f"{path or 'input'}:{row}: duplicate trial id {trial!r}")


class MixedTriplet(MalformedScore):
    pass


class ProtocolMismatch(EvalError):
    """Scores, keys or submissions disagree about the trial set."""

    exit_code = 4


class UnmatchedScore(ProtocolMismatch):
    def __init__(self, trial: str):
        self.trial = trial
        super().__init__(f"scored trial {trial!r} has no key entry")


class MissingScore(ProtocolMismatch):
    def __init__(self, trial: str):
        self.trial = trial
        super().__init__(f"key trial {trial!r} has no score (use permissive mode to skip)")


class TrackMismatch(ProtocolMismatch):
    pass


class TrialSetMismatch(ProtocolMismatch):
    pass


class UnmappedAttack(ProtocolMismatch):
    def __init__(self, attack: str):
        self.attack = attack
        super().__init__(f"attack {attack!r} has no entry in the attack-group map")


class EmptyGroup(ProtocolMismatch):
    def __init__(self, group: str):
        self.group = group
        super().__init__(f"attack group {group!r} is empty after filtering")


class DegenerateData(EvalError):
    """The data cannot support the requested metric."""

    exit_code = 5


class MissingClass(DegenerateData):
    def __init__(self, label: str, context: str = ""):
        self.label = label
        suffix = f" ({context})" if context else ""
        super().__init__(f"no trials of class {label!r}{suffix}")


class EmptySlice(DegenerateData):
    pass


class DegenerateTandem(DegenerateData):
    pass


class TooFewSubmissions(DegenerateData):
    pass
