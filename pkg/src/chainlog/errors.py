"""Exception hierarchy shared by all chainlog modules."""


class ChainlogError(Exception):
    """Base class for every error raised by chainlog."""


class MalformedRecord(ChainlogError, ValueError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyLog(ChainlogError, ValueError):
    pass


class CycleDetected(ChainlogError, ValueError):
    def __init__(self, witness):
        self.witness = list(witness)
        super().__init__("cycle in hierarchy: " + " -> ".join(map(str, self.witness)))


class UnknownRoot(ChainlogError, KeyError):
    pass


class DisconnectedHierarchy(ChainlogError, ValueError):
    pass


class UnknownClass(ChainlogError, KeyError):
    def __init__(self, class_ids, records=()):
        self.class_ids = sorted(set(class_ids))
        self.records = list(records)
        shown = ", ".join(self.class_ids[:10])
        more = "" if len(self.class_ids) <= 10 else f" (+{len(self.class_ids) - 10} more)"
        super().__init__(f"unknown class id(s): {shown}{more}")

    def __str__(self):
        return self.args[0]


class InsufficientData(ChainlogError, ValueError):
    pass


class UnknownState(ChainlogError, KeyError):
    pass


class AbsentRow(ChainlogError, LookupError):
    """Raised when a history was never observed and the model has no smoothing."""

    def __init__(self, history):
        self.history = tuple(history)
        super().__init__(f"no transitions observed from history {self.history!r}")


class DegenerateDistribution(ChainlogError, ValueError):
    pass
