"""Exception types raised across the simulator and algorithms."""


class AmpcError(Exception):
    """Base class for every error raised by this package."""


class QuotaExceeded(AmpcError):
    def __init__(self, machine_id, used, limit, kind="queries", round_index=None):
        self.machine_id = machine_id
        self.used = used
        self.limit = limit
        self.kind = kind
        self.round_index = round_index
        super().__init__(
            f"machine {machine_id} used {used} {kind} in round {round_index} "
            f"(limit {limit})"
        )


class StoreFrozen(AmpcError):
    pass


class InvalidSize(AmpcError, ValueError):
    pass


class ParseError(AmpcError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class NotAForest(AmpcError):
    pass


class CycleDetected(AmpcError):
    pass


class DifferentComponents(AmpcError):
    pass


class NotAncestor(AmpcError):
    pass


class OutOfRange(AmpcError, IndexError):
    pass


class NotACycleGraph(AmpcError):
    pass


class ComponentTooLarge(AmpcError):
    pass


class IterationBudgetExceeded(AmpcError):
    pass


class ConfigError(AmpcError, ValueError):
    pass


class InputMismatch(AmpcError):
    pass
