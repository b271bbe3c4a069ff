"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A scale, share or step size is outside its admissible range."""


class InvalidPartitionError(ValueError):
    """Nests of a nested logit do not partition the arms."""


class DegenerateInputError(ValueError):
    """Input at which a function is not defined (e.g. G at the origin)."""


class RewardRangeError(ValueError):
    """A reward lies outside the range required by the learner's mode."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent.

    ``field`` names the offending key (dotted path) and ``invariant``
    names the violated rule, when known.
    """

    def __init__(self, message, field=None, invariant=None, line=None):
        self.field = field
        self.invariant = invariant
        self.line = line
        parts = [message]
        if field is not None:
            parts.append(f"field={field}")
        if invariant is not None:
            parts.append(f"invariant={invariant}")
        if line is not None:
            parts.append(f"line={line}")
        super().__init__("; ".join(parts))
