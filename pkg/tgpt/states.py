"""States module -- enum classes for representing states and choices"""

from enum import Enum, IntEnum


__all__ = [
    "Activation",
    "LossMode",
    "Ok",
    "Outcome",
]


class Ok(IntEnum):
    """Simplified statuses"""
    busy   =  0  # stopped at the iteration cap
    ok     =  1  # converged to tolerance
    fail   = -1  # diverged
    error  = -2  # invalid state name

    def __bool__(self):
        """Return True for truthy Ok status"""
        return self.value > 0


class AbstractState(Enum):
    """Abstract class for state-like Enum objects.
       Provides instanciation by case-insensitive name.
    """

    @classmethod
    def _missing_(cls, value):
        """Allow instantiation by case-insenstive name"""
        if isinstance(value, str):
            matches = [match for name, match in cls.__members__.items()
                       if name.lower() == value.lower().replace("-", "_")]
            if matches:
                return matches[0]
        return super()._missing_(value)

    @classmethod
    def names(cls) -> list:
        """Return the list of member names, as accepted on the command line"""
        return list(cls.__members__)

    def __str__(self):
        """Return the member name"""
        return self.name


class Activation(AbstractState):
    """Hidden-layer activation of a snapshot network.
       waveact(x) = w1*sin(x) + w2*cos(x) with trainable (w1, w2) per layer.
    """
    tanh     = "tanh"
    waveact  = "waveact"


class LossMode(AbstractState):
    """Online loss of the meta-network."""
    pde       = "pde"
    function  = "function"


class Outcome(AbstractState):
    """How a training run ended."""

    def __new__(cls, value, is_ok: Ok=None):
        """Initialize value and Ok object"""
        obj = object.__new__(cls)
        obj._value_ = value
        obj.ok = is_ok
        return obj

    converged       = ("converged", Ok.ok)
    max_iterations  = ("max_iterations", Ok.busy)
    diverged        = ("diverged", Ok.fail)

    @property
    def exit_code(self) -> int:
        """Exit status used by the commands: 0 converged, 2 iteration cap, 1 otherwise"""
        return {Ok.ok: 0, Ok.busy: 2}.get(self.ok, 1)
