# -*- coding: utf-8 -*-
'''
Exception hierarchy of gfmreduce.

Every error derives from `GFMReduceError` and from the closest builtin, so
`except ValueError` keeps working for callers that do not know this package.
`exit_code` is what the command line returns for the error.
'''
from typing_extensions import Self


class GFMReduceError(Exception):
    exit_code: int = 1

    def __init__(self, message: str, *, t: float|None = None):
        super().__init__(message)
        self.message = message
        self.t = t

    def with_time(self, t: float) -> Self:
        '''Attach the simulation time if none is set yet.'''
        if self.t is None:
            self.t = float(t)
        return self

    def __str__(self) -> str:
        if self.t is None:
            return self.message
        return f'{self.message} (t={self.t:.9g} s)'

# region input errors
class ParameterError(GFMReduceError, ValueError):
    exit_code = 2

    def __init__(self, message: str, *, field: str|None = None):
        super().__init__(message)
        self.field = field

class ScenarioError(GFMReduceError, ValueError):
    exit_code = 2

    def __init__(self, message: str, *, line: int|None = None, column: int|None = None):
        if line is not None:
            message = f'{message} (line {line}, column {column})'
        super().__init__(message)
        self.line = line
        self.column = column

class ScheduleError(GFMReduceError, ValueError):
    exit_code = 2

class TraceMismatchError(GFMReduceError, ValueError):
    exit_code = 2

class StateError(GFMReduceError, ValueError):
    exit_code = 2
# endregion

# region numerical errors
class SingularGainError(GFMReduceError, ArithmeticError):
    exit_code = 3

class RhoSolverError(GFMReduceError, RuntimeError):
    exit_code = 4

    def __init__(self, message: str, *, bracket: tuple[float, float]|None = None, t: float|None = None):
        if bracket is not None:
            message = f'{message}; last bracket [{bracket[0]:.17g}, {bracket[1]:.17g}]'
        super().__init__(message, t=t)
        self.bracket = bracket

class IntegrationError(GFMReduceError, RuntimeError):
    exit_code = 4

class StepSizeError(IntegrationError):
    pass

class NonFiniteStateError(IntegrationError):
    pass

class EquilibriumError(GFMReduceError, RuntimeError):
    exit_code = 5

class NearDefectiveError(GFMReduceError, ArithmeticError):
    exit_code = 6

    def __init__(self, message: str, *, condition: float|None = None):
        super().__init__(message)
        self.condition = condition
# endregion

class InvariantBreach(GFMReduceError, AssertionError):
    exit_code = 7


__all__ = [
    'GFMReduceError',
    'ParameterError',
    'ScenarioError',
    'ScheduleError',
    'TraceMismatchError',
    'StateError',
    'SingularGainError',
    'RhoSolverError',
    'IntegrationError',
    'StepSizeError',
    'NonFiniteStateError',
    'EquilibriumError',
    'NearDefectiveError',
    'InvariantBreach',
]
