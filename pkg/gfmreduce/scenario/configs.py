from pathlib import Path
from typing import Any, Literal


from pydantic import ConfigDict, ValidationError, field_validator

from ..common_utils.config_utils import TidyModel, describe_validation_error, load_json_document
from ..common_utils.errors import ScenarioError
from ..model.params import ParameterSet, load_parameters
from ..model.reduced_order import LimiterMode
from ..simulate.configs import InputSchedule, SolverConfig

BUNDLED_DIR = Path(__file__).parent / 'bundled'


class Scenario(TidyModel):
    '''One simulation case: parameters, inputs over time, solver settings and initial state.'''

    model_config = ConfigDict(frozen=True, extra='forbid', allow_inf_nan=False)

    name: str
    description: str = ''
    parameters: str|dict[str, Any] = 'table1'
    '''
    A named set, or a parameter document. The generic name `table1` picks
    the L_g/R_g row matching `line_type`.
    '''
    line_type: Literal['inductive', 'resistive'] = 'inductive'
    '''selects the reduced model: reduced-L for inductive, reduced-R for resistive lines'''
    limiter_mode: LimiterMode = LimiterMode.SMOOTH
    '''limiter treatment of the reduced model; the full model always limits'''
    schedule: InputSchedule
    solver: SolverConfig|None = None
    '''full-model solver, per-model defaults when omitted'''
    reduced_solver: SolverConfig|None = None
    initial_state: Literal['equilibrium']|tuple[float, ...] = 'equilibrium'
    '''explicit state vector of the full model, or the equilibrium at the t=0 inputs'''

    @field_validator('initial_state')
    @classmethod
    def _check_initial_state(cls, value):
        if not isinstance(value, str) and len(value) != 12:
            raise ValueError(f'an explicit initial state has 12 entries, got {len(value)}')
        return value

    @property
    def reduced_model(self) -> str:
        return 'reduced-L' if self.line_type == 'inductive' else 'reduced-R'

    def resolve_parameters(self) -> ParameterSet:
        source = self.parameters
        if isinstance(source, str) and source.strip().lower() == 'table1':
            source = f'table1-{self.line_type}'
        return load_parameters(source)

    def solver_for(self, model: str) -> SolverConfig:
        if model == 'full':
            return self.solver or SolverConfig.Defaults('full')
        return self.reduced_solver or SolverConfig.Defaults('reduced')

    def with_horizon(self, horizon: float) -> 'Scenario':
        return self.model_copy(update={'schedule': self.schedule.with_horizon(horizon)})

    def dumps(self) -> bytes:
        return self.to_json_bytes()

    @classmethod
    def Parse(cls, source: str|bytes|Path|dict) -> 'Scenario':
        '''From a mapping, JSON text or a file path; errors become ScenarioError.'''
        data = source if isinstance(source, dict) else load_json_document(source, ScenarioError)
        if not isinstance(data, dict):
            raise ScenarioError('a scenario document must be a JSON object')
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ScenarioError(f'invalid scenario: {describe_validation_error(e)}') from e

    @classmethod
    def Load(cls, path: str|Path) -> 'Scenario':
        return cls.Parse(Path(path))


def bundled_scenarios() -> list[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob('*.json'))

def resolve_scenario(ref: str|Path) -> Scenario:
    '''A scenario file path, or the name of a bundled scenario.'''
    path = Path(ref)
    if path.is_file():
        return Scenario.Load(path)
    bundled = BUNDLED_DIR / f'{ref}.json'
    if bundled.is_file():
        return Scenario.Load(bundled)
    raise ScenarioError(f'no scenario file or bundled scenario named `{ref}` '
                        f'(bundled: {", ".join(bundled_scenarios())})')


__all__ = ['Scenario', 'BUNDLED_DIR', 'bundled_scenarios', 'resolve_scenario']
