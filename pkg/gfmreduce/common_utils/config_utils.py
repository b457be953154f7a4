from pathlib import Path
from functools import cache
from typing import Any
from typing_extensions import Self

import orjson

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .errors import GFMReduceError, ScenarioError


def _simplify_name(name: str) -> str:
    return name.lower().replace(' ', '').replace('_', '').replace('-', '').strip()

@cache
def _field_name_mapper(cls: type['TidyModel']) -> dict[str, str]:
    mapper = {}
    for field_name in cls.model_fields:
        mapper[_simplify_name(field_name)] = field_name
    return mapper


class TidyModel(BaseModel):
    '''
    Base of all configuration documents.

    Keys are matched loosely (`K_Pi`, `kpi` and `k-pi` name the same field),
    but a key that matches no field is an error.
    '''

    model_config = ConfigDict(frozen=True, extra='forbid')

    @classmethod
    def TidyConfigFieldName(cls, name: str) -> str|None:
        '''Get the actual field name from a simplified name.'''
        return _field_name_mapper(cls).get(_simplify_name(name), None)

    @model_validator(mode='before')
    @classmethod
    def _PreValidator(cls, data):
        if isinstance(data, dict):
            mapper = _field_name_mapper(cls)
            new_data = {}
            for key, value in data.items():
                simple_key = _simplify_name(str(key))
                # unknown keys pass through untouched so `extra='forbid'` reports them
                new_data[mapper.get(simple_key, key)] = value
            return new_data
        return data

    def to_json_bytes(self) -> bytes:
        return orjson.dumps(self.model_dump(mode='json'), option=orjson.OPT_INDENT_2)

    def save_to(self, path: str|Path):
        from .file_utils import atomic_write_bytes
        atomic_write_bytes(path, self.to_json_bytes())

    @classmethod
    def Load(cls, path: str|Path) -> Self:
        return cls.model_validate_json(Path(path).read_bytes())


def first_error_field(err: ValidationError) -> str|None:
    '''Dotted location of the first validation error, if any.'''
    errors = err.errors()
    if not errors:
        return None
    loc = [str(p) for p in errors[0].get('loc', ())]
    return '.'.join(loc) or None

def describe_validation_error(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = '.'.join(str(p) for p in e.get('loc', ())) or '<document>'
        parts.append(f'{loc}: {e.get("msg", "invalid")}')
    return '; '.join(parts)

def load_json_document(source: str|Path|bytes, error_cls: type[GFMReduceError]) -> Any:
    '''
    Read a JSON document from a path, JSON text or bytes.
    Decode errors are re-raised as `error_cls`, with line and column when the class takes them.
    '''
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(('{', '[', '"'))):
        path = Path(source)
        if not path.is_file():
            raise error_cls(f'File not found: {path}')
        raw = path.read_bytes()
    elif isinstance(source, str):
        raw = source.encode('utf-8')
    else:
        raw = source
    try:
        return orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        if issubclass(error_cls, ScenarioError):
            raise error_cls(f'Invalid JSON: {e.msg}',
                            line=getattr(e, 'lineno', None),
                            column=getattr(e, 'colno', None)) from e
        raise error_cls(f'Invalid JSON: {e}') from e


__all__ = ['TidyModel', 'first_error_field', 'describe_validation_error', 'load_json_document']
