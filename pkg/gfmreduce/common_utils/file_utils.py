import os
import tempfile

from pathlib import Path
from typing import Any

import orjson


def atomic_write_bytes(path: str|Path, data: bytes) -> Path:
    '''Write to a temporary file next to `path`, then rename it over `path`.'''
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path

def atomic_write_text(path: str|Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))

def dump_json(path: str|Path, obj: Any) -> Path:
    '''orjson with numpy support, indented.'''
    data = orjson.dumps(obj, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS)
    return atomic_write_bytes(path, data)


__all__ = ['atomic_write_bytes', 'atomic_write_text', 'dump_json']
