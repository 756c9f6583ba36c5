import dataclasses
import enum
import os
import pathlib
import sys
import tempfile
from typing import Any, Callable, Literal

import chardet
import numpy as np
import orjson
import pandas as pd

JSONDecodeError = orjson.JSONDecodeError
JSONEncodeError = orjson.JSONEncodeError
OPT_INDENT_2 = orjson.OPT_INDENT_2
OPT_PASSTHROUGH_DATACLASS = orjson.OPT_PASSTHROUGH_DATACLASS
OPT_SERIALIZE_NUMPY = orjson.OPT_SERIALIZE_NUMPY
OPT_SORT_KEYS = orjson.OPT_SORT_KEYS


def __custom_default(obj: Any) -> Any:
    """
    Fallback for objects orjson does not serialize natively.

    - complex / np.complexfloating: {"re": ..., "im": ...}
    - complex np.ndarray: {"re": nested list, "im": nested list}
    - other np.ndarray and np.generic: list or Python scalar
    - objects with a to_dict method (Unitary2, ZetaSeries, reports): their dict
    - other dataclasses: their fields, one level deep, so nested values reach this hook again
    - enum.Enum: its value
    - pd.Series: list
    """
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': float(obj.real), 'im': float(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {'re': obj.real.tolist(), 'im': obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, pd.Series):
        return obj.to_list()
    if hasattr(obj, 'to_dict') and not isinstance(obj, type):
        return obj.to_dict()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    raise TypeError(f'Type is not JSON serializable: {type(obj).__name__}')


def atomic_write(path: str | os.PathLike | pathlib.Path, data: bytes) -> pathlib.Path:
    """Write bytes to a temporary file next to `path`, then rename it into place."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps(
    __obj: Any,
    /,
    default: Callable[[Any], Any] = None,
    option: int = None,
    output: str | os.PathLike | pathlib.Path = None,
    return_str: bool = False,
) -> bytes | str:
    """
    Serialize an object to JSON with orjson.

    Parameters:
    __obj (Any): The object to be serialized.
    default (Callable[[Any], Any], optional): Handler for non-serializable objects. Defaults to the
        module fallback, which covers complex numbers, complex arrays and objects with to_dict.
    option (int, optional): orjson OPT_* flags. OPT_SERIALIZE_NUMPY and OPT_PASSTHROUGH_DATACLASS
        are always added, so dataclasses with a to_dict method serialize through it.
    output (str | os.PathLike | pathlib.Path, optional): File to write atomically.
    return_str (bool, optional): Return str instead of bytes.

    Returns:
    bytes | str: The JSON document.
    """
    if option is None:
        option = 0
    if type(option) is not int:
        raise TypeError('option must be an integer or zetapulse.serialize.OPT_* or None')
    option |= OPT_SERIALIZE_NUMPY | OPT_PASSTHROUGH_DATACLASS
    data = orjson.dumps(__obj, default=default or __custom_default, option=option)

    if output is not None:
        atomic_write(output, data)

    if not return_str:
        return data
    else:
        return data.decode(sys.getdefaultencoding())


def __is_valid_file_path(s: str | os.PathLike | pathlib.Path):
    """check if a string is a valid file path and exists"""
    return isinstance(s, (str, os.PathLike, pathlib.Path)) and os.path.isfile(s)


def __convert_to_utf8(
    data: bytes | bytearray | memoryview,
    encoding: Literal['utf-8-sig', 'gbk', 'gb18030', 'latin-1'] = None,
    errors: Literal['strict', 'ignore', 'replace'] = None,
) -> bytes:
    """
    Re-encode input to UTF-8 for orjson.

    Tries `encoding` (default utf-8) first and falls back to chardet detection.
    """
    if isinstance(data, memoryview):
        data = data.tobytes()
    encoding = encoding or 'utf-8'
    errors = errors or 'strict'
    try:
        return data.decode(encoding=encoding, errors=errors).encode('utf-8')
    except UnicodeDecodeError:
        detected = chardet.detect(data)['encoding'] or 'latin-1'
        return data.decode(encoding=detected, errors=errors).encode('utf-8')


def loads(
    __obj: bytes | bytearray | memoryview | str | os.PathLike | pathlib.Path,
    encoding: Literal['utf-8-sig', 'gbk', 'gb18030', 'latin-1'] = None,
    errors: Literal['strict', 'ignore', 'replace'] = None,
) -> dict | list | str | int | float | bool | None:
    """
    Parse JSON from bytes, a JSON string or a path to a JSON file.

    Bytes that are not valid UTF-8 JSON are re-decoded with `encoding` or, failing that,
    with the encoding chardet detects.
    """
    if isinstance(__obj, (bytes, bytearray, memoryview)):
        try:
            return orjson.loads(__obj)
        except JSONDecodeError:
            return orjson.loads(__convert_to_utf8(__obj, encoding=encoding, errors=errors))

    if isinstance(__obj, (os.PathLike, pathlib.Path)) or (isinstance(__obj, str) and __is_valid_file_path(__obj)):
        with open(__obj, 'rb') as f:
            return loads(f.read(), encoding=encoding, errors=errors)

    return orjson.loads(__obj)


def write_table(frame: pd.DataFrame, path: str | os.PathLike | pathlib.Path) -> pathlib.Path:
    """Comma-separated table with one header line, written atomically. Column names carry their units."""
    text = frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    return atomic_write(path, text.encode('utf-8'))


def read_table(path: str | os.PathLike | pathlib.Path) -> pd.DataFrame:
    return pd.read_csv(path)
