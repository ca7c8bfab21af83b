import json
import sys
from types import UnionType, NoneType
from typing import (
    Type,
    TypeVar,
    NewType,
    Any,
    overload,
    get_args,
    get_origin
)


def perror(*values: object):
    """Logs data to the defined output stream.

    Params:
        values `*object` : content being logged
    """

    print(*values, file=sys.stderr)


_NotDefined = NewType('_NotDefined', None)

_T = TypeVar('_T')
_U = TypeVar('_U')


@overload
def getc(o: dict, name: str, _type: Type[_T], /) -> _T:
    ...


@overload
def getc(o: dict, name: str, _type: Type[_T], default: _U, /) -> _T | _U:
    ...


def getc(o: dict,
         name: str,
         _type: Type[_T],
         default: _U | Type[_NotDefined]=_NotDefined
        ) -> _T | _U | None:
    """Alternative for `dict.get()` that casts the attribute to `_type`.

    Raises `KeyError` when `name` is missing and no default is given,
    `TypeError` when the value cannot be cast.
    """

    if name not in o:
        if default is _NotDefined:
            raise KeyError(name)
        return default

    attr = o[name]
    _types = get_args(_type)
    _origin = get_origin(_type)

    if _origin is None:
        if _type is bool and not isinstance(attr, bool):
            raise TypeError(f'field {name} is not a boolean')
        try:
            return _type(attr)
        except (TypeError, ValueError) as err:
            raise TypeError(f'cannot cast field {name} to type {_type}') \
                from err
    elif _origin is list:
        if not isinstance(attr, list):
            raise TypeError(f'field {name} does not map to a list')

        if len(_types) > 1:
            if len(attr) != len(_types):
                raise TypeError(f'field {name} has {len(attr)} items,'
                                f' expected {len(_types)}')
            return [list_type(item) for list_type, item in zip(_types, attr)]

        list_type = _types[0]
        try:
            return list(map(lambda item: list_type(item), attr))
        except (TypeError, ValueError) as err:
            raise TypeError(f'list item of {name} cannot cast to'
                            f' {list_type}') from err
    elif _origin is dict:
        if not isinstance(attr, dict):
            raise TypeError(f'field {name} does not map to a dict')

        key_type, val_type = (_types + (Any,))[:2]
        result = {}
        for _key, _val in attr.items():
            try:
                key = key_type(_key)
                val = _val if val_type is Any else val_type(_val)
            except (TypeError, ValueError) as err:
                raise TypeError(f'entry {_key} of {name} is not compatible'
                                f' with {_type}') from err
            result[key] = val
        return result
    elif _origin is UnionType:
        if NoneType in _types and attr is None:
            return None

        for union_type in _types:
            if union_type is NoneType:
                continue
            try:
                return union_type(attr)
            except (TypeError, ValueError):
                continue
        raise TypeError(f'cannot cast field {name} to {_type}')
    else:
        raise TypeError(f'unsupported type: {_origin}')


class JSONObject:
    """Interface for converting a JSON string or object into a class.

    Extend when defining a class representation of a JSON object.

    Useful Methods:
        - `get` returns the type-hinted contents of a JSON field
    """

    def __init__(self, _json: str | dict[str, Any]):
        if isinstance(_json, str):
            self.json: dict[str, Any] = json.loads(_json)
        else:
            self.json = _json

    @overload
    def get(self, name: str, _type: Type[_T], /) -> _T:
        ...

    @overload
    def get(self, name: str, _type: Type[_T], default: _U, /) -> _T | _U:
        ...

    def get(self,
            name: str,
            _type: Type[_T],
            default: _U | Type[_NotDefined]=_NotDefined
           ) -> _T | _U | None:
        return getc(self.json, name, _type, default)

    def section(self, name: str) -> 'JSONObject':
        """Returns the nested object `name` as a `JSONObject`."""

        return JSONObject(getc(self.json, name, dict, {}))


def deep_merge(base: dict, override: dict) -> dict:
    """Returns a copy of `base` with `override` merged in recursively."""

    merged = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], val)
        else:
            merged[key] = val
    return merged
