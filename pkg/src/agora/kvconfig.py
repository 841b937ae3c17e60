"""Plain-text key=value configuration for simulator and constraint settings.

Lines are `key = value`; `#` starts a comment. Keys are matched against
dataclass field names; values are coerced to the field's declared type.
"""

from __future__ import annotations

import dataclasses
from typing import Mapping, Type, TypeVar

T = TypeVar("T")


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def coerce_fields(cls: Type[T], raw: Mapping[str, str]) -> dict:
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        if key not in fields:
            raise ValueError(f"unknown {cls.__name__} field {key!r}")
        ftype = fields[key].type
        if ftype in ("int", int):
            kwargs[key] = int(value)
        elif ftype in ("float", float):
            kwargs[key] = float(value)
        elif ftype in ("bool", bool):
            kwargs[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            kwargs[key] = value
    return kwargs


def load_config(cls: Type[T], path, overrides: Mapping[str, str] | None = None) -> T:
    raw: dict[str, str] = {}
    if path is not None:
        with open(path) as fh:
            raw.update(parse_kv_text(fh.read()))
    if overrides:
        raw.update({k: str(v) for k, v in overrides.items()})
    return cls(**coerce_fields(cls, raw))


def dump_config(obj) -> str:
    lines = []
    for f in dataclasses.fields(obj):
        lines.append(f"{f.name} = {getattr(obj, f.name)}")
    return "\n".join(lines) + "\n"
