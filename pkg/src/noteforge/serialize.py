"""Canonical interchange format: UTF-8 JSON with sorted keys, the
schema_version field first, and fixed decimal formatting for timestamps."""

from __future__ import annotations

import json
import math

from .errors import SchemaVersionUnsupported, ValidationFailed
from .scheme import SCHEMA_VERSION, NoteScheme, scheme_from_dict, validate_scheme

TIMESTAMP_KEYS = frozenset({"t_s", "t_e", "timestamp", "duration", "boundary_time"})


def dumps_canonical(value, field_formats: dict[str, str] | None = None) -> str:
    """Serialize to canonical text: sorted keys (schema_version hoisted at the
    top level), compact separators, per-field numeric formats."""
    formats = dict(field_formats or {})
    parts: list[str] = []
    _emit(value, None, formats, parts, top=True)
    return "".join(parts)


def _emit(value, key: str | None, formats: dict[str, str], parts: list[str], top: bool = False):
    if isinstance(value, dict):
        keys = sorted(value.keys())
        if top and "schema_version" in value:
            keys = ["schema_version"] + [k for k in keys if k != "schema_version"]
        parts.append("{")
        for i, k in enumerate(keys):
            if i:
                parts.append(",")
            parts.append(json.dumps(k, ensure_ascii=False))
            parts.append(":")
            _emit(value[k], k, formats, parts)
        parts.append("}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _emit(item, key, formats, parts)
        parts.append("]")
    elif isinstance(value, bool) or value is None:
        parts.append(json.dumps(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number under {key!r}")
        fmt = formats.get(key or "")
        if fmt is None and key in TIMESTAMP_KEYS:
            fmt = ".3f"
        parts.append(format(value, fmt) if fmt else json.dumps(value))
    elif isinstance(value, int):
        fmt = formats.get(key or "")
        if fmt is None and key in TIMESTAMP_KEYS:
            fmt = ".3f"
        parts.append(format(value, fmt) if fmt else str(value))
    elif isinstance(value, str):
        parts.append(json.dumps(value, ensure_ascii=False))
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} under {key!r}")


def serialize_scheme(scheme: NoteScheme) -> str:
    return dumps_canonical(scheme.to_dict())


def parse_scheme(document: str, assets: set[str] | None = None) -> NoteScheme:
    """Parse and fully validate a canonical scheme document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValidationFailed("$", f"not well-formed: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationFailed("$", "document root must be an object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(f"schema_version {version!r}")
    for required in ("title", "duration", "source_uri", "chapters"):
        if required not in data:
            raise ValidationFailed(required, "missing field")
    try:
        scheme = scheme_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValidationFailed("$", f"malformed structure: {exc}") from exc
    problems = validate_scheme(scheme, assets)
    if problems:
        raise ValidationFailed(problems[0])
    return scheme
