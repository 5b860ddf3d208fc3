"""JSON schemas shipped with the package (versioned by their ``$id``)."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema


class SchemaError(ValueError):
    pass


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("fqshape").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_domain_json(data) -> None:
    """Raise :class:`SchemaError` naming the first offending field."""
    validator = jsonschema.Draft202012Validator(load_schema("domain"))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(f"domain field '{_path(err)}': {err.message}")


def validate_report_json(data) -> None:
    jsonschema.validate(data, load_schema("report"))
