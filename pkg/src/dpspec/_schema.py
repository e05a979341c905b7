"""JSON schema loading and validation for the package's document formats."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from dpspec.errors import SchemaError

SCHEMA_NAMES = ("spec", "kernel", "statistic", "regime", "ledger", "report")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("dpspec.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_document(doc, name: str) -> None:
    """Raise SchemaError at the first (deepest-path) violation of schema ``name``."""
    validator = jsonschema.Draft202012Validator(load_schema(name))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        loc = "$" + "".join(f"[{p!r}]" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path)
        raise SchemaError(err.message, loc)
