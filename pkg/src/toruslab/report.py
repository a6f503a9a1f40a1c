"""Report documents: one JSON file per run plus CSV tables of the checks."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema

from . import __version__
from .config import config_hash

SCHEMA_VERSION = "1.0"

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "tool", "version", "config", "config_hash", "surface", "grid", "suites", "passed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {"const": "toruslab"},
        "version": {"type": "string"},
        "config": {"type": "object"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "surface": {
            "type": "object",
            "required": ["name", "ambient"],
            "properties": {"name": {"type": "string"}, "ambient": {"type": "integer", "minimum": 3}},
        },
        "grid": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 2, "maxItems": 2},
        "suites": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "checks"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "checks": {
                        "type": "array",
                        "items": {"type": "object", "required": ["name", "value", "passed"]},
                    },
                },
            },
        },
        "spectrum": {
            "type": "object",
            "required": ["index", "nullity", "eigenvalues"],
            "properties": {"index": {"type": "integer"}, "nullity": {"type": "integer"}},
        },
        "passed": {"type": "boolean"},
    },
}


def build_report(surface: dict, grid, cfg: dict, suites=(), spectrum: dict | None = None, extra: dict | None = None) -> dict:
    suites = [s.to_dict() if hasattr(s, "to_dict") else s for s in suites]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": "toruslab",
        "version": __version__,
        "config": dict(cfg),
        "config_hash": config_hash(cfg),
        "surface": surface,
        "grid": [int(grid[0]), int(grid[1])],
        "suites": suites,
        "passed": all(s["passed"] for s in suites),
    }
    if spectrum is not None:
        doc["spectrum"] = spectrum
    if extra:
        doc.update(extra)
    validate(doc)
    return doc


def validate(doc: dict) -> None:
    jsonschema.validate(doc, SCHEMA)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True)


def write_json(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc) + "\n", encoding="utf-8")


def write_checks_csv(doc: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "check", "value", "relation", "limit", "passed"])
        for suite in doc["suites"]:
            for c in suite["checks"]:
                w.writerow([suite["name"], c["name"], c["value"], c.get("relation", ""), c.get("limit", ""), c["passed"]])


def write_spectrum_csv(spectrum: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["eigenvalue", "multiplicity"])
        for value, mult in spectrum["multiplicities"]:
            w.writerow([f"{value:.15g}", mult])
