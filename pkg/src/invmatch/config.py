"""Flat key=value config files shared by every pipeline stage.

A config file is UTF-8 text, one ``key = value`` pair per line. Blank lines
and lines starting with ``#`` are ignored. Every key has a documented
default, so an empty file (or no file) is always valid.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(Exception):
    """Raised for malformed config files or invalid option values."""


def load_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat key=value file into a string-to-string mapping."""
    mapping: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        mapping[key] = value.strip()
    return mapping


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def get_str(mapping: dict[str, str], key: str, default: str) -> str:
    return mapping.get(key, default)


def get_int(mapping: dict[str, str], key: str, default: int) -> int:
    if key not in mapping:
        return default
    try:
        return int(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not an integer: {mapping[key]!r}") from exc


def get_float(mapping: dict[str, str], key: str, default: float) -> float:
    if key not in mapping:
        return default
    try:
        return float(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {mapping[key]!r}") from exc


def get_bool(mapping: dict[str, str], key: str, default: bool) -> bool:
    if key not in mapping:
        return default
    try:
        return parse_bool(mapping[key])
    except ConfigError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
