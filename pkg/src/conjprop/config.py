"""Plain-text run configuration.

A config file holds one "key = value" pair per line; full-line comments
start with "#".  Keys mirror the long command-line flag names (without the
leading dashes), command-line flags override file values, and built-in
defaults fill the rest.  The resolved result is logged by the command-line
layer so any run can be reproduced from its log.
"""

from __future__ import annotations


class ConfigError(Exception):
    """Malformed configuration; the message names the file and line."""


def read_config_file(path: str) -> dict[str, str]:
    """Key-value pairs from a config file; a later repeated key wins."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"{path}: {err.strerror}") from None
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        out[key] = value.strip()
    return out


_BOOLEANS = {"true": True, "yes": True, "on": True, "1": True,
             "false": False, "no": False, "off": False, "0": False}


def parse_value(key: str, text: str, kind: str, where: str):
    """Converts a raw config string to kind; errors name the source."""
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigError(
                f"{where}: {key} expects an integer, got {text!r}") from None
    if kind == "float":
        try:
            return float(text)
        except ValueError:
            raise ConfigError(
                f"{where}: {key} expects a number, got {text!r}") from None
    if kind == "bool":
        try:
            return _BOOLEANS[text.lower()]
        except KeyError:
            raise ConfigError(
                f"{where}: {key} expects true or false, got {text!r}") from None
    return text
