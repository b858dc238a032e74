# Run configuration: a flat key = value text format.
#
#     # comment
#     include = base.cfg      (resolved relative to the including file)
#     k = 3                   int
#     X = 1e3, 1e4, 1e5       comma list
#     dump = true             bool
#     alpha = algebraic:2     anything else is a string
#
# Later keys override earlier ones, included files are read at the point of
# inclusion, and to_text() writes the same format back with sorted keys.

"""
Container for the run configuration

Functions:
    parse_value
    format_value

Classes:
    RunConfig - typed key/value settings for one subcommand run
"""
import logging
import os
import re
from pathlib import Path

from .defaults import Defaults
from .errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "PAIRTHETA_OUTPUT_DIR"

DEFAULT_OUTPUT_DIR = "pairtheta-out"

KEY_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")

INT_PATTERN = re.compile(r"^[+-]?\d+$")

FLOAT_PATTERN = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$")


def _scalar(text: str):
    if text in ("true", "false"):
        return text == "true"
    if INT_PATTERN.match(text):
        return int(text)
    if FLOAT_PATTERN.match(text):
        return float(text)
    return text


def parse_value(text: str):
    """Type a value by its literal form; commas make a list."""
    text = text.strip()
    if "," in text:
        return [_scalar(item.strip()) for item in text.split(",")]
    return _scalar(text)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)


class RunConfig:
    """Settings of one run: the subcommand plus typed keys.

    Every tolerance and budget of Defaults is present, so the text written
    by to_text() reproduces the run without relying on code defaults.
    """

    def __init__(self, subcommand: str = "", values: dict | None = None):
        self.subcommand = subcommand
        """name of the subcommand to run"""
        self.values = Defaults.as_dict()
        """typed settings by key"""
        self.values.setdefault("output_dir", os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
        if values:
            self.values.update(values)

    def __getitem__(self, key: str):
        try:
            return self.values[key]
        except KeyError:
            raise ConfigError(f"missing required key {key!r}") from None

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def get_list(self, key: str, default=None) -> list:
        """A key that may hold a scalar or a list, as a list."""
        value = self.values.get(key, default)
        if value is None:
            return []
        return list(value) if isinstance(value, (list, tuple)) else [value]

    def update(self, overrides: dict) -> "RunConfig":
        """Overlay non-None entries, e.g. explicit command-line flags."""
        for key, value in overrides.items():
            if value is not None:
                self.values[key] = value
        return self

    def to_text(self, exclude=()) -> str:
        lines = [f"subcommand = {self.subcommand}"] if self.subcommand else []
        lines += [f"{key} = {format_value(self.values[key])}" for key in sorted(self.values)
                  if key not in exclude]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_text(cls, text: str, path: str = "<string>", _stack: tuple = ()) -> "RunConfig":
        config = cls()
        for key, value in cls._entries(text, path, _stack):
            if key == "subcommand":
                config.subcommand = str(value)
            else:
                config.values[key] = value
        return config

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as error:
            raise ConfigError(f"cannot read config: {error.strerror}", str(path), 0) from error
        return cls.parse_text(text, str(path), (str(path.resolve()),))

    @classmethod
    def _entries(cls, text: str, path: str, stack: tuple):
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, number)
            key, value = (part.strip() for part in line.split("=", 1))
            if not KEY_PATTERN.match(key):
                raise ConfigError(f"invalid key {key!r}", path, number)
            if not value:
                raise ConfigError(f"key {key!r} has no value", path, number)
            if key == "include":
                yield from cls._include(value, path, number, stack)
                continue
            yield key.replace("-", "_"), parse_value(value)

    @classmethod
    def _include(cls, value: str, path: str, number: int, stack: tuple):
        base = Path(path).parent if path != "<string>" else Path.cwd()
        target = (base / value).resolve()
        if str(target) in stack:
            raise ConfigError(f"include cycle through {value}", path, number)
        try:
            text = target.read_text(encoding="utf-8")
        except OSError as error:
            raise ConfigError(f"cannot include {value}: {error.strerror}", path, number) from error
        logger.debug("including %s from %s:%d", target, path, number)
        yield from cls._entries(text, str(target), stack + (str(target),))
