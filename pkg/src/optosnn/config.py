"""Flat key-value experiment configuration.

Files hold named sections of ``key = value`` lines:

    [experiment]
    name = fig5
    seed = 42
    output_dir = out/fig5

    [neuron]
    preset = regular
    dt_seconds = 1e-5

Keys carry their units in the name (dt_seconds, amplitude_amperes) so a
config is unambiguous without a schema in hand. Parsing and serialization
round-trip exactly: parse(format(parse(text))) == parse(text), with
sections and keys emitted in sorted order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

__all__ = ["ConfigError", "parse_config", "format_config", "config_hash",
           "ExperimentConfig"]


class ConfigError(ValueError):
    """Malformed configuration text or missing/invalid entries."""


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Parse sectioned key-value text into nested dicts."""
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        current[key] = value.strip()
    return sections


def format_config(sections: dict[str, dict[str, str]]) -> str:
    """Canonical text: sections and keys sorted, one blank line between."""
    blocks = []
    for name in sorted(sections):
        lines = [f"[{name}]"]
        for key in sorted(sections[name]):
            lines.append(f"{key} = {sections[name][key]}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def config_hash(sections: dict[str, dict[str, str]]) -> str:
    """SHA-256 over the canonical text form."""
    return hashlib.sha256(format_config(sections).encode()).hexdigest()


@dataclass
class ExperimentConfig:
    """Typed access over parsed sections, with config-error reporting."""

    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls(sections=parse_config(text))

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def raw(self, section: str, key: str, default: str | None = None) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            if default is not None:
                return default
            raise ConfigError(f"missing config entry [{section}] {key}") from None

    def get_str(self, section: str, key: str, default: str | None = None) -> str:
        return self.raw(section, key, default)

    def get_int(self, section: str, key: str, default: int | None = None) -> int:
        raw = self.raw(section, key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"[{section}] {key} = {raw!r} is not an integer"
            ) from None

    def get_float(self, section: str, key: str, default: float | None = None) -> float:
        raw = self.raw(section, key, None if default is None else repr(default))
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None

    def get_bool(self, section: str, key: str, default: bool | None = None) -> bool:
        raw = self.raw(section, key, None if default is None else str(default).lower())
        val = raw.strip().lower()
        if val in ("true", "yes", "1", "on"):
            return True
        if val in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    def hash(self) -> str:
        return config_hash(self.sections)

    def canonical_text(self) -> str:
        return format_config(self.sections)
