"""Strict config files for the command-line tools.

The format is a small INI subset: `[section]` headers, `key = value` pairs,
blank lines, and comments starting with `#` or `;`.  Sections and keys are
whitelisted; anything unknown is a hard error naming the line and column.
Values are kept as stripped strings and converted on access, so a parse,
serialize, parse round trip is lossless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["ConfigError", "Config", "parse_config", "serialize_config", "SCHEMA"]

# section -> allowed keys, in canonical serialization order
SCHEMA = {
    "sequence": ("corpus", "expr"),
    "kernel": ("name", "base"),
    "params": ("r", "s", "t", "u"),
    "schedule": ("sides",),
    "tolerance": ("decision_tol", "exact_tol", "trend_ratio"),
    "operation": ("op", "space", "class", "which", "set", "kind", "norm", "q"),
    "output": ("format",),
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = None, col: int = None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", column {col}"
            message = f"{message} ({where})"
        super().__init__(message)


@dataclass
class Config:
    sections: dict = field(default_factory=dict)

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return value

    def get_float(self, section: str, key: str, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a number, got {raw!r}")

    def get_int_list(self, section: str, key: str, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        out = []
        for piece in raw.split():
            try:
                out.append(int(piece))
            except ValueError:
                raise ConfigError(
                    f"{section}.{key} must be whitespace-separated integers, got {piece!r}"
                )
        if not out:
            raise ConfigError(f"{section}.{key} must not be empty")
        return out


def parse_config(text: str) -> Config:
    sections: dict = {}
    current = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#") or stripped.startswith(";"):
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, indent + 1)
            name = stripped[1:-1].strip()
            if name not in SCHEMA:
                raise ConfigError(
                    f"unknown section [{name}]; allowed: {', '.join(SCHEMA)}",
                    lineno,
                    indent + 1,
                )
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno, indent + 1)
            sections[name] = {}
            current = name
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, indent + 1)
        if current is None:
            raise ConfigError("key outside of any section", lineno, indent + 1)
        eq = line.index("=")
        key = line[:eq].strip()
        value = line[eq + 1:].strip()
        if key not in SCHEMA[current]:
            raise ConfigError(
                f"unknown key {key!r} in [{current}]; allowed: {', '.join(SCHEMA[current])}",
                lineno,
                indent + 1,
            )
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno, indent + 1)
        if not value:
            raise ConfigError(f"empty value for {current}.{key}", lineno, eq + 2)
        sections[current][key] = value
    return Config(sections=sections)


def serialize_config(cfg: Config) -> str:
    """Canonical text: schema section and key order, one blank line between sections."""
    for name in cfg.sections:
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        for key in cfg.sections[name]:
            if key not in SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
    chunks = []
    for name in SCHEMA:
        if name not in cfg.sections:
            continue
        lines = [f"[{name}]"]
        for key in SCHEMA[name]:
            if key in cfg.sections[name]:
                lines.append(f"{key} = {cfg.sections[name][key]}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
