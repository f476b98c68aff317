from typing import Any, Dict, List, Tuple

from .errors import ConfigError


class ConfigText:
    """
    helpers for the flat `key = value` experiment format

    one pair per line, `#` starts a comment, blank lines are ignored and the first
    pair must be schema_version
    """

    @staticmethod
    def decode(text: str) -> Dict[str, str]:
        def parse_line(number: int, line: str) -> Tuple[str, str]:
            if "=" not in line:
                raise ConfigError(f"line {number}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if not key or not key.replace("_", "").isalnum():
                raise ConfigError(f"line {number}: invalid key {key!r}")
            if not value:
                raise ConfigError(f"line {number}: key {key!r} has no value")
            return key, value

        pairs: List[Tuple[int, str, str]] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                pairs.append((number, *parse_line(number, line)))

        if not pairs:
            raise ConfigError("config is empty")
        if pairs[0][1] != "schema_version":
            raise ConfigError(f"line {pairs[0][0]}: the first key must be schema_version, got {pairs[0][1]!r}")

        values: Dict[str, str] = {}
        for number, key, value in pairs:
            if key in values:
                raise ConfigError(f"line {number}: duplicate key {key!r}")
            values[key] = value
        return values

    @staticmethod
    def encode(values: Dict[str, Any]) -> str:
        """writes schema_version first, then the remaining keys in order"""
        def render(value: Any) -> str:
            if isinstance(value, bool):
                return "true" if value else "false"
            if isinstance(value, float):
                return format(value, ".17g")
            if isinstance(value, (list, tuple)):
                return ", ".join(render(v) for v in value)
            return str(value)

        if "schema_version" not in values:
            raise ConfigError("cannot encode a config without schema_version")
        lines = [f"schema_version = {render(values['schema_version'])}"]
        for key, value in values.items():
            if key != "schema_version" and value is not None:
                lines.append(f"{key} = {render(value)}")
        return "\n".join(lines) + "\n"
