"""Parse and serialize run configurations."""
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List

import yaml
from pydantic import ValidationError

from cli.config.models import RunConfig
from lib.core.errors import ConfigError
from lib.core.errors import ConfigIssue

CONFIG_DIR = Path(__file__).parent.parent.parent / "config"
DEFAULTS_FILE = CONFIG_DIR / "defaults.yaml"


def validation_issues(exc: ValidationError) -> List[ConfigIssue]:
    """One ConfigIssue per pydantic error, naming key and constraint."""
    issues = []
    for error in exc.errors():
        key = ".".join(str(part) for part in error["loc"]) or "<config>"
        if error["type"] == "extra_forbidden":
            constraint = "unknown key"
        else:
            constraint = error["msg"].removeprefix("Value error, ")
        issues.append(ConfigIssue(key, constraint))
    return issues


def load_mapping(text: str) -> Dict[str, Any]:
    """Read a flat YAML mapping.

    Raises:
        ConfigError: If the text is not YAML or not a mapping
    """
    try:
        values = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(
            [ConfigIssue("<config>", f"invalid YAML format: {exc}")],
        ) from exc
    if values is None:
        return {}
    if not isinstance(values, dict):
        raise ConfigError(
            [ConfigIssue("<config>", "must be a key: value mapping")],
        )
    return values


def build_config(values: Dict[str, Any]) -> RunConfig:
    """Validate a mapping into a RunConfig.

    Raises:
        ConfigError: Listing every violated constraint
    """
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(validation_issues(exc)) from exc


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; missing keys take their defaults.

    Args:
        text: Flat YAML mapping

    Returns:
        Validated configuration

    Raises:
        ConfigError: Listing every violated constraint
    """
    return build_config(load_mapping(text))


def serialize_config(config: RunConfig) -> str:
    """Flat YAML text that ``parse_config`` maps back to ``config``."""
    return yaml.dump(
        config.model_dump(mode="json"),
        sort_keys=False,
        default_flow_style=None,
        allow_unicode=True,
    )


def load_defaults() -> Dict[str, Any]:
    """Shipped defaults from config/defaults.yaml."""
    with open(DEFAULTS_FILE, encoding="utf-8") as file:
        return load_mapping(file.read())
