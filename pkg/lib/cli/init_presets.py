"""Load the named dissipation scenarios shipped in config/presets.yaml."""
from pathlib import Path
from typing import Dict
from typing import Optional

import yaml

from lib.core.errors import ConfigError
from lib.core.errors import ConfigIssue
from lib.wave.coefficients import parse_profile

CONFIG_DIR = Path(__file__).parent.parent.parent / "config"


def init_presets(presets_file: Optional[Path] = None) -> Dict[str, str]:
    """Load and validate the preset profiles.

    Args:
        presets_file: YAML file with a ``presets`` mapping; defaults to
            config/presets.yaml

    Returns:
        Mapping of preset name to profile specification

    Raises:
        FileNotFoundError: If the presets file does not exist
        ProfileError: If a preset profile is malformed
    """
    presets_file = presets_file or CONFIG_DIR / "presets.yaml"
    if not presets_file.exists():
        raise FileNotFoundError(f"Presets file not found: {presets_file}")

    # Load presets from YAML
    with open(presets_file, encoding="utf-8") as file:
        presets = yaml.safe_load(file)["presets"]

    # Every preset must parse
    for spec in presets.values():
        parse_profile(spec)
    return dict(presets)


def resolve_preset(name: str, presets: Dict[str, str]) -> str:
    """Profile specification of a preset.

    Raises:
        ConfigError: If no preset has this name
    """
    if name not in presets:
        raise ConfigError(
            [
                ConfigIssue(
                    "preset",
                    f"unknown preset {name!r}; expected one of "
                    f"{', '.join(presets)}",
                ),
            ],
        )
    return presets[name]
