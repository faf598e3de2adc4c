"""Committed experiment presets shipped with the package."""

from importlib import resources

import yaml

from ..errors import ConfigError
from ..experiments import spec_from_dict


def _preset_files():
    root = resources.files(__package__)
    return sorted(
        (path.name[:-5], path)
        for path in root.iterdir()
        if path.name.endswith(".yaml")
    )


def list_presets():
    """Names and descriptions of every committed preset."""
    out = []
    for name, path in _preset_files():
        data = yaml.safe_load(path.read_text())
        out.append(
            {
                "name": name,
                "kind": data.get("kind", ""),
                "description": data.get("description", ""),
            }
        )
    return out


def preset_dict(name):
    """Raw YAML mapping of one preset."""
    for candidate, path in _preset_files():
        if candidate == name:
            return yaml.safe_load(path.read_text())
    raise ConfigError(f"unknown preset {name!r}")


def load_preset(name):
    """ExperimentSpec for one committed preset."""
    return spec_from_dict(preset_dict(name))
