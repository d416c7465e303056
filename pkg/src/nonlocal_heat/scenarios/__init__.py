"""Bundled scenario configs, addressable by bare name from the CLI."""

from importlib import resources
from pathlib import Path

__all__ = ["scenario_names", "scenario_path"]


def scenario_names() -> list[str]:
    root = resources.files(__package__)
    return sorted(
        entry.name[: -len(".toml")]
        for entry in root.iterdir()
        if entry.name.endswith(".toml")
    )


def scenario_path(name: str) -> Path:
    path = resources.files(__package__) / f"{name}.toml"
    if not path.is_file():
        raise FileNotFoundError(
            f"no bundled scenario {name!r} (available: {', '.join(scenario_names())})"
        )
    return Path(str(path))
