"""
fixtures package
Shared test data for the simprof test suite: the bundled recipe configurations.
"""

import json
from pathlib import Path
from typing import Any

RECIPES_DIR = Path(__file__).resolve().parents[2] / "recipes"


def recipe_paths() -> list[Path]:
    """All bundled recipe files, sorted by name."""
    return sorted(RECIPES_DIR.glob("*.json"))


def load_recipe(name: str) -> dict[str, Any]:
    """Raw mapping of one recipe, by file stem."""
    data: dict[str, Any] = json.loads((RECIPES_DIR / f"{name}.json").read_text(encoding="utf-8"))
    return data
