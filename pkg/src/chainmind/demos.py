"""The canonical demo scenarios shipped with the package."""
from __future__ import annotations

from importlib import resources

from .harness import ScenarioScript, parse_script

DEMOS = {
    "world-peace": "world_peace.scn",
    "charging": "charging.scn",
    "hotel": "hotel.scn",
}


def demo_text(name: str) -> str:
    try:
        filename = DEMOS[name]
    except KeyError:
        raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
    return resources.files("chainmind").joinpath("scenarios", filename).read_text(encoding="utf-8")


def demo_script(name: str) -> ScenarioScript:
    return parse_script(demo_text(name))
