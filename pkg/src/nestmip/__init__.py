"""Mixed-integer models for irregular strip packing with nesting constraints."""
from __future__ import annotations

import os

__version__ = "0.1.0"

_DATA = os.path.join(os.path.dirname(__file__), "data", "instances")


def bundled_instances() -> list:
    """Paths of the small synthetic instances shipped with the package."""
    return sorted(os.path.join(_DATA, f) for f in os.listdir(_DATA) if f.endswith(".json"))


__all__ = ["__version__", "bundled_instances"]
