"""Access to the fixture files shipped inside the package."""

from __future__ import annotations

import os

_HERE = os.path.dirname(__file__)


def fixture_path(name: str) -> str:
    path = os.path.join(_HERE, name)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no shipped fixture named {name!r}")
    return path


def fixture_text(name: str) -> str:
    with open(fixture_path(name)) as f:
        return f.read()
