from .generators import (
    decoupled_problem_text,
    decoupled_scene,
    decoupled_symbolic,
)
from .loader import fixture_path, fixture_text

__all__ = [
    "decoupled_problem_text",
    "decoupled_scene",
    "decoupled_symbolic",
    "fixture_path",
    "fixture_text",
]
