from .graph import CausalGraph, Subtask, build, decompose, prune, subtasks_to_text, to_dot

__all__ = ["CausalGraph", "Subtask", "build", "decompose", "prune", "subtasks_to_text", "to_dot"]
