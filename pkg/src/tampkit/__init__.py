"""Desk-scale task-and-motion planning toolkit.

Symbolic PDDL planning with causal-graph subtask decomposition, bilevel
multi-stage search, and a DDP-inside-ADMM trajectory optimizer over a planar
manipulator-plus-object system with contact.
"""

__version__ = "0.1.0"
