"""Diagram groups over string rewriting systems and closed subgroups of Thompson's group F."""

__version__ = "0.1.0"
