"""Executable crossratios, triple-space quasimetrics, annulus systems and
tree-boundary dynamics at desk scale, in exact arithmetic."""

__version__ = "0.1.0"
