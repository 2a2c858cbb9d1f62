"""First-order (Descartes) vector fields for constrained 3-DOF mechanics."""

__version__ = "0.1.0"
