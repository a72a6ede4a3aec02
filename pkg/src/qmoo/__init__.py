"""Multi-objective variational optimization on simulated qudit registers."""

__version__ = "0.1.0"
