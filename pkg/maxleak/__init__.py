"""maxleak - Universal encryption of individual sequences under maximal leakage."""

__version__ = "0.1.0"
