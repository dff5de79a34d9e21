"""Decision procedures for flat and one-variable clause sets."""

__version__ = "0.1.0"
