"""Time-frequency decay versus Hermite-coefficient decay: numerics and verification."""
__version__ = "0.1.0"
