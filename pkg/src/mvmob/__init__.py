"""Parse, check, analyse, simulate and generate mobile app models written in four small DSLs."""

__version__ = "0.1.0"
