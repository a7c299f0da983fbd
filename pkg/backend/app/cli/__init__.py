"""Command-line surface of eos-lab."""
from .main import cli, main

__all__ = ["cli", "main"]
