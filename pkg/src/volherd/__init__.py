"""Volume-interacting dynamic herding model of trading, with heavy-tail statistics."""

__version__ = "0.1.0"
