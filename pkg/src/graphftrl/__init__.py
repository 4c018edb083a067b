"""Best-of-both-worlds online learning with undirected feedback graphs."""

__version__ = "0.1.0"
