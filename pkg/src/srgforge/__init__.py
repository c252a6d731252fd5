"""srgforge: strongly regular graphs from transitive group actions and orbit matrices."""

__version__ = "0.1.0"
