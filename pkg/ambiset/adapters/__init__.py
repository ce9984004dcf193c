"""Input adapters: problem files and name resolution."""
