"""Integration tests: randomized property suites and acceptance checks."""
