"""Unit tests for input adapters."""
