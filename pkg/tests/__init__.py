"""Test suite for ambiset."""
