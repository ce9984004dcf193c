"""Configuration management for ambiset."""
