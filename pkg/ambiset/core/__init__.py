"""Core numerical logic for ambiset."""
