"""Transvection graphs, classification and word synthesis for classical groups."""
__version__ = "0.1.0"
