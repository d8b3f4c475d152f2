"""Outfox: a layered-encryption packet format for mixnets, with a desk-scale simulator."""

__version__ = "0.1.0"
