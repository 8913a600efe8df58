"""Tests package for squeezelab."""
