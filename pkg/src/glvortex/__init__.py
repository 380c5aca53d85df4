"""Numerics for coupled Ginzburg-Landau vortices of degree (1, 1)."""

__version__ = "0.1.0"
