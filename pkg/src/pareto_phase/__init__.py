"""Pareto points of uniform samples in growing dimension."""
