"""Soil-moisture forecasting, transfer learning, and closed-loop irrigation simulation."""

__version__ = "0.1.0"
