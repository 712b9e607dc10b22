"""Fairness analysis of small decision programs via information flow."""

__version__ = "0.1.0"
