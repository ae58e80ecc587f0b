"""Conditional analysis engine."""
