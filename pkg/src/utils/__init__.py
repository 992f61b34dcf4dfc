"""Utility functions and decorators."""
