"""Command implementations behind main.py."""
