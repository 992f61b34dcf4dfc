"""Test suite for dact."""
