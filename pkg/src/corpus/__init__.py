"""Corpus readers, tag-set variants and the uniform segment model."""
