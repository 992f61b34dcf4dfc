"""Tokenization, n-gram and context feature extraction."""
