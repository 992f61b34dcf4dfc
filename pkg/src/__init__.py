"""dact - dialog act recognition with context features."""

__version__ = "1.0.0"
__author__ = "dact contributors"
