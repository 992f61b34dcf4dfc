"""Cross-validation, significance testing and experiment protocols."""
