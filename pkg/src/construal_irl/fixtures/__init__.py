"""Packaged maze files, the human-judgment summary, and the default config."""
