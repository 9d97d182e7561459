"""Cubic code localization toolkit."""
