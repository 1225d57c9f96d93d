"""Tests package for the pseudo-label toolkit."""
