"""Utilities module for logging, errors and run manifests."""
