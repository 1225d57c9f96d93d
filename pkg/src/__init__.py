"""Weak-supervision 3D box geometry: pseudo-labels from LiDAR points and 2D detections."""

__version__ = "1.0.0"
