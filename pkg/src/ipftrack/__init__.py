"""Markerless 3D body tracking with interval particle filtering."""
