"""Random convex polygons in regular polygons: exact laws, samplers and limit theorems."""

__version__ = "0.1.0"
