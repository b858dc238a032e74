# Marker for a python package directory
name = "pairtheta"
__version__ = "1.0"
