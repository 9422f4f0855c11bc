"""Distribution-sensitive point location in possibly disconnected planar subdivisions."""
__version__ = "0.1.0"
