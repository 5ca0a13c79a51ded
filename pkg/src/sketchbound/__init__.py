"""sketchbound: randomized range finders and a laboratory for their worst-case error bounds."""

__version__ = "0.1.0"
