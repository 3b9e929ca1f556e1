"""Mean curvature flow of codimension-two surfaces in four-dimensional space forms."""

__version__ = "0.1.0"
