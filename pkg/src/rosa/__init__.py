"""Static analysis, optimization, interpretation and C translation for an R subset."""

__version__ = "0.1.0"
