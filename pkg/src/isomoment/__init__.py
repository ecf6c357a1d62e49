"""Inner parallel curves, covering curves and weighted isoperimetric checks for plane domains."""

__version__ = "0.1.0"
