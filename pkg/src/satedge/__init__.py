"""Security-aware task offloading from a ground user to a LEO satellite edge."""
__version__ = "0.1.0"
