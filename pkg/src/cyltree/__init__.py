"""Trees of cylinders for finite windows of group actions on trees."""

__version__ = "0.1.0"
