"""tunav: a miniature auto-active verifier with tunable quantifier instantiation."""

__version__ = "0.1.0"
