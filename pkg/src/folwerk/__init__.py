"""folwerk: an exact-arithmetic workbench for affine derived foliations."""

__version__ = "0.1.0"
