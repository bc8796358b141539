"""Certified constructions linking subgroups of the reals, Bratteli diagrams,
generalized odometers and the logistic family."""

__version__ = "0.1.0"
