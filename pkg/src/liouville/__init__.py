"""Numerical toolkit for the first variation of the Liouville current under shear deformations."""
