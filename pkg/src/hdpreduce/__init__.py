"""Reduction of constrained Hamiltonian systems with symmetry on trivial bundles."""
__version__ = "0.1.0"
