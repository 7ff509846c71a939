"""Coset automatic structures for fundamental groups of graphs of groups.

Higgins normal forms via the cascade procedure, word and coset problem
solvers over concrete vertex-group backends, and empirical certification of
fellow travelling, crossover, stability and concatenation properties at desk
scale.
"""

__version__ = "0.1.0"
