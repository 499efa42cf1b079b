"""Homogeneous Siegel domains from split solvable data.

Subpackages cover structure-constant Lie algebra arithmetic, normal
j-algebras and their fine structure, the Siegel realization with its
simply transitive affine action, the real multiplicative Jordan
decomposition, the rank-lowering equivariant fibration, unit-ball
constructions, and the quotient analyzer that emits replayable
certificates.
"""

__version__ = "0.1.0"
