"""Isospectral Dirac operator on quantum SU(2): operators, symbols, residues and index pairings."""
