"""State representations: truncated Fock space, quadrature grids, coherent superpositions and channels."""
