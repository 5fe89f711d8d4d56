"""
Cat State Lab

A simulation library for optical Schrodinger-cat production schemes: truncated
Fock-space and coherent-superposition state algebra, photon loss and imperfect
photon counting, Kerr, back-action-evasion, photon-subtraction and kitten-growth
schemes, and derivative-free fidelity optimization.
"""

__version__ = "1.0.0"
