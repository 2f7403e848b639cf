"""PT-symmetric oscillators: exact perturbation theory, C operators and spectra.

Submodules
----------
hermite        exact Hermite-series and differential-operator algebra
perturbation   perturbative eigenstates of the cubic models, degenerate blocks
coperator      C kernels as differential operators on the parity kernel
matrix_model   the solvable two-level model
spectral       oscillator-basis diagonalization and spectral checks
closed_forms   eigenvalue-sum closed form and quartic expansions
acceptance     the acceptance checks used by ``ptsym verify``
cli            command-line front end
"""

__version__ = "0.1.0"
