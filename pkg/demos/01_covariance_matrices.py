"""Covariance matrices of quantum states and their bipartite block form.

Builds covariance matrices for a few states, shows the block structure
[[A, C], [C^T, B]] over split observable sets, and checks the structural
facts the separability tests rely on: concavity under mixing and the
half-projector property of pure-state covariance matrices.
"""

import numpy as np

from covsep import (
    DensityMatrix,
    bipartite_cm,
    covariance_matrix,
    diagonalize_c,
    gell_mann_basis,
    maximally_entangled,
    pauli_basis,
    random_density_matrix,
)

np.set_printoptions(precision=4, suppress=True)

print("=== single qubit, normalized Pauli observables ===")
basis = pauli_basis()
gamma_mixed = covariance_matrix(np.eye(2) / 2, basis.observables)
print("maximally mixed state:\n", gamma_mixed)
print("diagonal = variances; the identity observable never fluctuates\n")

gamma_pure = covariance_matrix(np.diag([1.0, 0.0]).astype(complex), basis.observables)
print("pure state |0>:\n", gamma_pure)
print("eigenvalues:", np.linalg.eigvalsh(gamma_pure).round(6))
print("twice a pure-state covariance matrix is a projector of rank 2(d-1)\n")

print("=== two qubits, block structure ===")
bell = maximally_entangled(2)
bcm = bipartite_cm(bell, basis, basis)
print("Bell state C block (identity row/column vanish):\n", bcm.block_c)
print("strong diagonal correlations signal entanglement\n")

rho = random_density_matrix(2, 2, seed=7)
bcm = bipartite_cm(rho, basis, basis)
diag, mu_a, mu_b = diagonalize_c(bcm)
print("random two-qubit state, C after local orthogonal rotations:")
print(diag.block_c.round(6))
print("(singular value decomposition makes C diagonal and nonnegative)\n")

print("=== concavity: gamma(mix) >= mix of gammas ===")
r1 = random_density_matrix(2, 2, seed=1)
r2 = random_density_matrix(2, 2, seed=2)
p = 0.3
mix = DensityMatrix(2, 2, p * r1.matrix + (1 - p) * r2.matrix)
g = lambda r: bipartite_cm(r, basis, basis).assembled()
delta = g(mix) - p * g(r1) - (1 - p) * g(r2)
print("smallest eigenvalue of the difference:", np.linalg.eigvalsh(delta)[0])
print("(nonnegative: variances only grow under mixing)")
