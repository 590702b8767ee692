"""Covariance matrices of observable sets and their bipartite block form.

For a state rho and observables {M_k} the (symmetric) covariance matrix is

    gamma_ij = <M_i M_j + M_j M_i>/2 - <M_i><M_j>,

a real symmetric PSD matrix whose diagonal holds the variances.  With the
split set {A_k (x) 1, 1 (x) B_k} it acquires the block form

    gamma = [[A, C], [C^T, B]],

where A and B are covariance matrices of the reduced states and
C_ij = <A_i (x) B_j> - <A_i><B_j>.  For product states C vanishes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import herm, sym
from .states import ObservableBasis, _freeze

IMAG_TOL = 1e-9


def _obs_stack(basis, dim, side):
    """Accept an ObservableBasis, a stack or a list of observables."""
    if isinstance(basis, ObservableBasis):
        obs = basis.observables
    else:
        obs = np.asarray(basis, dtype=complex)
    if obs.ndim != 3 or obs.shape[1] != obs.shape[2]:
        raise ValidationError(f"basis {side} must be a stack of square matrices")
    if obs.shape[1] != dim:
        raise ValidationError(
            f"basis {side} acts on dimension {obs.shape[1]}, state has {dim}"
        )
    return obs


def expectations(rho_matrix, observables):
    """<A_k> for Hermitian observables; the result is real."""
    return np.einsum("kij,ji->k", observables, rho_matrix).real


def covariance_matrix(rho_matrix, observables):
    """Symmetric covariance matrix of ``observables`` on ``rho_matrix``.

    The result is symmetrized exactly on construction; its diagonal
    entries are the variances of the individual observables.
    """
    rho_matrix = np.asarray(rho_matrix, dtype=complex)
    obs = np.asarray(observables, dtype=complex)
    if obs.shape[1:] != rho_matrix.shape:
        raise ValidationError(
            f"observables of shape {obs.shape[1:]} do not match state "
            f"of shape {rho_matrix.shape}"
        )
    means = expectations(rho_matrix, obs)
    prod = np.einsum("ab,ibc,jca->ij", rho_matrix, obs, obs, optimize=True)
    return sym(prod.real) - np.outer(means, means)


def nonsymmetric_cm(rho_matrix, observables):
    """Non-symmetrized second-moment matrix <M_i M_j> - <M_i><M_j>.

    Hermitian and PSD; its real part equals the symmetric covariance
    matrix.  Exposed as a construction only: no separability test in this
    package is built on it.
    """
    rho_matrix = np.asarray(rho_matrix, dtype=complex)
    obs = np.asarray(observables, dtype=complex)
    if obs.shape[1:] != rho_matrix.shape:
        raise ValidationError("observables do not match the state dimension")
    means = expectations(rho_matrix, obs)
    prod = np.einsum("ab,ibc,jca->ij", rho_matrix, obs, obs, optimize=True)
    return herm(prod - np.outer(means, means))


def realign(matrix, dim_a, dim_b):
    """Realignment of a bipartite matrix.

    Bit-exact convention: R[i*d_A + k, j*d_B + l] = M[i*d_B + j, k*d_B + l],
    i.e. both indices of the A factor move to the rows, both B indices to
    the columns.
    """
    r = np.asarray(matrix).reshape(dim_a, dim_b, dim_a, dim_b)
    return np.ascontiguousarray(r.transpose(0, 2, 1, 3)).reshape(
        dim_a * dim_a, dim_b * dim_b
    )


def pairwise_expectations(rho, obs_a, obs_b):
    """Matrix of <A_i (x) B_j> for stacks of Hermitian local observables."""
    ra = realign(rho.matrix, rho.dim_a, rho.dim_b)
    va = obs_a.transpose(0, 2, 1).reshape(obs_a.shape[0], -1)
    vb = obs_b.transpose(0, 2, 1).reshape(obs_b.shape[0], -1)
    t = va @ ra @ vb.T
    worst = float(np.abs(t.imag).max())
    if worst > IMAG_TOL:
        raise ValidationError(
            f"pairwise expectations have imaginary part {worst:.3e}; "
            "observables are not Hermitian"
        )
    return t.real


@dataclass(frozen=True)
class BlockCovarianceMatrix:
    """Blocks A, B, C of the bipartite covariance matrix together with the
    observable stacks that define the row/column labels."""

    block_a: np.ndarray
    block_b: np.ndarray
    block_c: np.ndarray
    obs_a: np.ndarray
    obs_b: np.ndarray

    def __post_init__(self):
        na, nb = self.block_a.shape[0], self.block_b.shape[0]
        if self.block_c.shape != (na, nb):
            raise ValidationError(
                f"C block shape {self.block_c.shape} does not match ({na},{nb})"
            )
        for name in ("block_a", "block_b", "block_c", "obs_a", "obs_b"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def dims(self):
        return self.block_a.shape[0], self.block_b.shape[0]

    def assembled(self):
        na, nb = self.dims
        g = np.zeros((na + nb, na + nb))
        g[:na, :na] = self.block_a
        g[na:, na:] = self.block_b
        g[:na, na:] = self.block_c
        g[na:, :na] = self.block_c.T
        return g


def bipartite_cm(rho, basis_a, basis_b):
    """Block covariance matrix of ``rho`` for the split observable set
    {A_k (x) 1, 1 (x) B_k}."""
    obs_a = _obs_stack(basis_a, rho.dim_a, "A")
    obs_b = _obs_stack(basis_b, rho.dim_b, "B")
    rho_a = rho.reduced("A")
    rho_b = rho.reduced("B")
    block_a = covariance_matrix(rho_a, obs_a)
    block_b = covariance_matrix(rho_b, obs_b)
    mean_a = expectations(rho_a, obs_a)
    mean_b = expectations(rho_b, obs_b)
    block_c = pairwise_expectations(rho, obs_a, obs_b) - np.outer(mean_a, mean_b)
    return BlockCovarianceMatrix(block_a, block_b, block_c, obs_a, obs_b)


def _check_invertible(mu, n, side):
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (n, n):
        raise ValidationError(
            f"transform {side} must be {n}x{n}, got {mu.shape}"
        )
    s = np.linalg.svd(mu, compute_uv=False)
    if s[-1] <= 1e-12 * max(1.0, s[0]):
        raise ValidationError(f"transform {side} is singular")
    return mu


def change_basis(bcm, mu_a, mu_b):
    """Congruence transform gamma -> (mu_a (+) mu_b) gamma (mu_a (+) mu_b)^T.

    The stored observable stacks are rotated along (new_k = sum_l mu[k,l]
    old_l) so the result still describes the same state in the new basis.
    """
    na, nb = bcm.dims
    mu_a = _check_invertible(mu_a, na, "A")
    mu_b = _check_invertible(mu_b, nb, "B")
    return BlockCovarianceMatrix(
        block_a=sym(mu_a @ bcm.block_a @ mu_a.T),
        block_b=sym(mu_b @ bcm.block_b @ mu_b.T),
        block_c=mu_a @ bcm.block_c @ mu_b.T,
        obs_a=np.einsum("kl,lab->kab", mu_a, bcm.obs_a),
        obs_b=np.einsum("kl,lab->kab", mu_b, bcm.obs_b),
    )


def diagonalize_c(bcm):
    """Orthogonal local basis changes making the C block diagonal with
    nonnegative entries (singular value decomposition of C; signs are
    absorbed into the B side).

    Returns (transformed block CM, mu_a, mu_b).
    """
    u, _, vh = np.linalg.svd(bcm.block_c)
    mu_a, mu_b = u.T, vh
    return change_basis(bcm, mu_a, mu_b), mu_a, mu_b
