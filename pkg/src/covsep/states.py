"""Bipartite density matrices, orthonormal observable bases and sampling.

Composite index convention, used everywhere in the package: the product
space H_A (x) H_B is indexed row-major as i * d_B + j, which is exactly
what numpy.kron produces.  All partial traces, realignments and block
covariance matrices share this convention.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .linalg import check_hermitian

TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
GRAM_TOL = 1e-10


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """A bipartite mixed state on C^{d_A} (x) C^{d_B}.

    Invariants checked on construction: Hermitian, unit trace and
    positive semidefinite (within documented tolerances).
    """

    dim_a: int
    dim_b: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.dim_a < 2 or self.dim_b < 2:
            raise ValidationError(
                f"local dimensions must be at least 2, got ({self.dim_a},{self.dim_b})"
            )
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dim_a * self.dim_b
        if m.shape != (n, n):
            raise ValidationError(
                f"matrix shape {m.shape} does not match d_A*d_B = {n}"
            )
        check_hermitian(m, name="density matrix")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr:.12g}, expected 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -POSITIVITY_TOL:
            raise ValidationError(
                f"density matrix has negative eigenvalue {lo:.3e}"
            )
        # store the exactly hermitized matrix (kills ~1e-18 BLAS asymmetry)
        object.__setattr__(self, "matrix", _freeze((m + m.conj().T) / 2))

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    def reduced(self, keep):
        return partial_trace(self, keep)


@dataclass(frozen=True)
class ObservableBasis:
    """Hilbert-Schmidt orthonormal Hermitian basis of d x d observables,
    with the scaled identity 1/sqrt(d) in first position."""

    dim: int
    observables: np.ndarray  # (dim^2, dim, dim)

    def __post_init__(self):
        obs = np.asarray(self.observables, dtype=complex)
        d = self.dim
        if obs.shape != (d * d, d, d):
            raise ValidationError(
                f"expected {d * d} observables of shape ({d},{d}), got {obs.shape}"
            )
        for k, a in enumerate(obs):
            check_hermitian(a, name=f"observable {k}")
        gram = np.einsum("iab,jba->ij", obs, obs).real
        if np.abs(gram - np.eye(d * d)).max() > GRAM_TOL:
            raise ValidationError("observable basis is not HS-orthonormal")
        object.__setattr__(self, "observables", _freeze(obs))

    @property
    def traceless(self):
        """The d^2 - 1 traceless members (everything after the identity)."""
        return self.observables[1:]


@lru_cache(maxsize=None)
def gell_mann_basis(d):
    """Generalized Gell-Mann basis for local dimension d.

    Ordering: identity/sqrt(d) first, then the symmetric off-diagonal
    family (j < k, lexicographic), the antisymmetric family, and the
    diagonal family.  For d = 2 this is exactly the normalized Pauli
    basis {1, sx, sy, sz}/sqrt(2).
    """
    if d < 2:
        raise ValidationError(f"local dimension must be at least 2, got {d}")
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1
            mats.append(m / np.sqrt(2))
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            mats.append(m / np.sqrt(2))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        mats.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    return ObservableBasis(dim=d, observables=np.array(mats))


def pauli_basis():
    """Normalized Pauli basis {1, sx, sy, sz}/sqrt(2)."""
    return gell_mann_basis(2)


def _ptrace(matrix, dim_a, dim_b, keep):
    r = matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace(rho, keep):
    """Reduced state of a DensityMatrix on subsystem ``keep`` ('A' or 'B')."""
    return _ptrace(rho.matrix, rho.dim_a, rho.dim_b, keep)


def purity(m):
    """Tr[m^2] for a unit-trace PSD matrix."""
    m = np.asarray(m)
    return float(np.einsum("ij,ji->", m, m).real)


def random_density_matrix(dim_a, dim_b, rank=None, seed=None):
    """Random state from the Ginibre ensemble: rho = G G^dag / Tr[G G^dag]
    with G a (d_A d_B) x rank matrix of iid standard complex Gaussians.

    Deterministic and bitwise reproducible for a given integer seed.
    """
    n = dim_a * dim_b
    if rank is None:
        rank = n
    if not 1 <= rank <= n:
        raise ValidationError(f"rank must be in [1, {n}], got {rank}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    m /= m.trace().real
    return DensityMatrix(dim_a, dim_b, m)


def random_unitary(d, seed=None):
    """Haar-random unitary (QR of a complex Ginibre matrix, phases fixed)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def mix_with_white_noise(rho, p):
    """p * rho + (1 - p) * 1/(d_A d_B)."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"mixing parameter must be in [0, 1], got {p}")
    n = rho.dim
    m = p * rho.matrix + (1.0 - p) * np.eye(n) / n
    return DensityMatrix(rho.dim_a, rho.dim_b, m)


def pure_state(vector, dim_a, dim_b):
    """Density matrix of a pure bipartite state given as a ket."""
    v = np.asarray(vector, dtype=complex).reshape(-1)
    if v.size != dim_a * dim_b:
        raise ValidationError(
            f"ket length {v.size} does not match d_A*d_B = {dim_a * dim_b}"
        )
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ValidationError("ket has zero norm")
    v = v / nrm
    return DensityMatrix(dim_a, dim_b, np.outer(v, v.conj()))


def maximally_entangled(d):
    """|Phi_d> = sum_i |ii> / sqrt(d) on a d x d system."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return pure_state(v, d, d)
