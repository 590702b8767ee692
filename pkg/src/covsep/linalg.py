"""Dense matrix kernels used by every other module.

Everything in this package lives on spaces of dimension at most
d_A^2 + d_B^2 for local dimensions of a handful, so all routines are
plain dense LAPACK calls (via numpy) wrapped with the validation and
ordering guarantees the rest of the code relies on.
"""

import numpy as np

from .errors import SingularReducedStateError, ValidationError

HERMITICITY_TOL = 1e-12
PSD_SLACK = 1e-9
INV_SQRT_CUTOFF = 1e-10


def sym(m):
    """Exactly symmetrize a real matrix."""
    m = np.asarray(m, dtype=float)
    return (m + m.T) / 2


def herm(m):
    """Exactly hermitize a complex matrix."""
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


def hermiticity_defect(m):
    m = np.asarray(m)
    return float(np.abs(m - m.conj().T).max())


def check_hermitian(m, tol=HERMITICITY_TOL, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    defect = np.abs(m - m.conj().T)
    worst = float(defect.max())
    if worst > tol:
        i, j = np.unravel_index(int(defect.argmax()), defect.shape)
        raise ValidationError(
            f"{name} is not Hermitian: entry ({i},{j}) differs from the "
            f"conjugate of ({j},{i}) by {worst:.3e} (tol {tol:.1e})"
        )
    return m


def eigh(m, hermiticity_tol=HERMITICITY_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as unitary columns).
    Raises ValidationError if the input is not Hermitian within tolerance.
    """
    m = check_hermitian(m, hermiticity_tol)
    return np.linalg.eigh(m)


def eigvalsh(m, hermiticity_tol=HERMITICITY_TOL):
    m = check_hermitian(m, hermiticity_tol)
    return np.linalg.eigvalsh(m)


def min_eig(m, hermiticity_tol=HERMITICITY_TOL):
    return float(eigvalsh(m, hermiticity_tol)[0])


def svd(m):
    """Singular value decomposition m = u @ diag(s) @ vh, s descending."""
    m = np.asarray(m)
    return np.linalg.svd(m, full_matrices=False)


def svdvals(m):
    return np.linalg.svd(np.asarray(m), compute_uv=False)


def trace_norm(m):
    """Sum of singular values."""
    return float(svdvals(m).sum())


def inv_sqrt_psd(m, cutoff=INV_SQRT_CUTOFF, hermiticity_tol=HERMITICITY_TOL):
    """Inverse square root of a positive definite Hermitian matrix.

    The smallest eigenvalue must be at least ``cutoff``; below that the
    matrix is treated as singular and SingularReducedStateError is raised
    (full-rank preconditions elsewhere funnel through here).
    """
    w, v = eigh(m, hermiticity_tol)
    if w[0] < cutoff:
        raise SingularReducedStateError(
            f"matrix has eigenvalue {w[0]:.3e} below cutoff {cutoff:.1e}",
            min_eigenvalue=float(w[0]),
            cutoff=float(cutoff),
        )
    r = (v * w ** -0.5) @ v.conj().T
    if np.isrealobj(m):
        return sym(r.real)
    return herm(r)


def project_psd(m, hermiticity_tol=HERMITICITY_TOL):
    """Nearest (Frobenius) positive semidefinite matrix: clip negative
    eigenvalues to zero.  Real symmetric input stays real."""
    w, v = eigh(m, hermiticity_tol)
    w = np.maximum(w, 0.0)
    r = (v * w) @ v.conj().T
    if np.isrealobj(m):
        return sym(r.real)
    return herm(r)
