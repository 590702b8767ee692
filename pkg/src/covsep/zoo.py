"""Reference state families, the PPT baseline and threshold scans.

Families double as ground truth: the 3x3 bound entangled families here
are PPT by construction, so any covariance-based detection on them
certifies bound entanglement.
"""

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousThresholdError,
    NoThresholdError,
    ValidationError,
)
from .states import (
    DensityMatrix,
    gell_mann_basis,
    maximally_entangled,
    mix_with_white_noise,
    purity,
    random_density_matrix,
)
from .covariance import bipartite_cm
from .realign import ccnr_test, dv_test, operator_schmidt, schmidt_trace_test
from .normal_form import fnf_asymmetric_test, fnf_sum_test, to_fnf
from .cmc import cm_trace_test, extract_lur_witness, qubit_block_cm, qubit_cmc_feasibility
from .verdict import make_verdict

CRITERIA = ("ppt", "ccnr", "prop3", "prop4", "prop6", "eq8", "dv",
            "cmc-sdp", "lur-extract")
RANK_EPSILON = 1e-9  # white-noise weight mixed in before filtering rank-deficient states


def upb_tiles_state():
    """3x3 bound entangled state from the five "tiles" product vectors:
    the normalized projector onto the orthocomplement of their span.

    Rank 4, PPT, purity 1/4.  Mixed with white noise it is the standard
    threshold family for the normal-form sum test.
    """
    e = np.eye(3)
    s2 = 1 / np.sqrt(2)
    s3 = 1 / np.sqrt(3)
    vectors = [
        np.kron(e[0], s2 * (e[0] - e[1])),
        np.kron(s2 * (e[0] - e[1]), e[2]),
        np.kron(e[2], s2 * (e[1] - e[2])),
        np.kron(s2 * (e[1] - e[2]), e[0]),
        np.kron(s3 * (e[0] + e[1] + e[2]), s3 * (e[0] + e[1] + e[2])),
    ]
    proj = sum(np.outer(v, v) for v in vectors)
    return DensityMatrix(3, 3, (np.eye(9) - proj) / 4)


def _upb_self_test():
    """Mutual orthonormality of the tiles vectors and the rank-4 kernel."""
    rho = upb_tiles_state()
    w = np.linalg.eigvalsh(rho.matrix)
    return bool(np.allclose(w[:5], 0, atol=1e-12) and np.allclose(w[5:], 0.25, atol=1e-12))


def chessboard_params(seed=None, rng=None):
    """Draw the 8-parameter vector (a, b, c, d, m, n, s, t) of a random
    chessboard state.

    Sampling law (detection statistics depend on it): the six free
    parameters a, b, c, d, m, n are iid uniform on [-1, 1]; s = a c / n and
    t = a d / m are derived so the state is PPT by construction.  Draws
    are rejected while |m| or |n| is below 1e-12 (degenerate vectors).
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    while True:
        a, b, c, d, m, n = rng.uniform(-1.0, 1.0, 6)
        if min(abs(m), abs(n)) > 1e-12:
            break
    return np.array([a, b, c, d, m, n, a * c / n, a * d / m])


def chessboard_state(params=None, seed=None):
    """Rank-4 3x3 chessboard state from four generating vectors.

    ``params`` is the 8-vector (a, b, c, d, m, n, s, t); the last two must
    satisfy s n = a c and t m = a d (that constraint is what makes the
    family PPT), and a 6-vector of the free parameters is also accepted.
    With ``params=None`` a seeded random draw is used.
    """
    if params is None:
        params = chessboard_params(seed)
    params = np.asarray(params, dtype=float)
    if params.shape == (6,):
        a, b, c, d, m, n = params
        if min(abs(m), abs(n)) < 1e-12:
            raise ValidationError("degenerate chessboard parameters: m or n is zero")
        params = np.array([a, b, c, d, m, n, a * c / n, a * d / m])
    if params.shape != (8,):
        raise ValidationError(
            f"chessboard parameters must have 6 or 8 entries, got {params.shape}"
        )
    a, b, c, d, m, n, s, t = params
    scale = max(1.0, np.abs(params).max())
    if abs(s * n - a * c) > 1e-10 * scale or abs(t * m - a * d) > 1e-10 * scale:
        raise ValidationError(
            "chessboard parameters violate s n = a c, t m = a d; "
            "the state would not be PPT by construction"
        )
    vecs = np.zeros((4, 9))
    vecs[0, [0, 2, 4]] = [m, s, n]
    vecs[1, [1, 3, 5]] = [a, b, c]
    vecs[2, [0, 4, 6]] = [n, -m, t]
    vecs[3, [1, 3, 7]] = [b, -a, d]
    norms = (vecs**2).sum(axis=1)
    if norms.min() < 1e-24:
        raise ValidationError("degenerate chessboard parameters: zero generating vector")
    rho = vecs.T @ vecs
    return DensityMatrix(3, 3, rho / rho.trace())


def werner_state(p):
    """Two-qubit p |Phi+><Phi+| + (1-p) 1/4."""
    return mix_with_white_noise(maximally_entangled(2), p)


def isotropic_state(p, d=3):
    """d x d analogue: p |Phi_d><Phi_d| + (1-p) 1/d^2."""
    return mix_with_white_noise(maximally_entangled(d), p)


def partial_transpose(rho):
    """Partial transpose on the B factor."""
    r = rho.matrix.reshape(rho.dim_a, rho.dim_b, rho.dim_a, rho.dim_b)
    return np.ascontiguousarray(r.transpose(0, 3, 2, 1)).reshape(rho.dim, rho.dim)


def ppt_test(rho, tol=1e-10):
    """PPT baseline: detected iff the partial transpose has an eigenvalue
    below -tol.  left = -lambda_min(rho^T_B), right = 0."""
    lo = float(np.linalg.eigvalsh(partial_transpose(rho))[0])
    return make_verdict("ppt", -lo, 0.0, tol)


def _full_rank_or_regularized(rho, details):
    lo = float(np.linalg.eigvalsh(rho.matrix)[0])
    if lo > 1e-12:
        return rho
    details["regularized"] = RANK_EPSILON
    return mix_with_white_noise(rho, 1.0 - RANK_EPSILON)


def evaluate_criteria(rho, criteria, tol=1e-10, sdp_tol=1e-7,
                      fnf_tol=1e-9, fnf_max_iter=20000):
    """Run several criteria on one state, sharing intermediate results.

    Returns {criterion: CriterionVerdict}; numerical failures propagate as
    exceptions and are the caller's to handle per criterion.
    """
    for name in criteria:
        if name not in CRITERIA:
            raise ValidationError(f"unknown criterion {name!r}")
    out = {}
    schmidt = None
    fnf = None
    fnf_details = {}
    for name in criteria:
        if name == "ppt":
            out[name] = ppt_test(rho, tol)
        elif name in ("ccnr", "prop4"):
            if schmidt is None:
                schmidt = operator_schmidt(rho)
            out[name] = (ccnr_test if name == "ccnr" else schmidt_trace_test)(
                schmidt, tol
            )
        elif name == "prop3":
            basis_a = gell_mann_basis(rho.dim_a)
            basis_b = gell_mann_basis(rho.dim_b)
            bcm = bipartite_cm(rho, basis_a, basis_b)
            out[name] = cm_trace_test(
                bcm, purity(rho.reduced("A")), purity(rho.reduced("B")), tol
            )
        elif name in ("prop6", "eq8", "dv"):
            if fnf is None:
                base = _full_rank_or_regularized(rho, fnf_details)
                fnf = to_fnf(base, tol=fnf_tol, max_iter=fnf_max_iter)
            if name == "prop6":
                v = fnf_sum_test(fnf, tol)
            elif name == "eq8":
                v = fnf_asymmetric_test(fnf, tol)
            else:
                v = dv_test(fnf, tol=tol)
            if fnf_details:
                v.details.update(fnf_details)
            out[name] = v
        elif name in ("cmc-sdp", "lur-extract"):
            bcm = qubit_block_cm(rho)
            verdict, certificate = qubit_cmc_feasibility(bcm, tol=sdp_tol)
            if name == "cmc-sdp":
                out[name] = verdict
            else:
                details = {"cmc_detected": verdict.detected}
                if verdict.detected:
                    lur = extract_lur_witness(bcm, certificate)
                    if lur is None:
                        details["witness"] = "not found"
                        out[name] = make_verdict("lur-extract", 0.0, 0.0, tol, details)
                    else:
                        from .cmc import lur_value

                        lhs, rhs = lur_value(rho, lur)
                        details["kind"] = f"{lur.kind_a}/{lur.kind_b}"
                        out[name] = make_verdict("lur-extract", rhs, lhs, tol, details)
                else:
                    details["witness"] = "state passes the CMC"
                    out[name] = make_verdict("lur-extract", 0.0, 0.0, tol, details)
    return out


def run_criterion(rho, criterion, **kwargs):
    """Evaluate a single criterion by name."""
    return evaluate_criteria(rho, [criterion], **kwargs)[criterion]


@dataclass(frozen=True)
class StateFamily:
    """A named state family: parametric families map p in [0, 1] to a
    state; sampled families map an integer seed to a state."""

    name: str
    dim_a: int
    dim_b: int
    parametric: bool
    make: callable


def _random_family(dim_a, dim_b):
    return StateFamily(
        name=f"random-{dim_a}x{dim_b}",
        dim_a=dim_a,
        dim_b=dim_b,
        parametric=False,
        make=lambda seed: random_density_matrix(dim_a, dim_b, seed=seed),
    )


_FAMILIES = {
    "upb-noise": StateFamily(
        "upb-noise", 3, 3, True, lambda p: mix_with_white_noise(upb_tiles_state(), p)
    ),
    "werner": StateFamily("werner", 2, 2, True, werner_state),
    "isotropic": StateFamily("isotropic", 3, 3, True, isotropic_state),
    "chessboard": StateFamily(
        "chessboard", 3, 3, False, lambda seed: chessboard_state(seed=seed)
    ),
}


def get_family(name):
    """Look up a family by name; random-AxB is parsed on the fly."""
    if name in _FAMILIES:
        return _FAMILIES[name]
    m = re.fullmatch(r"random-(\d+)x(\d+)", name)
    if m:
        da, db = int(m.group(1)), int(m.group(2))
        if da >= 2 and db >= 2:
            return _random_family(da, db)
    raise ValidationError(
        f"unknown family {name!r}; available: "
        f"{', '.join(sorted(_FAMILIES))}, random-AxB"
    )


def family_names():
    return tuple(sorted(_FAMILIES)) + ("random-AxB",)


@dataclass(frozen=True)
class ThresholdScanResult:
    threshold: float
    lower: float
    upper: float
    evaluations: int
    detected_above: bool


def threshold_scan(family, criterion, p_min=0.0, p_max=1.0,
                   bisect_tol=1e-4, pre_scan=32, **criterion_kwargs):
    """Locate the single parameter where a criterion verdict flips.

    ``family`` is a family name, a StateFamily or a callable p -> state;
    ``criterion`` is a criterion name or a callable state -> verdict.
    A coarse scan of ``pre_scan`` points checks that the verdict flips
    exactly once (NoThresholdError / AmbiguousThresholdError otherwise);
    bisection then narrows the flip to ``bisect_tol``.
    """
    if isinstance(family, str):
        family = get_family(family)
    if isinstance(family, StateFamily):
        if not family.parametric:
            raise ValidationError(f"family {family.name!r} is not parametric")
        make = family.make
    else:
        make = family
    if callable(criterion):
        evaluate = criterion
    else:
        evaluate = lambda rho: run_criterion(rho, criterion, **criterion_kwargs)

    evaluations = 0

    def detected(p):
        nonlocal evaluations
        evaluations += 1
        return bool(evaluate(make(p)).detected)

    grid = np.linspace(p_min, p_max, pre_scan)
    flags = [detected(p) for p in grid]
    flips = [i for i in range(len(grid) - 1) if flags[i] != flags[i + 1]]
    if not flips:
        raise NoThresholdError(
            f"verdict is constantly {'detected' if flags[0] else 'not detected'} "
            f"on [{p_min}, {p_max}]"
        )
    if len(flips) > 1:
        raise AmbiguousThresholdError(
            f"verdict flips {len(flips)} times on the coarse scan"
        )
    i = flips[0]
    lo, hi = float(grid[i]), float(grid[i + 1])
    lo_flag = flags[i]
    while hi - lo > bisect_tol:
        mid = (lo + hi) / 2
        if detected(mid) == lo_flag:
            lo = mid
        else:
            hi = mid
    return ThresholdScanResult(
        threshold=(lo + hi) / 2,
        lower=lo,
        upper=hi,
        evaluations=evaluations,
        detected_above=not lo_flag,
    )
