"""Covariance matrix criterion (CMC) core.

Separable states admit a decomposition of their block covariance matrix as
gamma >= kappa_A (+) kappa_B with kappa built from pure-state covariance
matrices.  Three layers of this module make that operational:

* the trace test: a necessary condition comparing the summed diagonal
  correlations 2 sum_i |C_ii| with the local purity deficits,
* the exact two-qubit test: with the traceless Pauli triple on each side,
  gamma passes the CMC iff there are real 3x3 density matrices rho_A,
  rho_B with gamma - 1/2 + (rho_A (+) rho_B)/2 >= 0, a semidefinite
  feasibility problem solved here with certified bounds on both sides,
* the uncertainty-relation bridge: a violation is equivalent to a
  violated local uncertainty relation (LUR), and a witness for the
  violation converts into explicit local observables with certified
  variance bounds.

Certificates are computed independently of the solver: any feasible
point (rho_A, rho_B) gives the exact lower bound lambda_min(M), and any
PSD unit-trace matrix Gamma on the joint block space gives the exact
upper bound <Gamma, gamma - 1/2> + (lmax(Gamma_AA) + lmax(Gamma_BB))/2
on the optimal value; verdicts only ever rely on these two eigensolve
based bounds, never on solver status flags.
"""

import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NoConvergenceError, ValidationError
from .linalg import check_hermitian, sym
from .states import _freeze, gell_mann_basis
from .covariance import bipartite_cm, diagonalize_c
from .verdict import make_verdict

FEASIBILITY_TOL = 1e-7
GRID_SLACK_TARGET = 1e-4
_GRID_MAX_POINTS = 4.0e7


def traceless_pauli():
    """The observable triple {sx, sy, sz}/sqrt(2) as a stack."""
    return gell_mann_basis(2).traceless


def qubit_block_cm(rho):
    """6x6 block covariance matrix of a two-qubit state over the traceless
    Pauli triple on each side (the identity rows of the full 8x8 version
    vanish, so nothing is lost)."""
    if (rho.dim_a, rho.dim_b) != (2, 2):
        raise ValidationError(
            f"two-qubit state required, got ({rho.dim_a},{rho.dim_b})"
        )
    t = traceless_pauli()
    return bipartite_cm(rho, t, t)


def cm_trace_test(bcm, purity_a, purity_b, tol=1e-10):
    """Trace test for equal local dimensions (criterion "prop3"):
    separable states satisfy 2 sum_i |C_ii| <= (1 - Tr[rho_A^2]) +
    (1 - Tr[rho_B^2]).

    The C block is brought to diagonal form first whenever it carries
    off-diagonal mass, which only strengthens the left side.
    """
    da = bcm.obs_a.shape[1]
    db = bcm.obs_b.shape[1]
    if da != db:
        raise ValidationError(
            f"equal local dimensions required, got ({da},{db})"
        )
    c = bcm.block_c
    offdiag = c - np.diag(np.diag(c)) if c.shape[0] == c.shape[1] else c
    if c.shape[0] != c.shape[1] or np.abs(offdiag).max() > 1e-10:
        bcm, _, _ = diagonalize_c(bcm)
        c = bcm.block_c
    left = 2.0 * np.abs(np.diag(c)).sum()
    right = (1.0 - purity_a) + (1.0 - purity_b)
    return make_verdict("prop3", left, right, tol)


@dataclass(frozen=True)
class KappaCandidate:
    """Pair of real 3x3 density matrices parametrizing a candidate
    kappa_A (+) kappa_B = 1/2 - (rho_A (+) rho_B)/2 for the two-qubit test.
    Complex input is replaced by its real part, which saturates the same
    feasibility inequality."""

    rho_a: np.ndarray
    rho_b: np.ndarray

    def __post_init__(self):
        for name in ("rho_a", "rho_b"):
            m = np.asarray(getattr(self, name))
            if np.iscomplexobj(m):
                m = m.real
            m = sym(m)
            if m.shape != (3, 3):
                raise ValidationError(f"{name} must be 3x3, got {m.shape}")
            if abs(m.trace() - 1.0) > 1e-10:
                raise ValidationError(f"{name} trace is {m.trace():.12g}, expected 1")
            if np.linalg.eigvalsh(m)[0] < -1e-9:
                raise ValidationError(f"{name} is not PSD within 1e-9")
            object.__setattr__(self, name, _freeze(m))


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Dual data accompanying a detected CMC violation: a PSD unit-trace
    matrix on the joint block space certifying the upper bound, plus the
    best feasible attempt and its (negative) margin matrix."""

    dual: np.ndarray
    upper_bound: float
    kappa_best: KappaCandidate
    m_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dual", _freeze(np.asarray(self.dual)))
        object.__setattr__(self, "m_star", _freeze(np.asarray(self.m_star)))


@dataclass(frozen=True)
class LocalUncertaintySet:
    """Observables {A^_k}, {B^_k} with variance bounds U_A, U_B such that
    sum_k Var(A^_k (x) 1 + 1 (x) B^_k) >= U_A + U_B on separable states."""

    ops_a: tuple
    ops_b: tuple
    bound_a: float
    bound_b: float
    kind_a: str  # "certified" or "estimate"
    kind_b: str
    witness: np.ndarray = None
    obs_a: np.ndarray = None
    obs_b: np.ndarray = None


def _margin_matrix(gamma6, rho_a, rho_b):
    m = gamma6 - 0.5 * np.eye(6)
    m[:3, :3] += rho_a / 2
    m[3:, 3:] += rho_b / 2
    return m


def _dual_upper_bound(gamma6, candidate):
    """<Gamma, gamma - 1/2> + (lmax(Gamma_AA) + lmax(Gamma_BB))/2 for a PSD
    unit-trace Gamma.  Upper-bounds the optimal feasibility value because
    for the optimizer x*: U(Gamma) >= <Gamma, M(x*)> >= lambda_min(M(x*))."""
    g = sym(candidate)
    w, v = np.linalg.eigh(g)
    g = (v * np.maximum(w, 0.0)) @ v.T
    tr = g.trace()
    if tr <= 1e-300:
        return np.inf, None
    g = g / tr
    u = float(
        np.sum(g * (gamma6 - 0.5 * np.eye(6)))
        + (np.linalg.eigvalsh(g[:3, :3])[-1] + np.linalg.eigvalsh(g[3:, 3:])[-1]) / 2
    )
    return u, g


def _project_spectraplex(m):
    m = sym(np.asarray(m, dtype=float))
    w, v = np.linalg.eigh(m)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(u) + 1)
    k = ks[u - css / ks > 0][-1]
    tau = css[k - 1] / k
    return (v * np.maximum(w - tau, 0.0)) @ v.T


_solver_lock = threading.Lock()
_solver_cache = {}


def _feasibility_problem():
    import cvxpy as cp

    if "prob" not in _solver_cache:
        gp = cp.Parameter((6, 6), symmetric=True)
        ra = cp.Variable((3, 3), symmetric=True)
        rb = cp.Variable((3, 3), symmetric=True)
        t = cp.Variable()
        z = np.zeros((3, 3))
        m = gp - 0.5 * np.eye(6) + 0.5 * cp.bmat([[ra, z], [z, rb]])
        psd = m - t * np.eye(6) >> 0
        cons = [ra >> 0, rb >> 0, cp.trace(ra) == 1, cp.trace(rb) == 1, psd]
        _solver_cache["prob"] = cp.Problem(cp.Maximize(t), cons)
        _solver_cache["param"] = gp
        _solver_cache["vars"] = (ra, rb)
        _solver_cache["psd"] = psd
    return (
        _solver_cache["prob"],
        _solver_cache["param"],
        _solver_cache["vars"],
        _solver_cache["psd"],
    )


def qubit_cmc_feasibility(bcm, tol=FEASIBILITY_TOL):
    """Exact two-qubit CMC test as a semidefinite feasibility problem.

    Solves f* = max lambda_min(gamma - 1/2 + (rho_A (+) rho_B)/2) over
    pairs of real 3x3 density matrices.  The state violates the CMC
    (detected) iff f* < -tol.

    Returns (verdict, certificate) where the certificate is a
    KappaCandidate achieving lambda_min >= -tol when the test passes, or
    an InfeasibilityCertificate (dual matrix plus best attempt) when it
    is violated.  Raises NoConvergenceError with both bounds if neither
    side can be certified.
    """
    import cvxpy as cp

    if bcm.block_a.shape != (3, 3) or bcm.block_b.shape != (3, 3):
        raise ValidationError(
            "the two-qubit test needs a 6x6 block covariance matrix built "
            "from the traceless Pauli triple on each side"
        )
    gamma6 = sym(bcm.assembled())

    best_lower = -np.inf
    best_pair = (np.eye(3) / 3, np.eye(3) / 3)
    best_upper = np.inf
    best_dual = np.eye(6) / 6

    def consider_primal(ra, rb):
        nonlocal best_lower, best_pair
        m = _margin_matrix(gamma6, ra, rb)
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo > best_lower:
            best_lower, best_pair = lo, (ra, rb)

    def consider_dual(candidate):
        nonlocal best_upper, best_dual
        u, g = _dual_upper_bound(gamma6, candidate)
        if u < best_upper:
            best_upper, best_dual = u, g

    def verdict_and_certificate():
        m_best = _margin_matrix(gamma6, *best_pair)
        if best_upper < -tol:
            kappa = KappaCandidate(*best_pair)
            cert = InfeasibilityCertificate(
                dual=best_dual,
                upper_bound=best_upper,
                kappa_best=kappa,
                m_star=m_best,
            )
            v = make_verdict(
                "cmc-sdp", -best_upper, 0.0, tol,
                details={"lower_bound": best_lower, "upper_bound": best_upper},
            )
            return v, cert
        if best_lower >= -tol:
            kappa = KappaCandidate(*best_pair)
            v = make_verdict(
                "cmc-sdp", -best_upper, 0.0, tol,
                details={"lower_bound": best_lower, "upper_bound": best_upper},
            )
            return v, kappa
        return None

    # cheap warm starts; for product states 1 - 2A is already optimal
    consider_primal(np.eye(3) / 3, np.eye(3) / 3)
    consider_primal(
        _project_spectraplex(np.eye(3) - 2 * bcm.block_a),
        _project_spectraplex(np.eye(3) - 2 * bcm.block_b),
    )
    m0 = _margin_matrix(gamma6, *best_pair)
    w0, v0 = np.linalg.eigh(m0)
    consider_dual(np.outer(v0[:, 0], v0[:, 0]))
    out = verdict_and_certificate()
    if out is not None:
        return out

    attempts = (
        ("CLARABEL", {}),
        ("CLARABEL", {"tol_gap_abs": 1e-12, "tol_gap_rel": 1e-12, "tol_feas": 1e-12}),
        ("SCS", {"eps": 1e-10, "max_iters": 200000}),
    )
    with _solver_lock:
        prob, param, (ra_var, rb_var), psd = _feasibility_problem()
        param.value = gamma6
        for solver, opts in attempts:
            try:
                prob.solve(solver=solver, warm_start=True, **opts)
            except (cp.SolverError, cp.DCPError):
                continue
            if ra_var.value is not None:
                consider_primal(
                    _project_spectraplex(ra_var.value),
                    _project_spectraplex(rb_var.value),
                )
            if psd.dual_value is not None:
                consider_dual(psd.dual_value)
            m1 = _margin_matrix(gamma6, *best_pair)
            w1, v1 = np.linalg.eigh(m1)
            consider_dual(np.outer(v1[:, 0], v1[:, 0]))
            out = verdict_and_certificate()
            if out is not None:
                return out
    raise NoConvergenceError(
        f"feasibility undecided at tol {tol:.1e}: "
        f"bounds [{best_lower:.3e}, {best_upper:.3e}]",
        lower_bound=best_lower,
        upper_bound=best_upper,
    )


def _bloch_rows(ops):
    """Coefficient rows a^(k) of qubit operators in the unnormalized Pauli
    basis, op = a0 + a . (sx, sy, sz)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    rows = np.empty((len(ops), 3))
    for k, op in enumerate(ops):
        rows[k] = [
            np.trace(op @ sx).real / 2,
            np.trace(op @ sy).real / 2,
            np.trace(op @ sz).real / 2,
        ]
    return rows


def _sphere_grid_bound(s_matrix, total, target_slack):
    """Certified lower bound of f(u) = total - u^T S u on the unit sphere.

    Uses a latitude/longitude grid with geodesic covering radius h and the
    second order Taylor certificate

        f(u) >= f(u_i) - ||grad f(u_i)|| h - H h^2 / 2,   H = 2 lmax(S),

    valid because along unit-speed great circles |f''| <= 2 lmax(S).  The
    grid is refined until the gap between the grid minimum and the bound
    is below target_slack (or the point budget is reached).
    """
    lmax = float(np.linalg.eigvalsh(s_matrix)[-1])
    hess = 2.0 * lmax
    if hess < 1e-300:
        return float(total), 0.0
    h = np.sqrt(target_slack / hess)
    h_floor = np.sqrt(4.0 * np.pi / _GRID_MAX_POINTS)
    bound = -np.inf
    slack = np.inf
    for _ in range(16):
        h = max(h, h_floor)
        n_theta = int(np.ceil(np.pi / h)) + 1
        thetas = np.linspace(0.0, np.pi, n_theta)
        best = np.inf
        grid_min = np.inf
        for theta in thetas:
            st = np.sin(theta)
            n_phi = max(1, int(np.ceil(2.0 * np.pi * st / h)))
            phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
            pts = np.stack(
                [st * np.cos(phis), st * np.sin(phis),
                 np.full(n_phi, np.cos(theta))],
                axis=1,
            )
            sp = pts @ s_matrix
            quad = np.einsum("ni,ni->n", pts, sp)
            f = total - quad
            grad = 2.0 * np.linalg.norm(sp - quad[:, None] * pts, axis=1)
            best = min(best, float(np.min(f - grad * h - 0.5 * hess * h * h)))
            grid_min = min(grid_min, float(f.min()))
        bound, slack = best, grid_min - best
        if slack <= target_slack or h <= h_floor:
            break
        h /= 2.0
    return bound, slack


def _multistart_min_variance(ops, restarts, seed):
    d = ops[0].shape[0]
    s2 = sum(op @ op for op in ops)
    rng = np.random.default_rng(seed)

    def split(x):
        z = x[:d] + 1j * x[d:]
        return z

    def value_grad(x):
        z = split(x)
        r2 = float(np.vdot(z, z).real)
        psi = z / np.sqrt(r2)
        e2 = float(np.vdot(psi, s2 @ psi).real)
        grad = (s2 @ psi - e2 * psi)
        val = e2
        for op in ops:
            m = float(np.vdot(psi, op @ psi).real)
            val -= m * m
            grad -= 2.0 * m * (op @ psi - m * psi)
        grad /= np.sqrt(r2)
        g = np.concatenate([2.0 * grad.real, 2.0 * grad.imag])
        return val, g

    best = np.inf
    for _ in range(restarts):
        x0 = rng.standard_normal(2 * d)
        res = minimize(value_grad, x0, jac=True, method="L-BFGS-B")
        best = min(best, float(res.fun))
    return best


def certified_min_variance(ops, method="auto", target_slack=GRID_SLACK_TARGET,
                           restarts=16, seed=0):
    """Lower bound on min over pure states of sum_k Var(ops[k]).

    For qubit observables the bound is certified: the variance sum is the
    quadratic T - u^T S u on the Bloch sphere (T = sum |a^(k)|^2,
    S = sum a a^T), bounded below on a grid with an explicit Lipschitz and
    curvature slack.  For local dimension >= 3 a multistart local
    minimization is run instead; that value is an upper bound estimate of
    the true minimum and must not be used to certify violations.

    Returns (bound, kind) with kind in {"certified", "estimate"}.
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    if not ops:
        return 0.0, "certified"
    d = ops[0].shape[0]
    for k, op in enumerate(ops):
        check_hermitian(op, tol=1e-9, name=f"observable {k}")
        if op.shape != (d, d):
            raise ValidationError("observables must share one dimension")
    if method == "auto":
        method = "grid" if d == 2 else "multistart"
    if method == "grid":
        if d != 2:
            raise ValidationError("the grid certificate only applies to qubits")
        rows = _bloch_rows(ops)
        total = float((rows**2).sum())
        bound, _ = _sphere_grid_bound(rows.T @ rows, total, target_slack)
        return bound, "certified"
    if method == "multistart":
        return _multistart_min_variance(ops, restarts, seed), "estimate"
    raise ValidationError(f"unknown method {method!r}")


def witness_to_lur(witness, obs_a, obs_b, target_slack=GRID_SLACK_TARGET):
    """Convert a PSD matrix on the joint block space into local uncertainty
    observables.

    From the spectral decomposition W = sum_k lam_k |psi_k><psi_k| with
    psi_k = alpha^(k) (+) beta^(k), the observables are
    A^_k = sqrt(lam_k) sum_l alpha^(k)_l A_l (same on the B side), so that
    Tr[W gamma(rho)] = sum_k Var(A^_k (x) 1 + 1 (x) B^_k) for every state.
    Variance bounds come from certified_min_variance.
    """
    w = np.asarray(witness, dtype=float)
    na, nb = obs_a.shape[0], obs_b.shape[0]
    if w.shape != (na + nb, na + nb):
        raise ValidationError(
            f"witness shape {w.shape} does not match block space "
            f"dimension {na + nb}"
        )
    if np.abs(w - w.T).max() > 1e-10:
        raise ValidationError("witness must be symmetric")
    vals, vecs = np.linalg.eigh(sym(w))
    if vals[0] < -1e-9:
        raise ValidationError(f"witness has negative eigenvalue {vals[0]:.3e}")
    ops_a, ops_b = [], []
    for k in range(len(vals)):
        if vals[k] <= 1e-14:
            continue
        r = np.sqrt(vals[k])
        alpha = vecs[:na, k]
        beta = vecs[na:, k]
        ops_a.append(r * np.einsum("l,lab->ab", alpha, obs_a))
        ops_b.append(r * np.einsum("l,lab->ab", beta, obs_b))
    bound_a, kind_a = certified_min_variance(ops_a, target_slack=target_slack)
    bound_b, kind_b = certified_min_variance(ops_b, target_slack=target_slack)
    return LocalUncertaintySet(
        ops_a=tuple(ops_a),
        ops_b=tuple(ops_b),
        bound_a=bound_a,
        bound_b=bound_b,
        kind_a=kind_a,
        kind_b=kind_b,
        witness=w,
        obs_a=np.asarray(obs_a),
        obs_b=np.asarray(obs_b),
    )


def lur_value(rho, lur):
    """Evaluate a local uncertainty relation on a state.

    Returns (lhs, rhs) with lhs = sum_k Var(A^_k (x) 1 + 1 (x) B^_k)
    computed from direct moments and rhs = U_A + U_B.  When the set
    carries its witness, lhs is cross-checked against Tr[W gamma].
    """
    lhs = 0.0
    eye_a = np.eye(rho.dim_a)
    eye_b = np.eye(rho.dim_b)
    for ak, bk in zip(lur.ops_a, lur.ops_b):
        if ak.shape[0] != rho.dim_a or bk.shape[0] != rho.dim_b:
            raise ValidationError("observable dimensions do not match the state")
        n = np.kron(ak, eye_b) + np.kron(eye_a, bk)
        m1 = np.einsum("ij,ji->", rho.matrix, n).real
        m2 = np.einsum("ij,ji->", rho.matrix, n @ n).real
        lhs += m2 - m1 * m1
    lhs = float(lhs)
    if lur.witness is not None and lur.obs_a is not None:
        gamma = bipartite_cm(rho, lur.obs_a, lur.obs_b)
        via_witness = float(np.sum(lur.witness * gamma.assembled()))
        if abs(lhs - via_witness) > 1e-9 * max(1.0, abs(lhs)):
            raise ValidationError(
                "witness expectation and direct variances disagree: "
                f"{lhs:.12g} vs {via_witness:.12g}"
            )
    return lhs, float(lur.bound_a + lur.bound_b)


def extract_lur_witness(bcm, certificate, gate_margin=1e-9):
    """Turn a detected two-qubit CMC violation into a verified LUR.

    Candidate witnesses (the dual certificate and projectors onto the
    negative eigenspace of the best margin matrix) are converted with
    witness_to_lur; a candidate is returned only if its violation is
    confirmed against certified variance bounds:
    Tr[W gamma] < U_A + U_B - gate_margin.  Returns None when no candidate
    passes (candidate generation is heuristic, verification is exact).
    """
    if isinstance(certificate, KappaCandidate):
        raise ValidationError(
            "extract_lur_witness needs the result of a violated feasibility "
            "test; this state passed the CMC"
        )
    if not isinstance(certificate, InfeasibilityCertificate):
        raise ValidationError("unrecognized feasibility certificate")
    gamma = bcm.assembled()
    candidates = [np.asarray(certificate.dual)]
    w, v = np.linalg.eigh(sym(certificate.m_star))
    neg = w < 0
    if neg.any():
        vn = v[:, neg]
        candidates.append(vn @ vn.T / neg.sum())
        candidates.append((vn * (-w[neg])) @ vn.T / (-w[neg]).sum())
    slack = min(GRID_SLACK_TARGET, max(abs(certificate.upper_bound) / 8.0, 1e-7))
    for cand in candidates:
        u, g = _dual_upper_bound(gamma, cand)
        if g is None:
            continue
        lur = witness_to_lur(g, bcm.obs_a, bcm.obs_b, target_slack=slack)
        lhs = float(np.sum(g * gamma))
        rhs = lur.bound_a + lur.bound_b
        if lhs < rhs - gate_margin:
            return lur
    return None
