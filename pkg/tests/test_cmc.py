import numpy as np
import pytest

from covsep import (
    DensityMatrix,
    KappaCandidate,
    InfeasibilityCertificate,
    certified_min_variance,
    cm_trace_test,
    extract_lur_witness,
    gell_mann_basis,
    lur_value,
    bipartite_cm,
    mix_with_white_noise,
    ppt_test,
    purity,
    qubit_block_cm,
    qubit_cmc_feasibility,
    random_density_matrix,
    traceless_pauli,
    upb_tiles_state,
    witness_to_lur,
)
from covsep.cmc import _margin_matrix
from covsep.errors import ValidationError

from conftest import max_mixed


def full_cm_and_purities(rho):
    ba = gell_mann_basis(rho.dim_a)
    bb = gell_mann_basis(rho.dim_b)
    bcm = bipartite_cm(rho, ba, bb)
    return bcm, purity(rho.reduced("A")), purity(rho.reduced("B"))


def test_trace_test_bell(bell):
    v = cm_trace_test(*full_cm_and_purities(bell))
    assert v.detected
    assert v.left == pytest.approx(3, abs=1e-10)
    assert v.right == pytest.approx(1, abs=1e-10)


def test_trace_test_max_mixed():
    v = cm_trace_test(*full_cm_and_purities(max_mixed(2, 2)))
    assert not v.detected
    assert v.left == pytest.approx(0, abs=1e-12)
    assert v.right == pytest.approx(1, abs=1e-12)


def test_trace_test_pure_product():
    rho = DensityMatrix(2, 2, np.kron(np.diag([1.0, 0]), np.diag([1.0, 0])))
    v = cm_trace_test(*full_cm_and_purities(rho))
    assert v.left == pytest.approx(0, abs=1e-10)
    assert v.right == pytest.approx(0, abs=1e-10)
    assert not v.detected


def test_trace_test_diagonalizes_when_needed(rng):
    # a local unitary scrambles C off the diagonal; the verdict must match
    from covsep import random_unitary

    rho = random_density_matrix(2, 2, seed=rng)
    u = np.kron(random_unitary(2, rng), random_unitary(2, rng))
    rho_u = DensityMatrix(2, 2, u @ rho.matrix @ u.conj().T)
    v0 = cm_trace_test(*full_cm_and_purities(rho))
    v1 = cm_trace_test(*full_cm_and_purities(rho_u))
    assert v0.left == pytest.approx(v1.left, abs=1e-8)


def test_trace_test_dim_mismatch(rng):
    rho = random_density_matrix(2, 3, seed=rng)
    bcm = bipartite_cm(rho, gell_mann_basis(2), gell_mann_basis(3))
    with pytest.raises(ValidationError):
        cm_trace_test(bcm, 1.0, 1.0)


def test_feasibility_product_state():
    a = np.diag([1.0, 0.0])
    b = np.array([[0.5, 0.5], [0.5, 0.5]])
    rho = DensityMatrix(2, 2, np.kron(a, b))
    verdict, cert = qubit_cmc_feasibility(qubit_block_cm(rho))
    assert not verdict.detected
    assert isinstance(cert, KappaCandidate)
    # the optimizer is the Bloch projector of the reduced state: for |0>
    # the Bloch vector is (0, 0, 1)
    proj = np.zeros((3, 3))
    proj[2, 2] = 1
    assert np.abs(cert.rho_a - proj).max() < 1e-5


def test_feasibility_bell(bell):
    verdict, cert = qubit_cmc_feasibility(qubit_block_cm(bell))
    assert verdict.detected
    assert isinstance(cert, InfeasibilityCertificate)
    assert verdict.margin == pytest.approx(-1 / 3, abs=1e-6)


def test_feasibility_max_mixed():
    verdict, cert = qubit_cmc_feasibility(qubit_block_cm(max_mixed(2, 2)))
    assert not verdict.detected
    assert verdict.details["lower_bound"] == pytest.approx(1 / 6, abs=1e-6)


def test_feasibility_certificate_is_feasible(rng):
    # returned KappaCandidates must verify by direct eigensolve
    tol = 1e-7
    for _ in range(20):
        rho = random_density_matrix(2, 2, seed=rng)
        bcm = qubit_block_cm(rho)
        verdict, cert = qubit_cmc_feasibility(bcm, tol=tol)
        if not verdict.detected:
            m = _margin_matrix(bcm.assembled(), cert.rho_a, cert.rho_b)
            assert np.linalg.eigvalsh(m)[0] >= -tol


def test_trace_test_implies_feasibility_violation(rng):
    # the trace test is a consequence of the full criterion
    found = 0
    for _ in range(80):
        rho = random_density_matrix(2, 2, seed=rng)
        v3 = cm_trace_test(*full_cm_and_purities(rho))
        if v3.detected and v3.margin < -1e-6:
            found += 1
            verdict, _ = qubit_cmc_feasibility(qubit_block_cm(rho))
            assert verdict.detected
    assert found > 5


def test_left_affine_in_noise_and_single_flip():
    # families with maximally mixed reductions have zero means, so the
    # trace-test left side is affine in the noise weight; on a scan the
    # verdict flips at most once (this is what the bisection relies on)
    from covsep import isotropic_state, werner_state

    for family in (werner_state, lambda p: isotropic_state(p, 3)):
        ps = np.array([0.2, 0.5, 0.8])
        lefts = []
        flags = []
        for p in np.linspace(0, 1, 21):
            rho = family(p)
            v = cm_trace_test(*full_cm_and_purities(rho))
            if p in ps:
                lefts.append(v.left)
            flags.append(v.detected)
        slope1 = (lefts[1] - lefts[0]) / (ps[1] - ps[0])
        slope2 = (lefts[2] - lefts[1]) / (ps[2] - ps[1])
        assert slope1 == pytest.approx(slope2, abs=1e-9)
        flips = sum(flags[i] != flags[i + 1] for i in range(len(flags) - 1))
        assert flips <= 1


def test_certified_min_variance_pauli_triple():
    bound, kind = certified_min_variance(list(traceless_pauli()))
    assert kind == "certified"
    # analytic oracle: sum <A_k^2> = 3/2, max_u sum <A_k>^2 = 1/2
    assert 1 - 2e-4 <= bound <= 1 + 1e-12


def test_certified_min_variance_single_op():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    bound, kind = certified_min_variance([sx])
    assert kind == "certified"
    assert -2e-4 <= bound <= 1e-12


def test_certified_min_variance_empty():
    assert certified_min_variance([]) == (0.0, "certified")


def test_certified_min_variance_lower_bounds_samples(rng):
    # the certified bound must lower-bound a dense random sample
    for _ in range(5):
        ops = [
            np.einsum("l,lab->ab", rng.standard_normal(3), traceless_pauli())
            for _ in range(3)
        ]
        bound, _ = certified_min_variance(ops, target_slack=1e-5)
        u = rng.standard_normal((10**6, 3))
        u /= np.linalg.norm(u, axis=1)[:, None]
        rows = np.array([
            [np.trace(op @ s).real / 2 for s in
             np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])]
            for op in ops
        ])
        f = (rows**2).sum() - np.einsum("ni,ij,nj->n", u, rows.T @ rows, u)
        assert bound <= f.min() + 1e-12


def test_certified_min_variance_qutrit_estimate():
    # the full traceless basis has a constant variance sum d - 1 on pure
    # states, an exact oracle for the multistart estimate
    ops = list(gell_mann_basis(3).traceless)
    est, kind = certified_min_variance(ops)
    assert kind == "estimate"
    assert est == pytest.approx(2.0, abs=1e-7)


def test_witness_to_lur_zero():
    t = traceless_pauli()
    lur = witness_to_lur(np.zeros((6, 6)), t, t)
    assert len(lur.ops_a) == 0
    assert lur.bound_a == 0 and lur.bound_b == 0


def test_witness_to_lur_identity(bell):
    t = traceless_pauli()
    lur = witness_to_lur(np.eye(6), t, t)
    assert len(lur.ops_a) == 6
    gamma = qubit_block_cm(bell)
    lhs, _ = lur_value(bell, lur)
    assert lhs == pytest.approx(np.trace(gamma.assembled()), abs=1e-9)


def test_witness_to_lur_rank_one():
    t = traceless_pauli()
    psi = np.zeros(6)
    psi[0] = 1
    lur = witness_to_lur(np.outer(psi, psi), t, t)
    assert len(lur.ops_a) == 1


def test_witness_to_lur_rejects_non_psd():
    t = traceless_pauli()
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        witness_to_lur(-np.eye(6), t, t)


def test_lur_value_zero_observables(rng):
    rho = random_density_matrix(2, 2, seed=rng)
    t = traceless_pauli()
    lur = witness_to_lur(np.zeros((6, 6)), t, t)
    assert lur_value(rho, lur) == (0.0, 0.0)


def test_lur_holds_on_separable(rng):
    # paulis with the certified bound 1 per side
    t = traceless_pauli()
    lur = witness_to_lur(np.eye(6), t, t)
    for _ in range(20):
        a = random_density_matrix(2, 2, seed=rng).reduced("A")
        b = random_density_matrix(2, 2, seed=rng).reduced("B")
        sep = DensityMatrix(2, 2, np.kron(a, b))
        lhs, rhs = lur_value(sep, lur)
        assert lhs >= rhs - 1e-9


def test_extract_lur_bell(bell):
    bcm = qubit_block_cm(bell)
    verdict, cert = qubit_cmc_feasibility(bcm)
    lur = extract_lur_witness(bcm, cert)
    assert lur is not None
    assert lur.kind_a == "certified" and lur.kind_b == "certified"
    lhs, rhs = lur_value(bell, lur)
    assert lhs < rhs - 1e-9
    # duality loop: the direct variance sum equals Tr[W gamma]
    assert lhs == pytest.approx(
        float(np.sum(lur.witness * bcm.assembled())), abs=1e-9
    )


def test_extract_lur_requires_violation(rng):
    rho = max_mixed(2, 2)
    bcm = qubit_block_cm(rho)
    _, cert = qubit_cmc_feasibility(bcm)
    with pytest.raises(ValidationError, match="passed the CMC"):
        extract_lur_witness(bcm, cert)
