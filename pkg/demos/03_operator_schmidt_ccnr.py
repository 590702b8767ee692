"""Operator Schmidt decomposition, the realignment test and its refinement.

Any state expands as rho = sum_k lam_k G_k^A (x) G_k^B with orthonormal
operator pairs.  Separable states keep sum lam_k <= 1 (the realignment or
CCNR test); weighting the terms with the operator traces gives a strictly
stronger trace-form test on the same decomposition.
"""

import numpy as np

from covsep import (
    ccnr_test,
    maximally_entangled,
    mix_with_white_noise,
    operator_schmidt,
    random_density_matrix,
    schmidt_trace_test,
)

np.set_printoptions(precision=4, suppress=True)

print("=== operator Schmidt coefficients ===")
for name, rho in [
    ("Bell state", maximally_entangled(2)),
    ("maximally mixed", mix_with_white_noise(maximally_entangled(2), 0.0)),
    ("random 3x3", random_density_matrix(3, 3, seed=1)),
]:
    dec = operator_schmidt(rho)
    lam = dec.coefficients
    print(f"{name}: lam = {lam.round(4)}  sum = {lam.sum():.4f}")
print()

print("=== reconstruction check ===")
rho = random_density_matrix(2, 3, seed=5)
dec = operator_schmidt(rho)
err = np.abs(dec.reconstruct() - rho.matrix).max()
print(f"max |sum_k lam_k G_k^A (x) G_k^B - rho| = {err:.2e}")
print(f"sum lam_k^2 = {np.sum(dec.coefficients**2):.6f} = Tr[rho^2] "
      f"(purity {np.trace(rho.matrix @ rho.matrix).real:.6f})")
print()

print("=== both tests on a noise scan of the Bell state ===")
print(" p    ccnr left  trace-form margin  ccnr  trace-form")
for p in (1.0, 0.8, 0.6, 0.4, 0.2):
    rho = mix_with_white_noise(maximally_entangled(2), p)
    dec = operator_schmidt(rho)
    c = ccnr_test(dec)
    s = schmidt_trace_test(dec)
    print(f"{p:.1f}   {c.left:8.4f}   {s.margin:12.4f}     "
          f"{str(c.detected):5}  {s.detected}")
print()

print("=== the implication: every ccnr detection is caught ===")
rng = np.random.default_rng(2)
caught = total = 0
for _ in range(500):
    dec = operator_schmidt(random_density_matrix(2, 2, seed=rng))
    if ccnr_test(dec).detected:
        total += 1
        caught += schmidt_trace_test(dec).detected
print(f"{caught}/{total} ccnr detections also flagged by the trace form")
