"""Detecting bound entanglement: states the PPT test can never see.

Two 3x3 families are bundled: the tiles construction (a rank-4 projector
complement, PPT yet entangled) and random chessboard states.  The
normal-form sum test detects most of them; the threshold scan pins down
the noise robustness of the detection.
"""

import numpy as np

from covsep import (
    chessboard_state,
    evaluate_criteria,
    mix_with_white_noise,
    ppt_test,
    run_criterion,
    threshold_scan,
    upb_tiles_state,
)
from covsep.errors import NoConvergenceError

np.set_printoptions(precision=4, suppress=True)

print("=== the tiles state ===")
rho = upb_tiles_state()
w = np.linalg.eigvalsh(rho.matrix)
print("rank:", int((w > 1e-10).sum()), " purity:",
      round(float(np.trace(rho.matrix @ rho.matrix).real), 4))
print("ppt test:", ppt_test(rho).detected, "(PPT: invisible to partial transposition)")
print("normal-form sum test:", run_criterion(rho, "prop6").detected)
print()

print("=== noise robustness: where does detection stop? ===")
res = threshold_scan("upb-noise", "prop6", bisect_tol=1e-4)
print(f"detection threshold at noise weight p = {res.threshold:.4f}")
print(f"(bracket [{res.lower:.4f}, {res.upper:.4f}], "
      f"{res.evaluations} evaluations)")
print()

print("=== random chessboard states (all PPT by construction) ===")
rng = np.random.default_rng(123)
n = 400
counts = {"ccnr": 0, "prop4": 0, "prop6": 0}
failures = 0
for _ in range(n):
    state = chessboard_state(seed=rng)
    try:
        out = evaluate_criteria(state, list(counts))
    except NoConvergenceError:
        failures += 1  # a handful of near-boundary states filter very slowly
        continue
    for name in counts:
        counts[name] += out[name].detected
print(f"detection rates over {n} samples ({failures} filtering failures):")
for name, k in counts.items():
    print(f"  {name:6} {k / (n - failures):6.1%}")
print("the normal-form sum test detects nearly all of them; the")
print("realignment-based tests only a fifth or so")
