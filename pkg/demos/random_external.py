"""Treat the external data as random rather than fixed.

Design-stage operating characteristics can also average over the external
sample mean (drawn around a center thetaE) instead of conditioning on one
value.  For fixed weights this expectation has a closed form; for
re-estimated weights a seeded Monte Carlo with exact conditional inner
probabilities does the averaging.

The closed forms show the same story as the fixed-external analyses: the
borrowing test's averaged size exceeds or undercuts the nominal level
depending on the external center, and the comparator calibrated to the
averaged size is always at least as powerful — here strictly.
"""

from borrowoc import (BorrowingMethod, ScenarioOneArm,
                      oc_random_external_fixed_pp, oc_random_external_mc)

scen = ScenarioOneArm(n=25, sigma=1.0, theta0=0.0, alpha=0.025,
                      nE=20, theta1=0.5)

print("one-arm, fixed weight 0.5 (closed form)")
print(f"{'center':>7}  {'avg size':>8}  {'power':>8}  {'calibrated':>10}  "
      f"{'power diff':>10}")
for thetaE in (-0.5, 0.0, 0.25, 0.5, 1.0):
    pt = oc_random_external_fixed_pp(scen, thetaE, 0.5)
    print(f"{thetaE:>7.2f}  {pt.t1e_borrow:>8.5f}  {pt.power_borrow:>8.5f}  "
          f"{pt.power_calibrated:>10.5f}  {pt.power_diff:>10.5f}")

print()
print("one-arm, re-estimated weight (Monte Carlo, nsim=100000, seed=0)")
eb = BorrowingMethod.empirical_bayes()
print(f"{'center':>7}  {'avg size':>8}  {'power':>8}  {'calibrated':>10}  "
      f"{'power diff':>10}")
for thetaE in (0.0, 0.5):
    pt = oc_random_external_mc(scen, thetaE, eb, nsim=100_000, seed=0)
    print(f"{thetaE:>7.2f}  {pt.t1e_borrow:>8.5f}  {pt.power_borrow:>8.5f}  "
          f"{pt.power_calibrated:>10.5f}  {pt.power_diff:>10.5f}")

print()
print("every power difference is negative: averaging over external draws")
print("does not change which test wins, only by how much.")
