"""Sweep the external mean under a fixed borrowing weight.

For a one-arm design (n=25, sigma=1, alpha=0.025, effect 0.5) borrowing
from an external sample (nE=20) at fixed weight delta=0.5, print the null
rejection rate and power of the borrowing test next to the plain z-test
calibrated to the borrowing test's size.

The punchline is the last column: with a fixed weight the borrowing test
*is* a threshold test on the current mean, so once the comparator is run at
the same size the two tests coincide and the power difference vanishes —
favorable external data buy size inflation, not extra power.
"""

from borrowoc import BorrowingMethod, ScenarioOneArm, oc_fixed_external

scen = ScenarioOneArm(n=25, sigma=1.0, theta0=0.0, alpha=0.025,
                      nE=20, theta1=0.5)
method = BorrowingMethod.fixed_power_prior(0.5)

print(f"one-arm design: n={scen.n}, sigma={scen.sigma}, alpha={scen.alpha}, "
      f"effect {scen.theta1}; external nE={scen.nE}, weight 0.5")
print()
print(f"{'ext. mean':>9}  {'t1e':>8}  {'power':>8}  {'calibrated':>10}  "
      f"{'power diff':>10}")
for k in range(-4, 9):
    de = k * 0.25
    pt = oc_fixed_external(scen, de, method)
    print(f"{de:>9.2f}  {pt.t1e_borrow:>8.5f}  {pt.power_borrow:>8.5f}  "
          f"{pt.power_calibrated:>10.5f}  {pt.power_diff:>10.2e}")

print()
print("t1e crosses the nominal 0.025 as the external mean turns favorable,")
print("but the power difference stays at numerical zero: the size-matched")
print("comparator replicates the borrowing test exactly.")
