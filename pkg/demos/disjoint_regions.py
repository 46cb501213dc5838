"""Show the rejection region splitting in two under heavy borrowing.

With a very large external sample (nE=1000 against n=25) and re-estimated
weights, mild conflict produces a bimodal decision rule: current means near
the external mean reject (the weight saturates and the pooled posterior is
very tight), then a band of larger means does NOT reject (the weight
collapses before the mean is large enough on its own), and finally large
means reject again.  The rejection region in sample-mean space becomes two
disjoint intervals.

A test whose rejection region is not an upper half-line cannot be replicated
by any z-test threshold — and the size-matched z-test is strictly more
powerful, as the last column shows.
"""

from borrowoc import (BorrowingMethod, ScenarioOneArm, interval_count,
                      oc_fixed_external, rejection_region)

scen = ScenarioOneArm(n=25, sigma=1.0, theta0=0.0, alpha=0.025,
                      nE=1000, theta1=0.5)
eb = BorrowingMethod.empirical_bayes()

print(f"one-arm design n={scen.n}, external nE={scen.nE}, "
      f"re-estimated weight")
print()
print(f"{'ext. mean':>9}  {'pieces':>6}  {'rejection region':<44} "
      f"{'power diff':>10}")
for k in range(0, 22, 1):
    de = k / 100.0
    region = rejection_region(scen, de, eb)
    pt = oc_fixed_external(scen, de, eb)
    pieces = " U ".join(f"({iv.lo:.3f}, {iv.hi:.3f})"
                        for iv in region.intervals)
    print(f"{de:>9.2f}  {interval_count(region):>6}  {pieces:<44} "
          f"{pt.power_diff:>10.2e}")

print()
print("two pieces appear for external means in roughly [0.06, 0.14]; there")
print("the power difference is strictly negative — the calibrated z-test")
print("beats borrowing by up to ~0.25 in power at the same size.")
