"""Profile the two-arm level over the control-vs-external offset.

In a two-arm trial borrowing into the control arm, the null hypothesis
leaves the control mean free, so the type I error rate is a *profile* over
the standardized offset x = (control mean - external mean)/sigma, and the
honest level of the test is the profile's maximum.

Fixed weight: the profile climbs monotonically — far enough into conflict
the level reaches 1, so the maximized level is useless and the calibrated
comparator (a level-1 test) trivially dominates.

Re-estimated weight: the weight collapses under conflict, the profile rises
to a modest peak near offset 0.7 and falls back; the maximized level is
finite, yet the comparator calibrated to it still wins at every offset.
"""

from borrowoc import BorrowingMethod, ScenarioTwoArm, power_profile

scen = ScenarioTwoArm(nc=15, nt=15, nE=10, sigma=1.0, theta1=1.0, alpha=0.025)
offsets = tuple(round(-3.0 + 0.5 * k, 8) for k in range(13))

for label, method in (("fixed weight 0.5",
                       BorrowingMethod.fixed_power_prior(0.5)),
                      ("re-estimated weight",
                       BorrowingMethod.empirical_bayes())):
    prof = power_profile(scen, 0.0, method, offsets)
    print(f"--- {label} ---")
    print(f"{'offset':>7}  {'t1e':>8}  {'power':>8}  {'power diff':>10}")
    for x, t, p, d in zip(prof.grid, prof.t1e, prof.power_borrow,
                          prof.power_diff):
        print(f"{x:>7.2f}  {t:>8.5f}  {p:>8.5f}  {d:>10.5f}")
    print(f"maximized level {prof.alphaB_max:.5f} at offset "
          f"{prof.argmax_offset:.3f}; comparator power at that level "
          f"{prof.power_calibrated:.5f}")
    print()

print("in both regimes the power difference is negative at every offset:")
print("once the comparator runs at the borrowing test's maximized level,")
print("borrowing has no power left to offer.")
