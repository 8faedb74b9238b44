"""Exit thresholds of the four agent types at the base parameters.

A VC fund sells its stake in a portfolio firm to an acquirer once the
profit shock x reaches a threshold. The sale price is set by Nash
bargaining, and the VC's net payoff from exiting at x is linear,
eta * x - theta. A time-consistent VC waits until x*. A VC who discounts
the post-expiry future by delta_p (critical-only), or who also discounts
the future of later "selves" by delta_f (naive, sophisticated), gives up
option value and exits sooner.

Run:  python demos/01_base_case.py
"""

from vcexit import DiscountSpec, ModelParams, deal_outcome, solve

p = ModelParams()
d = DiscountSpec()  # delta_f=0.7, delta_p=0.3, four selves, unit intensities

print(f"payoff slope eta = {p.eta:.4f}, net cost theta = {p.theta:.4f}")
print(f"breakeven theta/eta = {p.theta / p.eta:.4f}\n")

# what the VC actually receives if it sold today at x = 1
deal = deal_outcome(p, 1.0)
print(f"at x = 1: price {deal.price:.4f}, VC payoff {deal.vc_payoff:.4f}"
      f" (stake {deal.stake_value:.4f} + priority {deal.priority_gain:.4f}"
      f" + synergy {deal.synergy_share:.4f})\n")

for agent in ("consistent", "critical", "naive", "sophisticated"):
    sol = solve(agent, p, d)
    ths = "  ".join(f"x[{i}]={x:.4f}" for i, x in zip(sol.self_indices, sol.thresholds))
    print(f"{agent:>13}: {ths}")

# Every inconsistent agent exits well below x*. Which of naive and
# sophisticated waits longer depends on delta_p: at delta_p = 0.3 the
# sophisticated first self is slightly more patient, while for delta_p near
# delta_f the order flips. The waiting premium shrinks as delta_f falls.
print()
for df in (1.0, 0.9, 0.7, 0.5):
    dd = DiscountSpec(delta_f=df, delta_p=min(0.3, df))
    xn = solve("naive", p, dd).threshold
    xs = solve("sophisticated", p, dd).threshold
    print(f"delta_f={df:.1f}: naive x0 {xn:.4f}, sophisticated x0 {xs:.4f}")
