"""Partition function by an annealing product of sampled ratios."""

from qgibbs import certificates as cert
from qgibbs import partition as pt
from qgibbs import spin_model as sm

H = sm.ising_chain(3)
beta_max = cert.beta_star_search(J=H.J).beta_star / 2
sched = pt.build_uniform_schedule(H, 0.0, beta_max, 0.25)
print(f"schedule of {sched.length} points, ratio bound B = {sched.ratio_bound:.4f}, "
      f"{pt.samples_per_step(sched, 0.1)} samples per step")

one = pt.dyer_frieze_estimate(H, sched, 0.1, seed=1)
print(f"one run: estimate {one.estimate:.6f}, exact {one.target:.6f}, relative error {one.relative_error:.2e}")

rep = pt.success_probability_harness(H, beta_max, 0.25, 0.1, trials=200, seed=1)
print(f"{rep.successes}/{rep.trials} runs within 10%, 99% lower bound {rep.lower_bound:.3f}")

# with an imperfect block encoding the per-step probabilities are off by up to 2 eps_b
biased = pt.success_probability_harness(H, beta_max, 0.25, 0.1, block_error=0.01, trials=100, seed=1)
print(f"eps_b = 0.01: {biased.successes}/{biased.trials} within 10%")
