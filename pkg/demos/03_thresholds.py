"""The explicit high-temperature threshold, term by term."""

from qgibbs import certificates as cert
from qgibbs.filters import LAMBDA

led = cert.kappa_local(1, 1.0, 1 / 615, 4)
print(f"kappa at beta J = 1/615, r0 = 4: {led.kappa:.6f} (lambda = {LAMBDA:.6f}, margin {led.margin:.2e})")
for name, val in led.terms.items():
    print(f"  {name:16s} {val:.6e}")

for D in (1, 2, 3):
    res = cert.beta_star_search(D=D, r0_range=range(1, 10))
    print(f"D={D}: beta* J = 1/{1 / res.beta_star:.1f} at r0 = {res.r0}")

print("kappa against r0 at beta J = 1e-3:",
      [round(cert.kappa_local(1, 1.0, 1e-3, r).kappa, 3) for r in range(1, 8)])

for nu in (5, 7, 9):
    lr = cert.kappa_long_range(1, nu, 1.0, 1.0, 1e-3, 5)
    print(f"long range nu={nu}: kappa={lr.kappa:.4f} certified={lr.certified} divergent={lr.divergent}")
