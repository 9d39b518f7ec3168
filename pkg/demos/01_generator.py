"""Build the thermal generator for a small chain and check what it should satisfy."""

import numpy as np

from qgibbs import dynamics as dyn
from qgibbs import generator as G
from qgibbs import spin_model as sm
from qgibbs import superop as so
from qgibbs.filters import LAMBDA

H = sm.heisenberg_chain(3)
print(f"Heisenberg chain, n={H.n}, ||H||={H.norm:.3f}, J={H.J:.1f}")

for beta in (0.0, 0.1, 1.0):
    L = G.full_generator(H, beta)
    sigma = sm.gibbs_state(H, beta)
    td = so.trace_norm(dyn.fixed_point(L) - sigma)
    print(f"beta={beta:4.1f}  fixed point vs Gibbs {td:.1e}  gap {dyn.spectral_gap(L):.4f}"
          f"  KMS residual {dyn.kms_residual(L, sigma, samples=10):.1e}")

# at infinite temperature every site depolarizes at rate LAMBDA
print(f"LAMBDA = {LAMBDA:.7f}, gap at beta=0 = {dyn.spectral_gap(G.full_generator(H, 0.0)):.7f}")

# the generator is a valid GKLS generator: its Choi matrix is PSD off the maximally entangled vector
cp = so.conditional_cp_spectrum(G.local_generator(H, 0, 0.5).matrix)
print(f"smallest conditional Choi eigenvalue {cp.min():.1e}")

G.full_generator(sm.ising_chain(2), 0.5).save("ising2_generator.txt")
back = G.GeneratorMatrix.load("ising2_generator.txt")
print("saved and reloaded a 16x16 generator, max diff", np.abs(back.matrix - G.full_generator(sm.ising_chain(2), 0.5).matrix).max())
