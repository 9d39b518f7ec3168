"""Mixing time against chain length below the certified temperature."""

import numpy as np

from qgibbs import certificates as cert
from qgibbs import dynamics as dyn
from qgibbs import generator as G
from qgibbs import spin_model as sm
from qgibbs.cli import fit_log_scaling
from qgibbs.filters import LAMBDA

ns, ts = [2, 3, 4], []
for n in ns:
    H = sm.ising_chain(n)
    bs = cert.beta_star_search(J=H.J)
    L = G.full_generator(H, bs.beta_star / 2)
    ts.append(dyn.mixing_time(L, 0.01))
    print(f"n={n}  beta*={bs.beta_star:.2e}  t(0.01)={ts[-1]:.3f}")

a, b, resid = fit_log_scaling(ns, ts)
kappa = cert.kappa_local(1, 6.0, cert.beta_star_search(J=6.0).beta_star / 2, 4).kappa
print(f"t ~ {a:.2f} + {b:.2f} log n (max residual {resid:.1%}); rate bound 2/(lambda-kappa) = {2 / (LAMBDA - kappa):.2f}")

# oscillator norm of a local observable shrinks at least as fast as the certified rate
H = sm.ising_chain(3)
beta = cert.beta_star_search(J=H.J).beta_star / 2
X = np.kron(np.kron([[0, 1], [1, 0]], np.eye(2)), np.eye(2))
rep = cert.oscillator_decay(G.full_generator(H, beta).adjoint(), X, np.linspace(0, 6, 13), kappa=kappa)
print(f"fitted decay rate {rep.fitted_rate:.3f} vs certified {rep.certified_rate:.3f}")
