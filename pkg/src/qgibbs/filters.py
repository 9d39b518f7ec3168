"""Time-domain filters of the Gibbs-sampling generator and their transforms.

Fourier conventions
-------------------
``f_hat(x) = (2 pi)^(-1/2) * int f(t) exp(-i x t) dt``   (unitary)

``b1_hat(x) = int b1(t) exp(-i x t) dt``,  ``b2_hat(x) = int b2(t) exp(-i x t) dt``

Closed forms (Gaussian integrals plus ``int sech(2 pi t) e^{-ixt} dt = sech(x/4)/2``
and the convolution theorem for ``b1``)::

    f_hat(x)  = sqrt(beta) (2 pi)^(-1/4) exp(-beta^2 x^2 / 4)
    b1_hat(x) = i (pi / sqrt 2) tanh(x / 4) exp(-x^2 / 8)
    b2_hat(x) = exp(-(x + 2)^2 / 16) / (4 pi)

and the frequency-integrated jump kernel::

    int gamma(w) f_hat(w - v1) f_hat(w - v2) dw
        = exp(-(beta (v1 + v2) + 2)^2 / 16 - beta^2 (v1 - v2)^2 / 8) / sqrt 2
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

# depolarizing rate of the infinite-temperature generator
LAMBDA = 1.0 / (np.sqrt(2.0) * np.exp(0.25))

_B1_PREFACTOR = 2.0 * np.sqrt(np.pi) * np.exp(1.0 / 8.0)


def _sech(x):
    return 1.0 / np.cosh(np.clip(x, -700.0, 700.0))


@dataclass(frozen=True)
class FilterFunctions:
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("filters need beta > 0")

    def f(self, t):
        b = self.beta
        return np.exp(-np.square(t) / b**2) * np.sqrt(np.sqrt(2.0 / np.pi) / b)

    def gamma(self, w):
        return np.exp(-np.square(self.beta * np.asarray(w) + 1.0) / 2.0)

    @staticmethod
    def b1(t):
        """``2 sqrt(pi) e^(1/8) (sech(2 pi .) * sin(-.) e^(-2 .^2))(t)`` by quadrature."""
        def one(tt):
            g = lambda s: _sech(2 * np.pi * s) * np.sin(s - tt) * np.exp(-2 * (tt - s) ** 2)
            return quad(g, tt - 12.0, tt + 12.0, points=[0.0] if abs(tt) < 12 else None,
                        limit=200, epsabs=1e-14)[0]
        t = np.asarray(t, dtype=float)
        return _B1_PREFACTOR * np.vectorize(one, otypes=[float])(t)

    @staticmethod
    def b2(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-4 * t**2 - 2j * t) / (2 * np.pi * np.sqrt(np.pi))

    def f_hat(self, x):
        b = self.beta
        return np.sqrt(b) * (2 * np.pi) ** -0.25 * np.exp(-(b**2) * np.square(x) / 4.0)

    @staticmethod
    def b1_hat(x):
        x = np.asarray(x, dtype=float)
        return 1j * (np.pi / np.sqrt(2.0)) * np.tanh(x / 4.0) * np.exp(-(x**2) / 8.0)

    @staticmethod
    def b2_hat(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.square(x + 2.0) / 16.0) / (4 * np.pi)

    def gamma_overlap(self, nu1, nu2):
        return gamma_overlap(nu1, nu2, self)


def gamma_overlap(nu1, nu2, filters):
    """``int gamma(w) f_hat(nu1 - w) conj(f_hat(nu2 - w)) dw`` in closed form.

    Broadcasts over ``nu1`` and ``nu2``. The kernel is real because ``f_hat`` is
    real and even.
    """
    if not isinstance(filters, FilterFunctions):
        filters = FilterFunctions(filters)
    b = filters.beta
    s = b * (np.asarray(nu1, dtype=float) + np.asarray(nu2, dtype=float))
    dlt = b * (np.asarray(nu1, dtype=float) - np.asarray(nu2, dtype=float))
    return np.exp(-np.square(s + 2.0) / 16.0 - np.square(dlt) / 8.0) / np.sqrt(2.0)


def gamma_weighted_f_hat(nu, filters):
    """``int gamma(w) f_hat(w - nu) dw``; scales the frequency-integrated jump."""
    b = filters.beta
    a = b * np.asarray(nu, dtype=float)
    return (2 * np.pi) ** -0.25 * np.sqrt(4 * np.pi / 3.0) * np.exp(-np.square(a + 1.0) / 6.0) / np.sqrt(b)
