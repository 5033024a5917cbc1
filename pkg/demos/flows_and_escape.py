"""Numerical flows: eigenfunction evolution, isometry, decay rates and finite-time escape.

Run with ``python3 demos/flows_and_escape.py``.
"""

import numpy as np

from koopres.flow import decay_fit, eigen_evolution_check, escape_detect, integrate, isometry_check
from koopres.liouville import completeness_classify
from koopres.presets import XP_CHART, Z_CHART, damped_oscillator, damped_toy, harmonic, power_damped
from koopres.symbolic import MultiPolynomial, gaussian_dressing


def main():
    pts = np.random.default_rng(1).uniform(-1, 1, (10, 2))
    z = MultiPolynomial.var(Z_CHART, "z")
    print("z under the oscillator flow, residual of e^{-it} z:", eigen_evolution_check(z, 1, harmonic(1), 1.0, pts))

    x, p = MultiPolynomial.var(XP_CHART, "x"), MultiPolynomial.var(XP_CHART, "p")
    f = gaussian_dressing(XP_CHART) * (x * p + 1)
    print("isometry defect, damped toy at t=1:", isometry_check(f, damped_toy(1), 1.0).defect)

    tr = integrate(damped_toy(0.5), [1, 1], 5)
    print("decay rate of x on the damped toy (gamma=0.5):", decay_fit(tr, "x").rate)
    tr = integrate(damped_oscillator(1, 0.3), [1, 0.2, 0.5, -0.1], 5)
    print("decay rate of |z1| on the damped oscillator (gamma=0.3):",
          decay_fit(tr, lambda s: np.abs(s[:, 0] + 1j * s[:, 1])).rate)

    pre = power_damped(2, 1)
    cls = completeness_classify(pre.hamiltonian)
    print(f"\npower-damped n=2 is {cls.kind}; closed-form escape from x0=1: {cls.escape_time(1.0)}")
    print("integrated escape time:", escape_detect(pre, 1.0, -1))


if __name__ == "__main__":
    main()
