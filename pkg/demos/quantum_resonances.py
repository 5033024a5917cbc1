"""Quantum counterparts: Bargmann oscillator, damped toy and the two-mode damped oscillator.

Run with ``python3 demos/quantum_resonances.py``.
"""

import sympy as sp

from koopres.quantum import (
    bargmann_oscillator,
    bargmann_state,
    commutator,
    correspondence_table,
    damped_ladders,
    damped_osc_eigencheck,
    eigenvalue_of,
    mu,
)

hbar, omega, gamma = sp.symbols("hbar omega gamma", positive=True)


def main():
    H = bargmann_oscillator(omega, hbar)
    for n in range(4):
        lam, res = eigenvalue_of(H, bargmann_state(n))
        print(f"z^{n}: eigenvalue {sp.factor(lam)}, residual zero: {res.is_zero}")

    (a1, a2) = damped_ladders()
    print("\n[a1, a2+] =", commutator(a1.lowering, a2.raising, 6).scalar)
    print("[a1, a1+] =", commutator(a1.lowering, a1.raising, 6).scalar)

    print("\ndamped oscillator levels at omega=1, gamma=1/2:")
    for n, k in [(0, 0), (1, 0), (0, 1), (2, 1)]:
        lam, res = damped_osc_eigencheck(n, k, 1, sp.Rational(1, 2))
        print(f"  (n,k)=({n},{k}): {lam}   mu_nk = {mu(n, k, 1, sp.Rational(1, 2))}   exact: {res.is_zero}")

    print("\nclassical vs quantum eigenvalues:")
    for row in correspondence_table(1, omega, gamma, hbar):
        print(f"  {row.system:18s} {row.classical_label:12s} {str(row.classical_eigenvalue):18s}"
              f" {row.quantum_label:10s} {sp.expand(row.quantum_eigenvalue)}")


if __name__ == "__main__":
    main()
