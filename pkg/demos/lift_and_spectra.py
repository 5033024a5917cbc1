"""Lift a vector field, build its Liouville generator and read off the spectrum.

Run with ``python3 demos/lift_and_spectra.py``.
"""

from koopres.lift import VectorField, lift_vector_field
from koopres.liouville import (
    GradedBasis,
    analytic_spectrum,
    build_liouville,
    compare_spectra,
    spectrum,
    to_complex_chart,
)
from koopres.presets import XP_CHART, Z4_CHART, damped_oscillator, harmonic


def main():
    # dx/dt = -x/2 lifts to H = -x p / 2 on (x, p)
    field = VectorField.from_strings(["x"], ["-0.5*x"], "toy")
    system = lift_vector_field(field)
    print("lifted Hamiltonian:", system.hamiltonian.to_text())
    print("phase-space field: ", [c.to_text() for c in system.phase_field])

    # the toy generator is diagonal on monomials x^n p^m
    report = spectrum(build_liouville(system.hamiltonian), GradedBasis(XP_CHART, 3))
    print("\ntoy eigenvalues (D=3):")
    for pair in report.eigenpairs:
        print(f"  {pair.value:+.3f}  x{pair.multiplicity}")

    # the oscillator is not diagonal in (x, p) but its spectrum is omega (n - m)
    osc = spectrum(build_liouville(harmonic(1).hamiltonian), GradedBasis(XP_CHART, 4))
    print("\noscillator vs closed form, D=4:", compare_spectra(osc, analytic_spectrum("harmonic", 4)))

    # damped oscillator: resonances omega (n+k-m-l) - i gamma (n+m-k-l)
    pre = damped_oscillator(1, 0.5)
    op = to_complex_chart(build_liouville(pre.hamiltonian), pre.complex_map)
    rep = spectrum(op, GradedBasis(Z4_CHART, 2))
    print("damped oscillator resonances, D=2:")
    print("  " + ", ".join(f"{v:.2f}" for v in sorted(set(rep.values.round(10)), key=lambda z: (z.real, z.imag))))


if __name__ == "__main__":
    main()
