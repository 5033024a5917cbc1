"""Catalog of the standard systems and their complex coordinate charts.

Keys: ``harmonic``, ``damped-toy``, ``damped-toy-xp``, ``power-damped:n``,
``damped-oscillator``, ``free-particle``.  Parameters default to 1 and are
stored as exact sympy numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .errors import UnknownPresetError
from .lift import HamiltonianSystem, VectorField, lift_vector_field
from .symbolic import ComplexChartMap, CoordinateChart, MultiPolynomial, exact

PRESET_NAMES = ("harmonic", "damped-toy", "damped-toy-xp", "power-damped:n", "damped-oscillator", "free-particle")

XP_CHART = CoordinateChart.canonical(("x",), ("p",))
ROTATED_CHART = CoordinateChart.canonical(("X",), ("P",))
Z_CHART = CoordinateChart.plain(("z", "zb"), (("z", "zb"),))
Z4_CHART = CoordinateChart.plain(("z1", "z1b", "z2", "z2b"), (("z1", "z1b"), ("z2", "z2b")))
OSC4_CHART = CoordinateChart.canonical(("x1", "x2"), ("p1", "p2"))


@dataclass(frozen=True)
class Preset:
    name: str
    system: HamiltonianSystem
    params: dict = field(default_factory=dict)
    field: VectorField | None = None
    complex_map: ComplexChartMap | None = None

    @property
    def chart(self) -> CoordinateChart:
        return self.system.chart

    @property
    def hamiltonian(self) -> MultiPolynomial:
        return self.system.hamiltonian

    def numeric_params(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.params.items()}


def _v(chart, name):
    return MultiPolynomial.var(chart, name)


def oscillator_complex_map() -> ComplexChartMap:
    """``z = x + i p``, ``zb = x - i p``."""
    x, p = _v(XP_CHART, "x"), _v(XP_CHART, "p")
    return ComplexChartMap.from_forward(XP_CHART, Z_CHART, {"z": x + sp.I * p, "zb": x - sp.I * p})


def damped_oscillator_complex_map() -> ComplexChartMap:
    """``z1 = x1 + i x2``, ``z2 = i (p1 + i p2)`` and their conjugates."""
    c = OSC4_CHART
    x1, x2, p1, p2 = (_v(c, n) for n in c.names)
    fwd = {
        "z1": x1 + sp.I * x2,
        "z1b": x1 - sp.I * x2,
        "z2": sp.I * (p1 + sp.I * p2),
        "z2b": -sp.I * (p1 - sp.I * p2),
    }
    return ComplexChartMap.from_forward(c, Z4_CHART, fwd)


def light_cone_rotation() -> ComplexChartMap:
    """``x = (X + P)/sqrt 2``, ``p = (X - P)/sqrt 2`` as a map from (x, p) to (X, P)."""
    X, P = _v(ROTATED_CHART, "X"), _v(ROTATED_CHART, "P")
    r = 1 / sp.sqrt(2)
    inverse = {"x": (X + P) * r, "p": (X - P) * r}
    x, p = _v(XP_CHART, "x"), _v(XP_CHART, "p")
    forward = {"X": (x + p) * r, "P": (x - p) * r}
    return ComplexChartMap(XP_CHART, ROTATED_CHART, forward, inverse)


def harmonic(omega=1) -> Preset:
    w = exact(omega)
    x, p = _v(XP_CHART, "x"), _v(XP_CHART, "p")
    H = (x**2 + p**2) * (w / 2)
    return Preset("harmonic", HamiltonianSystem.from_hamiltonian(H, "harmonic"), {"omega": w},
                  None, oscillator_complex_map())


def damped_toy(gamma=1) -> Preset:
    g = exact(gamma)
    X = VectorField(("x",), (_v(CoordinateChart.plain(("x",)), "x") * (-g),), "damped-toy")
    return Preset("damped-toy", lift_vector_field(X), {"gamma": g}, X)


def damped_toy_xp(gamma=1) -> Preset:
    """Damped toy after the light-cone rotation: ``H = (gamma/2)(P^2 - X^2)``."""
    g = exact(gamma)
    X, P = _v(ROTATED_CHART, "X"), _v(ROTATED_CHART, "P")
    H = (P**2 - X**2) * (g / 2)
    return Preset("damped-toy-xp", HamiltonianSystem.from_hamiltonian(H, "damped-toy-xp"), {"gamma": g})


def power_damped(n: int, gamma=1) -> Preset:
    if n < 1:
        raise ValueError("power-damped needs n >= 1")
    g = exact(gamma)
    base = CoordinateChart.plain(("x",))
    X = VectorField(("x",), (_v(base, "x") ** n * (-g),), f"power-damped:{n}")
    return Preset(f"power-damped:{n}", lift_vector_field(X), {"gamma": g, "n": sp.Integer(n)}, X)


def damped_oscillator(omega=1, gamma=1) -> Preset:
    w, g = exact(omega), exact(gamma)
    base = CoordinateChart.plain(("x1", "x2"))
    x1, x2 = _v(base, "x1"), _v(base, "x2")
    X = VectorField(("x1", "x2"), (x1 * (-g) + x2 * w, x1 * (-w) - x2 * g), "damped-oscillator")
    return Preset("damped-oscillator", lift_vector_field(X), {"omega": w, "gamma": g}, X,
                  damped_oscillator_complex_map())


def free_particle(mass=1, dim: int = 3) -> Preset:
    m = exact(mass)
    base = tuple(f"x{k}" for k in range(1, dim + 1))
    mom = tuple(f"p{k}" for k in range(1, dim + 1))
    chart = CoordinateChart.canonical(base, mom)
    H = MultiPolynomial.zero(chart)
    for pk in mom:
        H = H + _v(chart, pk) ** 2
    H = H / (2 * m)
    return Preset("free-particle", HamiltonianSystem.from_hamiltonian(H, "free-particle"), {"mass": m})


def get_preset(name: str, *, omega=1, gamma=1, mass=1) -> Preset:
    """Look up a preset by catalog key; ``power-damped:3`` carries its exponent."""
    if name == "harmonic":
        return harmonic(omega)
    if name == "damped-toy":
        return damped_toy(gamma)
    if name == "damped-toy-xp":
        return damped_toy_xp(gamma)
    if name == "damped-oscillator":
        return damped_oscillator(omega, gamma)
    if name == "free-particle":
        return free_particle(mass)
    if name.startswith("power-damped"):
        _, _, n = name.partition(":")
        if not n.isdigit():
            raise UnknownPresetError(f"power-damped preset needs an exponent, e.g. 'power-damped:2' (got {name!r})")
        return power_damped(int(n), gamma)
    raise UnknownPresetError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
