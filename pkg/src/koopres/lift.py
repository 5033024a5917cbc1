"""Hamiltonian lift of polynomial vector fields to the cotangent bundle.

A first-order system ``dx/dt = X(x)`` on configuration space becomes the
Hamiltonian system with ``H(x, p) = sum_k p_k X^k(x)``; its position
equations reproduce ``X`` and its momentum equations are the adjoint
(co-tangent) linearisation ``dp_k/dt = -sum_l p_l dX^l/dx^k``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ChartMismatchError
from .grammar import parse_polynomial
from .symbolic import CoordinateChart, MultiPolynomial, poisson_bracket


def momentum_name(base: str) -> str:
    """``x -> p``, ``x1 -> p1``, ``q -> p_q``."""
    if base == "x":
        return "p"
    if base.startswith("x") and base[1:].isdigit():
        return "p" + base[1:]
    return "p_" + base


@dataclass(frozen=True)
class VectorField:
    """Polynomial vector field on configuration space."""

    base_names: tuple[str, ...]
    components: tuple[MultiPolynomial, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base_names", tuple(self.base_names))
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != len(self.base_names):
            raise ValueError(
                f"{len(self.components)} components for {len(self.base_names)} base coordinates"
            )
        chart = self.chart
        for comp in self.components:
            if comp.chart != chart:
                raise ChartMismatchError(
                    f"component chart {comp.chart} is not the base chart {chart}; "
                    "components may not involve momenta"
                )

    @property
    def chart(self) -> CoordinateChart:
        return CoordinateChart.plain(self.base_names)

    @property
    def dim(self) -> int:
        return len(self.base_names)

    @classmethod
    def from_strings(cls, base_names: Sequence[str], components: Sequence[str], name: str = "") -> "VectorField":
        chart = CoordinateChart.plain(base_names)
        return cls(tuple(base_names), tuple(parse_polynomial(c, chart) for c in components), name)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.base_names, tuple(a + b for a, b in zip(self.components, other.components)))

    def __mul__(self, c) -> "VectorField":
        return VectorField(self.base_names, tuple(a * c for a in self.components), self.name)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "base_coords": list(self.base_names),
            "components": [c.to_text() for c in self.components],
        }

    @classmethod
    def from_json(cls, data: Mapping | str) -> "VectorField":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_strings(data["base_coords"], data["components"], data.get("name", ""))


@dataclass(frozen=True)
class HamiltonianSystem:
    """Hamiltonian with its Hamilton-equation right-hand sides.

    ``phase_field`` lists ``{x^k, H}`` for each base coordinate followed by
    ``{p_k, H}`` for each momentum.
    """

    chart: CoordinateChart
    hamiltonian: MultiPolynomial
    phase_field: tuple[MultiPolynomial, ...]
    name: str = ""

    def __post_init__(self):
        if self.hamiltonian.chart != self.chart:
            raise ChartMismatchError("Hamiltonian is not on the system chart")
        if len(self.phase_field) != self.chart.dim:
            raise ValueError("phase field must have one component per phase-space coordinate")

    @classmethod
    def from_hamiltonian(cls, H: MultiPolynomial, name: str = "") -> "HamiltonianSystem":
        return cls(H.chart, H, tuple(hamilton_equations(H, H.chart)), name)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def is_consistent(self) -> bool:
        return tuple(hamilton_equations(self.hamiltonian, self.chart)) == self.phase_field

    @property
    def is_linear(self) -> bool:
        return all(c.is_zero or c.is_homogeneous(1) for c in self.phase_field)

    def divergence(self) -> MultiPolynomial:
        out = MultiPolynomial.zero(self.chart)
        for name, comp in zip(self.chart.names, self.phase_field):
            out = out + comp.diff(name)
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "chart": self.chart.to_json(),
            "hamiltonian": self.hamiltonian.to_text(),
            "equations": {
                name: comp.to_text() for name, comp in zip(self.chart.names, self.phase_field)
            },
        }


def cotangent_chart(base_names: Sequence[str]) -> CoordinateChart:
    return CoordinateChart.canonical(tuple(base_names), tuple(momentum_name(b) for b in base_names))


def lift_vector_field(X: VectorField) -> HamiltonianSystem:
    """``H = sum_k p_k X^k(x)`` on ``T*Q`` together with its Hamilton equations."""
    chart = cotangent_chart(X.base_names)
    embed = {b: MultiPolynomial.var(chart, b) for b in X.base_names}
    H = MultiPolynomial.zero(chart)
    for p, comp in zip(chart.momentum_names, X.components):
        H = H + MultiPolynomial.var(chart, p) * comp.subs(embed, chart)
    return HamiltonianSystem(chart, H, tuple(hamilton_equations(H, chart)), X.name)


def hamilton_equations(H: MultiPolynomial, chart: CoordinateChart) -> list[MultiPolynomial]:
    """Right-hand sides ``{x^k, H}`` then ``{p_k, H}``."""
    if H.chart != chart:
        raise ChartMismatchError(f"Hamiltonian chart {H.chart} differs from {chart}")
    return [poisson_bracket(MultiPolynomial.var(chart, n), H) for n in chart.names]


def momentum_dual_field(X: VectorField) -> list[MultiPolynomial]:
    """``dp_k/dt = -sum_l p_l dX^l/dx^k``, computed directly from the components."""
    chart = cotangent_chart(X.base_names)
    embed = {b: MultiPolynomial.var(chart, b) for b in X.base_names}
    lifted = [c.subs(embed, chart) for c in X.components]
    out = []
    for xk in X.base_names:
        acc = MultiPolynomial.zero(chart)
        for pl, Xl in zip(chart.momentum_names, lifted):
            acc = acc - MultiPolynomial.var(chart, pl) * Xl.diff(xk)
        out.append(acc)
    return out


def base_projection(system: HamiltonianSystem) -> list[MultiPolynomial]:
    """Position block of the phase field, restricted back to the base chart."""
    base = CoordinateChart.plain(system.chart.base_names)
    n = len(system.chart.base_names)
    out = []
    for comp in system.phase_field[:n]:
        if comp.degree_in(system.chart.momentum_names) > 0:
            raise ValueError("position equations depend on momenta; not a lifted system")
        out.append(
            MultiPolynomial(base, {e[:n]: c for e, c in comp.items()})
        )
    return out
