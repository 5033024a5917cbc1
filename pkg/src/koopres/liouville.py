"""Koopman generators ``i L_H`` as first-order differential operators.

Convention: ``L_F(G) = {G, F}``, so ``i L_H`` carries ``+i dH/dp_k`` on
``d/dx^k`` and ``-i dH/dx^k`` on ``d/dp_k``.  An eigenpair ``i L_H f = lam f``
evolves as ``U(t) f = f o Phi_t = exp(-i lam t) f``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy as sp

from .errors import (
    ChartDomainError,
    ChartMismatchError,
    DegreeChangingError,
    EigensolverError,
    UnknownPresetError,
)
from .symbolic import (
    ComplexChartMap,
    CoordinateChart,
    ExpPoly,
    MultiPolynomial,
    as_coeff,
    exact,
    gaussian_dressing,
    substitute_linear,
    weighted_inner,
)

CLUSTER_TOL = 1e-8


class FirstOrderOperator:
    """``sum_i c_i(v) d/dv_i + c_0(v)`` with polynomial coefficients."""

    __slots__ = ("chart", "coeffs", "zeroth")

    def __init__(self, chart: CoordinateChart, coeffs: Mapping[str, MultiPolynomial] | None = None,
                 zeroth: MultiPolynomial | None = None):
        self.chart = chart
        clean = {}
        for name, c in (coeffs or {}).items():
            chart.index(name)
            if c.chart != chart:
                raise ChartMismatchError(f"coefficient of d/d{name} is on {c.chart}, operator on {chart}")
            if not c.is_zero:
                clean[name] = c
        self.coeffs = {n: clean[n] for n in chart.names if n in clean}
        self.zeroth = zeroth if zeroth is not None else MultiPolynomial.zero(chart)
        if self.zeroth.chart != chart:
            raise ChartMismatchError("zeroth-order term is on a different chart")

    def coefficient(self, name: str) -> MultiPolynomial:
        self.chart.index(name)
        return self.coeffs.get(name, MultiPolynomial.zero(self.chart))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs and self.zeroth.is_zero

    def __call__(self, f):
        return apply(self, f)

    def __add__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        if other.chart != self.chart:
            raise ChartMismatchError("operators on different charts")
        names = set(self.coeffs) | set(other.coeffs)
        return FirstOrderOperator(
            self.chart,
            {n: self.coefficient(n) + other.coefficient(n) for n in names},
            self.zeroth + other.zeroth,
        )

    def __mul__(self, c) -> "FirstOrderOperator":
        return FirstOrderOperator(self.chart, {n: v * c for n, v in self.coeffs.items()}, self.zeroth * c)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * -1

    def __eq__(self, other):
        if not isinstance(other, FirstOrderOperator):
            return NotImplemented
        return self.chart == other.chart and self.coeffs == other.coeffs and self.zeroth == other.zeroth

    def __hash__(self):
        return hash((self.chart, tuple(self.coeffs.items()), self.zeroth))

    def divergence(self) -> MultiPolynomial:
        out = MultiPolynomial.zero(self.chart)
        for name, c in self.coeffs.items():
            out = out + c.diff(name)
        return out

    def to_text(self) -> str:
        parts = [f"[{c.to_text()}]*d/d{n}" for n, c in self.coeffs.items()]
        if not self.zeroth.is_zero:
            parts.append(f"[{self.zeroth.to_text()}]")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"FirstOrderOperator({self.to_text()!r} on {self.chart})"


def build_liouville(H: MultiPolynomial, chart: CoordinateChart | None = None) -> FirstOrderOperator:
    """The Koopman generator ``i L_H`` of a polynomial Hamiltonian."""
    chart = chart or H.chart
    if H.chart != chart:
        raise ChartMismatchError(f"Hamiltonian chart {H.chart} differs from {chart}")
    if not chart.is_canonical:
        raise ChartMismatchError(f"{chart} is not a canonical chart")
    coeffs = {}
    for x, p in zip(chart.base_names, chart.momentum_names):
        coeffs[x] = H.diff(p) * sp.I
        coeffs[p] = H.diff(x) * (-sp.I)
    return FirstOrderOperator(chart, coeffs)


def apply(op: FirstOrderOperator, f):
    """Exact action on an ExpPoly (or MultiPolynomial, returned as ExpPoly)."""
    f = ExpPoly.coerce(f, op.chart)
    if f.chart != op.chart:
        raise ChartMismatchError(f"operator on {op.chart}, function on {f.chart}")
    out = f * op.zeroth
    for name, c in op.coeffs.items():
        out = out + f.diff(name) * c
    return out


def to_complex_chart(op: FirstOrderOperator, chart_map: ComplexChartMap) -> FirstOrderOperator:
    """Rewrite the operator in the target coordinates of an affine map.

    The new coefficient of ``d/dw`` is ``op(w)`` expressed in the new chart.
    """
    if op.chart != chart_map.source:
        raise ChartMismatchError(f"operator on {op.chart}, map from {chart_map.source}")
    vector_part = FirstOrderOperator(op.chart, op.coeffs)
    coeffs = {}
    for w in chart_map.target.names:
        image = apply(vector_part, chart_map.forward[w]).as_poly()
        coeffs[w] = substitute_linear(image, chart_map)
    return FirstOrderOperator(chart_map.target, coeffs, substitute_linear(op.zeroth, chart_map))


# ---------------------------------------------------------------------------
# graded bases and matrices
# ---------------------------------------------------------------------------


def monomials_of_degree(dim: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of total ``degree`` in ascending lexicographic order."""
    out = []
    for combo in combinations_with_replacement(range(dim), degree):
        e = [0] * dim
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out)


@dataclass(frozen=True)
class GradedBasis:
    """Monomials up to ``max_degree``, grouped by degree, graded-lex ordered.

    With ``dressed`` each element carries the Gaussian factor
    ``exp(-sum |v|^2 / 2)``; matrices are always built on the bare monomials.
    """

    chart: CoordinateChart
    max_degree: int
    dressed: bool = False

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be non-negative")

    @property
    def elements(self) -> list[tuple[int, ...]]:
        out = []
        for d in range(self.max_degree + 1):
            out.extend(monomials_of_degree(self.chart.dim, d))
        return out

    def block(self, degree: int) -> list[tuple[int, ...]]:
        return monomials_of_degree(self.chart.dim, degree)

    def block_slices(self) -> dict[int, slice]:
        out, start = {}, 0
        for d in range(self.max_degree + 1):
            size = math.comb(d + self.chart.dim - 1, self.chart.dim - 1)
            out[d] = slice(start, start + size)
            start += size
        return out

    def __len__(self):
        return math.comb(self.max_degree + self.chart.dim, self.chart.dim)

    def index(self, exps: Sequence[int]) -> int:
        return self.elements.index(tuple(exps))

    def monomial(self, exps: Sequence[int]) -> MultiPolynomial:
        return MultiPolynomial.monomial(self.chart, exps)

    def element(self, exps: Sequence[int]) -> ExpPoly:
        f = ExpPoly.from_poly(self.monomial(exps))
        return f * gaussian_dressing(self.chart) if self.dressed else f

    def label(self, exps: Sequence[int]) -> str:
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(self.chart.names, exps) if e]
        return "*".join(factors) or "1"

    def to_poly(self, vector: Sequence[complex]) -> MultiPolynomial:
        terms = {e: complex(c) for e, c in zip(self.elements, vector) if abs(c) > 0}
        return MultiPolynomial(self.chart, terms)

    def evaluate(self, points) -> np.ndarray:
        """Matrix of bare monomial values, shape ``(..., len(basis))``."""
        pts = np.asarray(points)
        exps = np.array(self.elements, dtype=int)
        return np.prod(pts[..., None, :] ** exps, axis=-1)

    def metadata(self) -> dict:
        return {"chart": self.chart.to_json(), "D": self.max_degree, "dressed": self.dressed,
                "size": len(self)}


def matrix_on_basis(op: FirstOrderOperator, basis: GradedBasis) -> dict[int, np.ndarray]:
    """One dense complex matrix per degree block.

    ``M[t, s]`` is the coefficient of monomial ``t`` in ``op(monomial s)``, so
    coefficient vectors transform as ``c -> M c``.
    """
    if op.chart != basis.chart:
        raise ChartMismatchError(f"operator on {op.chart}, basis on {basis.chart}")
    blocks = {}
    for d in range(basis.max_degree + 1):
        mons = basis.block(d)
        pos = {e: i for i, e in enumerate(mons)}
        M = np.zeros((len(mons), len(mons)), dtype=complex)
        for s, e in enumerate(mons):
            image = apply(op, basis.monomial(e))
            if not image.is_polynomial:
                raise DegreeChangingError(f"operator maps {basis.label(e)} outside the polynomials", basis.label(e))
            image = image.as_poly()
            if image.is_zero:
                continue
            if not image.is_homogeneous(d):
                deg = image.degree
                kind = "degree-raising" if deg > d else "degree-lowering"
                raise DegreeChangingError(
                    f"{kind} operator: {basis.label(e)} (degree {d}) is mapped to degree {deg}",
                    basis.label(e),
                    deg,
                )
            exps, coeffs = image.numeric()
            for t, c in zip(map(tuple, exps), coeffs):
                M[pos[t], s] = c
        blocks[d] = M
    return blocks


def block_csv(block: np.ndarray, basis: GradedBasis, degree: int) -> str:
    """One degree block as CSV: header of source labels, one row per target monomial."""
    labels = [basis.label(e) for e in basis.block(degree)]
    lines = ["target," + ",".join(labels)]
    for lbl, row in zip(labels, block):
        lines.append(lbl + "," + ",".join(repr(complex(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


@dataclass
class Eigenpair:
    value: complex
    multiplicity: int
    vectors: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    exact: sp.Expr | None = None


@dataclass
class SpectrumReport:
    """Eigenvalues with multiplicities, sorted by (real, imag)."""

    eigenpairs: list[Eigenpair]
    method: str
    system: str = ""
    basis: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenpairs.sort(key=lambda ep: (round(ep.value.real, 9), round(ep.value.imag, 9)))

    @property
    def values(self) -> np.ndarray:
        """Eigenvalue multiset, repeated by multiplicity."""
        out = []
        for ep in self.eigenpairs:
            out.extend([ep.value] * ep.multiplicity)
        return np.array(out, dtype=complex)

    @property
    def total_multiplicity(self) -> int:
        return sum(ep.multiplicity for ep in self.eigenpairs)

    def multiplicity_of(self, value: complex, tol: float = CLUSTER_TOL) -> int:
        return sum(ep.multiplicity for ep in self.eigenpairs if abs(ep.value - value) <= tol)

    def to_json(self) -> dict:
        out = {
            "system": self.system,
            "D": self.basis.get("D"),
            "method": self.method,
            "eigenvalues": [
                {
                    "re": float(ep.value.real),
                    "im": float(ep.value.imag),
                    "multiplicity": int(ep.multiplicity),
                    "labels": [str(lbl) for lbl in ep.labels],
                }
                for ep in self.eigenpairs
            ],
        }
        out.update(self.metadata)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: Mapping | str) -> "SpectrumReport":
        if isinstance(data, str):
            data = json.loads(data)
        known = {"system", "D", "method", "eigenvalues"}
        pairs = [
            Eigenpair(complex(e["re"], e["im"]), int(e["multiplicity"]), [], list(e.get("labels", [])))
            for e in data["eigenvalues"]
        ]
        return cls(pairs, data["method"], data.get("system", ""), {"D": data.get("D")},
                   {k: v for k, v in data.items() if k not in known})


def cluster_eigenvalues(values: Sequence[complex], tol: float = CLUSTER_TOL) -> list[list[int]]:
    """Group indices whose eigenvalues lie within ``tol`` of a cluster's first member."""
    clusters: list[list[int]] = []
    reps: list[complex] = []
    for i, v in enumerate(values):
        for k, r in enumerate(reps):
            if abs(v - r) <= tol:
                clusters[k].append(i)
                break
        else:
            clusters.append([i])
            reps.append(v)
    return clusters


def compare_spectra(a, b) -> float:
    """Max eigenvalue deviation under the best one-to-one matching of the multisets.

    Returns ``inf`` when total multiplicities differ.
    """
    from scipy.optimize import linear_sum_assignment

    va = a.values if isinstance(a, SpectrumReport) else np.asarray(a, dtype=complex)
    vb = b.values if isinstance(b, SpectrumReport) else np.asarray(b, dtype=complex)
    if len(va) != len(vb):
        return math.inf
    if not len(va):
        return 0.0
    cost = np.abs(va[:, None] - vb[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def spectrum(op: FirstOrderOperator, basis: GradedBasis, system: str = "",
             tol: float = CLUSTER_TOL) -> SpectrumReport:
    """Eigen-decompose every degree block and merge clusters across blocks."""
    blocks = matrix_on_basis(op, basis)
    slices = basis.block_slices()
    elements = basis.elements
    values, vectors = [], []
    for d, M in blocks.items():
        try:
            w, V = np.linalg.eig(M)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"eigensolver failed on degree block {d}: {exc}", d) from exc
        if not np.all(np.isfinite(w)):
            raise EigensolverError(f"non-finite eigenvalues in degree block {d}", d)
        for k in range(len(w)):
            full = np.zeros(len(elements), dtype=complex)
            full[slices[d]] = V[:, k]
            values.append(complex(w[k]))
            vectors.append(full)
    pairs = []
    for idx in cluster_eigenvalues(values, tol):
        value = complex(np.mean([values[i] for i in idx]))
        vecs = [vectors[i] for i in idx]
        labels = [basis.label(elements[int(np.argmax(np.abs(v)))]) for v in vecs]
        pairs.append(Eigenpair(value, len(idx), vecs, labels))
    return SpectrumReport(pairs, "matrix", system, basis.metadata())


def _graded_indices(dim: int, D: int):
    for d in range(D + 1):
        yield from monomials_of_degree(dim, d)


ANALYTIC_PRESETS = ("harmonic", "damped-toy", "damped-oscillator")


def analytic_eigenvalue(preset: str, index: Sequence[int], omega=1, gamma=1) -> sp.Expr:
    """Closed-form eigenvalue of ``i L_H`` on the monomial with exponents ``index``.

    harmonic ``f_nm = z^n zb^m``: ``omega (n - m)``;
    damped-toy ``g_nm = x^n p^m``: ``i gamma (m - n)``;
    damped-oscillator ``f_nmkl``: ``omega (n+k-m-l) - i gamma (n+m-k-l)``.
    """
    w, g = exact(omega), exact(gamma)
    if preset == "harmonic":
        n, m = index
        return as_coeff(w * (n - m))
    if preset == "damped-toy":
        n, m = index
        return as_coeff(sp.I * g * (m - n))
    if preset == "damped-oscillator":
        n, m, k, l = index
        return as_coeff(w * (n + k - m - l) - sp.I * g * (n + m - k - l))
    raise UnknownPresetError(f"no closed-form spectrum for {preset!r}; known: {ANALYTIC_PRESETS}")


def analytic_basis(preset: str, D: int) -> GradedBasis:
    from .presets import XP_CHART, Z4_CHART, Z_CHART

    charts = {"harmonic": Z_CHART, "damped-toy": XP_CHART, "damped-oscillator": Z4_CHART}
    if preset not in charts:
        raise UnknownPresetError(f"no closed-form spectrum for {preset!r}; known: {ANALYTIC_PRESETS}")
    return GradedBasis(charts[preset], D)


def analytic_label(preset: str, index: Sequence[int]) -> str:
    prefix = "g" if preset == "damped-toy" else "f"
    return f"{prefix}_{{{','.join(map(str, index))}}}"


def analytic_spectrum(preset: str, D: int, omega=1, gamma=1) -> SpectrumReport:
    """Enumerate the closed-form eigenvalues over all indices of total degree <= D."""
    basis = analytic_basis(preset, D)
    elements = basis.elements
    groups: dict[sp.Expr, list[int]] = {}
    for i, idx in enumerate(elements):
        lam = analytic_eigenvalue(preset, idx, omega, gamma)
        groups.setdefault(lam, []).append(i)
    pairs = []
    for lam, members in groups.items():
        vecs = []
        for i in members:
            v = np.zeros(len(elements), dtype=complex)
            v[i] = 1
            vecs.append(v)
        labels = [analytic_label(preset, elements[i]) for i in members]
        pairs.append(Eigenpair(complex(sp.N(lam)), len(members), vecs, labels, lam))
    return SpectrumReport(pairs, "analytic", preset, basis.metadata())


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def oscillator_state(n: int, m: int) -> ExpPoly:
    """Normalised ``f_nm = z^n zb^m exp(-|z|^2 / 2) / sqrt(pi (n+m)!)`` on (z, zb)."""
    from .presets import Z_CHART

    z, zb = MultiPolynomial.var(Z_CHART, "z"), MultiPolynomial.var(Z_CHART, "zb")
    amp = z**n * zb**m / sp.sqrt(sp.pi * sp.factorial(n + m))
    return ExpPoly.from_poly(amp) * gaussian_dressing(Z_CHART)


def selfadjointness_residual(op: FirstOrderOperator, f, g) -> sp.Expr:
    """``<f, op g> - <op f, g>`` by exact Gaussian moments."""
    return as_coeff(weighted_inner(f, apply(op, g)) - weighted_inner(apply(op, f), g))


def distributional_eigencheck(op: FirstOrderOperator, f, pin: Mapping[str, complex], eigenvalue) -> ExpPoly:
    """Residual ``(op f - lam f)`` restricted to the support ``pin`` of a delta factor.

    For ``f = delta(p - k) exp(-i k.x)`` only the plane-wave factor is passed;
    the delta is accounted for by pinning ``p = k`` after differentiation.
    """
    f = ExpPoly.coerce(f, op.chart)
    residual = apply(op, f) - f * as_coeff(eigenvalue)
    return residual.subs({name: as_coeff(v) for name, v in pin.items()})


def _scaling_pair(chart: CoordinateChart, pair: tuple[str, str] | None) -> tuple[str, str]:
    if pair is not None:
        X, P = pair
        if X not in chart.base_names or P not in chart.momentum_names or \
                chart.base_names.index(X) != chart.momentum_names.index(P):
            raise ChartMismatchError(f"{pair} is not a canonical pair of {chart}")
        return X, P
    if chart.n != 1:
        raise ChartMismatchError(f"complex scaling needs a designated (X, P) pair; chart is {chart}")
    return chart.base_names[0], chart.momentum_names[0]


def complex_scale(target, lam, pair: tuple[str, str] | None = None):
    """Apply ``V_lam``: ``X -> exp(-i lam) X``, ``P -> exp(i lam) P``.

    Polynomials are substituted.  Operators are conjugated, ``V op V^-1``,
    so that ``complex_scale(build_liouville(H)) == build_liouville(complex_scale(H))``.
    """
    X, P = _scaling_pair(target.chart, pair)
    lam = as_coeff(lam)
    sx, sp_ = as_coeff(sp.exp(-sp.I * lam)), as_coeff(sp.exp(sp.I * lam))
    chart = target.chart
    images = {X: MultiPolynomial.var(chart, X) * sx, P: MultiPolynomial.var(chart, P) * sp_}
    if isinstance(target, (MultiPolynomial, ExpPoly)):
        return target.subs(images)
    if isinstance(target, FirstOrderOperator):
        # chain rule: d/dX picks up 1/sx, d/dP picks up 1/sp
        factor = {X: as_coeff(1 / sx), P: as_coeff(1 / sp_)}
        coeffs = {n: c.subs(images) * factor.get(n, 1) for n, c in target.coeffs.items()}
        return FirstOrderOperator(chart, coeffs, target.zeroth.subs(images))
    raise TypeError(f"cannot scale {type(target).__name__}")


def _evaluate(f, pts):
    return ExpPoly.coerce(f).evaluate(pts)


def representation_check(preset, f, points=None, *, n_points: int = 100, h: float = 1e-4,
                         seed: int = 0) -> float:
    """Compare ``i L_H f`` with ``i omega d f/d phi`` (harmonic) or ``i gamma d f/d chi``.

    Polar: ``x = r cos phi``, ``p = -r sin phi`` (the orientation of the flow).
    Hyperbolic, damped toy in (X, P): ``P = s cosh chi``, ``X = s sinh chi``,
    valid only for ``|P| > |X|``.  ``points`` are chart points; by default
    ``n_points`` are drawn from the valid domain.
    """
    from .presets import get_preset

    if isinstance(preset, str):
        preset = get_preset("damped-toy-xp" if preset == "damped-toy" else preset)
    name = preset.name
    if name not in ("harmonic", "damped-toy-xp"):
        raise UnknownPresetError(f"no polar/hyperbolic representation for {name!r}")
    op = build_liouville(preset.hamiltonian)
    f = ExpPoly.coerce(f, preset.chart)
    rng = np.random.default_rng(seed)
    if name == "harmonic":
        rate = float(preset.params["omega"])
        if points is None:
            r = rng.uniform(0.5, 2.0, n_points)
            phi = rng.uniform(0, 2 * np.pi, n_points)
        else:
            pts = np.asarray(points, dtype=float)
            r = np.hypot(pts[:, 0], pts[:, 1])
            if np.any(r < 1e-8):
                raise ChartDomainError("polar chart excludes the origin")
            phi = np.arctan2(-pts[:, 1], pts[:, 0])

        def chart_point(param):
            return np.stack([r * np.cos(param), -r * np.sin(param)], axis=-1)

        param = phi
    else:
        rate = float(preset.params["gamma"])
        if points is None:
            s = rng.uniform(0.5, 2.0, n_points) * rng.choice([-1.0, 1.0], n_points)
            chi = rng.uniform(-1.5, 1.5, n_points)
        else:
            pts = np.asarray(points, dtype=float)
            X, P = pts[:, 0], pts[:, 1]
            if np.any(np.abs(P) <= np.abs(X)):
                raise ChartDomainError("hyperbolic chart covers only |P| > |X|")
            s = np.sign(P) * np.sqrt(P**2 - X**2)
            chi = np.arctanh(X / P)

        def chart_point(param):
            return np.stack([s * np.sinh(param), s * np.cosh(param)], axis=-1)

        param = chi
    pts = chart_point(param)
    lhs = _evaluate(apply(op, f), pts)
    dparam = (_evaluate(f, chart_point(param + h)) - _evaluate(f, chart_point(param - h))) / (2 * h)
    rhs = 1j * rate * dparam
    return float(np.max(np.abs(lhs - rhs))) if len(lhs) else 0.0


@dataclass(frozen=True)
class Completeness:
    """Outcome of matching ``H = -gamma x^n p``."""

    kind: str  # "complete", "incomplete" or "unclassified"
    n: int | None = None
    gamma: sp.Expr | None = None
    law: str = ""

    def escape_time(self, x0: float) -> float | None:
        """Finite escape time of ``dx/dt = -gamma x^n`` from ``x0`` (signed), or None."""
        if self.kind != "incomplete" or x0 == 0:
            return None
        g = float(self.gamma)
        n = self.n
        # x(t)^(1-n) = x0^(1-n) + (n-1) gamma t blows up when the right side hits 0
        t_star = -(x0 ** (1 - n)) / ((n - 1) * g)
        return float(t_star)


def completeness_classify(H: MultiPolynomial) -> Completeness:
    chart = H.chart
    if not chart.is_canonical or chart.n != 1 or len(H) != 1:
        return Completeness("unclassified")
    (exps, c), = H.items()
    n, m = exps
    if m != 1 or n < 1:
        return Completeness("unclassified")
    gamma = as_coeff(-c)
    if n == 1:
        return Completeness("complete", 1, gamma, "x(t) = x0 exp(-gamma t), defined for all t")
    law = (f"x(t) = x0 / (1 + {n - 1} gamma x0^{n - 1} t)^(1/{n - 1}); "
           f"escape at t* = -1 / ({n - 1} gamma x0^{n - 1})")
    return Completeness("incomplete", n, gamma, law)
