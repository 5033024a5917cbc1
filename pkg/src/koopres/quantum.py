"""Quantum counterparts: Bargmann oscillator, damped toy, damped oscillator.

Operators are finite-order differential operators with polynomial
coefficients, stored in normal order (coefficient to the left of the
derivative) and composed with the Leibniz rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from .errors import ChartMismatchError
from .liouville import (
    Eigenpair,
    SpectrumReport,
    apply as apply_classical,
    build_liouville,
    monomials_of_degree,
    to_complex_chart,
)
from .symbolic import (
    CoordinateChart,
    ExpPoly,
    MultiPolynomial,
    as_coeff,
    exact,
    gaussian_dressing,
    weighted_inner,
)

Z1_CHART = CoordinateChart.plain(("z", "zb"), (("z", "zb"),))
X1_CHART = CoordinateChart.plain(("x",))
P1_CHART = CoordinateChart.plain(("p",))
XY_CHART = CoordinateChart.plain(("x", "y"))
HOLO2_CHART = CoordinateChart.plain(("z1", "z2"))


class QuantumOperator:
    """``sum_alpha c_alpha(v) d^alpha`` acting on functions of the chart coordinates."""

    __slots__ = ("chart", "terms", "hbar")

    def __init__(self, chart: CoordinateChart, terms: Mapping[Sequence[int], MultiPolynomial] | None = None,
                 hbar=1):
        self.chart = chart
        self.hbar = as_coeff(hbar)
        clean: dict[tuple[int, ...], MultiPolynomial] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != chart.dim or any(a < 0 for a in alpha):
                raise ValueError(f"bad derivative multi-index {alpha}")
            if not isinstance(c, MultiPolynomial):
                c = MultiPolynomial.const(chart, c)
            if c.chart != chart:
                raise ChartMismatchError(f"coefficient on {c.chart}, operator on {chart}")
            clean[alpha] = clean[alpha] + c if alpha in clean else c
        self.terms = {a: c for a, c in sorted(clean.items()) if not c.is_zero}

    # -- constructors ------------------------------------------------------
    @classmethod
    def multiply(cls, poly: MultiPolynomial, hbar=1) -> "QuantumOperator":
        return cls(poly.chart, {(0,) * poly.chart.dim: poly}, hbar)

    @classmethod
    def scalar(cls, chart, c, hbar=1) -> "QuantumOperator":
        return cls.multiply(MultiPolynomial.const(chart, c), hbar)

    @classmethod
    def derivative(cls, chart, name: str, order: int = 1, hbar=1) -> "QuantumOperator":
        alpha = [0] * chart.dim
        alpha[chart.index(name)] = order
        return cls(chart, {tuple(alpha): MultiPolynomial.const(chart, 1)}, hbar)

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    # -- algebra -----------------------------------------------------------
    def _check(self, other: "QuantumOperator"):
        if other.chart != self.chart:
            raise ChartMismatchError(f"operators on {self.chart} and {other.chart}")

    def __add__(self, other):
        if not isinstance(other, QuantumOperator):
            other = QuantumOperator.scalar(self.chart, other, self.hbar)
        self._check(other)
        merged = dict(self.terms)
        for a, c in other.terms.items():
            merged[a] = merged[a] + c if a in merged else c
        return QuantumOperator(self.chart, merged, self.hbar)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other if isinstance(other, QuantumOperator) else -as_coeff(other))

    def __mul__(self, other):
        if isinstance(other, QuantumOperator):
            return self.compose(other)
        return QuantumOperator(self.chart, {a: c * other for a, c in self.terms.items()}, self.hbar)

    def __rmul__(self, other):
        return QuantumOperator(self.chart, {a: c * other for a, c in self.terms.items()}, self.hbar)

    def __matmul__(self, other):
        return self.compose(other)

    def compose(self, other: "QuantumOperator") -> "QuantumOperator":
        """``self o other`` in normal order: ``d^a (c g) = sum_b C(a,b) d^b c d^(a-b) g``."""
        self._check(other)
        out: dict[tuple[int, ...], MultiPolynomial] = {}
        for alpha, c1 in self.terms.items():
            for beta, c2 in other.terms.items():
                for gamma in product(*(range(a + 1) for a in alpha)):
                    dc2 = c2
                    for name, k in zip(self.chart.names, gamma):
                        for _ in range(k):
                            dc2 = dc2.diff(name)
                    if dc2.is_zero:
                        continue
                    weight = math.prod(math.comb(a, g) for a, g in zip(alpha, gamma))
                    key = tuple(a - g + b for a, g, b in zip(alpha, gamma, beta))
                    term = c1 * dc2 * weight
                    out[key] = out[key] + term if key in out else term
        return QuantumOperator(self.chart, out, self.hbar)

    def __pow__(self, k: int):
        result = QuantumOperator.scalar(self.chart, 1, self.hbar)
        for _ in range(k):
            result = result.compose(self)
        return result

    def __eq__(self, other):
        if not isinstance(other, QuantumOperator):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, tuple(self.terms.items())))

    def __call__(self, f):
        return apply_quantum(self, f)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.terms.items():
            d = "*".join(f"d{n}" if k == 1 else f"d{n}^{k}" for n, k in zip(self.chart.names, alpha) if k)
            parts.append(f"[{c.to_text()}]" + (f"*{d}" if d else ""))
        return " + ".join(parts)

    def __repr__(self):
        return f"QuantumOperator({self.to_text()!r} on {self.chart})"


def apply_quantum(op: QuantumOperator, f):
    """Exact action on an ExpPoly, including mixed second derivatives."""
    f = ExpPoly.coerce(f, op.chart)
    if f.chart != op.chart:
        raise ChartMismatchError(f"operator on {op.chart}, function on {f.chart}")
    out = ExpPoly(op.chart)
    for alpha, c in op.terms.items():
        g = f
        for name, k in zip(op.chart.names, alpha):
            for _ in range(k):
                g = g.diff(name)
        out = out + g * c
    return out


@dataclass(frozen=True)
class LadderPair:
    lowering: QuantumOperator
    raising: QuantumOperator
    label: str = ""


@dataclass(frozen=True)
class Commutator:
    """``[a, b]`` as an operator; ``scalar`` is set when it acts as ``c * 1``."""

    operator: QuantumOperator
    scalar: sp.Expr | None
    test_degree: int

    @property
    def is_scalar(self) -> bool:
        return self.scalar is not None


def commutator(a: QuantumOperator, b: QuantumOperator, test_degree: int = 6) -> Commutator:
    """Compose ``ab - ba`` and test whether it acts as a constant on all monomials up to ``test_degree``."""
    op = a.compose(b) - b.compose(a)
    chart = op.chart
    candidate = None
    for d in range(test_degree + 1):
        for e in monomials_of_degree(chart.dim, d):
            mono = MultiPolynomial.monomial(chart, e)
            image = apply_quantum(op, mono)
            c = image.as_poly().coefficient(e) if image.is_polynomial else None
            if c is None or image != ExpPoly.from_poly(mono * c):
                return Commutator(op, None, test_degree)
            if candidate is None:
                candidate = c
            elif c != candidate:
                return Commutator(op, None, test_degree)
    return Commutator(op, candidate if candidate is not None else sp.Integer(0), test_degree)


def eigenvalue_of(apply_fn, f: ExpPoly):
    """Return ``(lam, residual)`` with ``lam`` read off the leading term of ``apply_fn(f)``."""
    image = apply_fn(f)
    amp, phase = f.terms[0]
    exps, c = next(iter(amp.items()))
    match = [a for a, s in image.terms if s == phase]
    lam = as_coeff(match[0].coefficient(exps) / c) if match else sp.Integer(0)
    return lam, image - f * lam


# ---------------------------------------------------------------------------
# Bargmann oscillator
# ---------------------------------------------------------------------------


def bargmann_ladder(hbar=1) -> LadderPair:
    """``a = d/dz`` and ``a* = z`` on holomorphic functions of ``z``."""
    chart = Z1_CHART
    return LadderPair(
        QuantumOperator.derivative(chart, "z", 1, hbar),
        QuantumOperator.multiply(MultiPolynomial.var(chart, "z"), hbar),
        "bargmann",
    )


def bargmann_oscillator(omega=1, hbar=1) -> QuantumOperator:
    """``H = hbar omega (z d/dz + 1/2)``, assembled from ``a* a``."""
    w, h = exact(omega), exact(hbar)
    ladder = bargmann_ladder(h)
    return (ladder.raising @ ladder.lowering + sp.Rational(1, 2)) * (h * w)


def bargmann_state(n: int) -> ExpPoly:
    """``psi_n = z^n / sqrt(pi n!)``."""
    z = MultiPolynomial.var(Z1_CHART, "z")
    return ExpPoly.from_poly(z**n / sp.sqrt(sp.pi * sp.factorial(n)))


def bargmann_inner(psi, phi) -> sp.Expr:
    """``int conj(psi) phi exp(-|z|^2) dmu`` for holomorphic polynomials in ``z``."""
    psi = ExpPoly.coerce(psi, Z1_CHART)
    phi = ExpPoly.coerce(phi, Z1_CHART)
    for f in (psi, phi):
        if f.chart != Z1_CHART:
            raise ChartMismatchError(f"Bargmann functions live on {Z1_CHART}, got {f.chart}")
        if not f.is_polynomial or f.as_poly().degree_in(["zb"]) > 0:
            raise ValueError("Bargmann pairing needs holomorphic polynomials")
    return weighted_inner(psi, phi * gaussian_dressing(Z1_CHART, 1))


def oscillator_spectrum(N: int, omega=1, hbar=1) -> SpectrumReport:
    """Apply ``H_osc`` to ``psi_n`` for ``n <= N`` and read off the eigenvalues."""
    H = bargmann_oscillator(omega, hbar)
    pairs = []
    for n in range(N + 1):
        lam, res = eigenvalue_of(H, bargmann_state(n))
        if not res.is_zero:
            raise ArithmeticError(f"psi_{n} is not an eigenvector: residual {res}")
        pairs.append(Eigenpair(complex(sp.N(lam)), 1, [], [f"psi_{n}"], lam))
    return SpectrumReport(pairs, "quantum-bargmann", "harmonic", {"D": N})


# ---------------------------------------------------------------------------
# damped toy
# ---------------------------------------------------------------------------


def damped_toy_hamiltonian(rep: str = "position", gamma=1, hbar=1) -> QuantumOperator:
    """``H = -(gamma/2)(x p + p x)``.

    Position: ``p = -i hbar d/dx`` on functions of ``x``.
    Momentum: ``x = i hbar d/dp`` on functions of ``p``.
    """
    g, h = exact(gamma), exact(hbar)
    if rep == "position":
        chart = X1_CHART
        xhat = QuantumOperator.multiply(MultiPolynomial.var(chart, "x"), h)
        phat = QuantumOperator.derivative(chart, "x", 1, h) * (-sp.I * h)
    elif rep == "momentum":
        chart = P1_CHART
        xhat = QuantumOperator.derivative(chart, "p", 1, h) * (sp.I * h)
        phat = QuantumOperator.multiply(MultiPolynomial.var(chart, "p"), h)
    else:
        raise ValueError(f"representation must be 'position' or 'momentum', got {rep!r}")
    return (xhat @ phat + phat @ xhat) * (-g / 2)


def damped_toy_spectrum(rep: str, N: int, gamma=1, hbar=1) -> SpectrumReport:
    """Eigenvalues on ``x^n`` (position) and/or ``p^n`` (momentum), ``n <= N``.

    ``p^n`` is the Fourier image of ``phi_n = (-i hbar)^n delta^(n)``.
    ``rep="both"`` merges the two branches.
    """
    reps = ("position", "momentum") if rep == "both" else (rep,)
    pairs = []
    for r in reps:
        H = damped_toy_hamiltonian(r, gamma, hbar)
        chart = H.chart
        var = chart.names[0]
        label = "psi" if r == "position" else "phi"
        for n in range(N + 1):
            f = ExpPoly.from_poly(MultiPolynomial.var(chart, var) ** n)
            lam, res = eigenvalue_of(H, f)
            if not res.is_zero:
                raise ArithmeticError(f"{var}^{n} is not an eigenvector: residual {res}")
            pairs.append(Eigenpair(complex(sp.N(lam)), 1, [], [f"{label}_{n}"], lam))
    method = "quantum-" + ("both" if rep == "both" else rep)
    return SpectrumReport(pairs, method, "damped-toy", {"D": N})


# ---------------------------------------------------------------------------
# damped oscillator
# ---------------------------------------------------------------------------


def damped_ladders(hbar=1) -> tuple[LadderPair, LadderPair]:
    """``a1 = (x + d_y)/sqrt2``, ``a1* = (x - d_y)/sqrt2``, ``a2 = (y + d_x)/sqrt2``, ``a2* = (y - d_x)/sqrt2``."""
    c = XY_CHART
    h = exact(hbar)
    x = QuantumOperator.multiply(MultiPolynomial.var(c, "x"), h)
    y = QuantumOperator.multiply(MultiPolynomial.var(c, "y"), h)
    dx = QuantumOperator.derivative(c, "x", 1, h)
    dy = QuantumOperator.derivative(c, "y", 1, h)
    r = 1 / sp.sqrt(2)
    return (
        LadderPair((x + dy) * r, (x - dy) * r, "1"),
        LadderPair((y + dx) * r, (y - dx) * r, "2"),
    )


def holomorphic_ladders(hbar=1) -> tuple[LadderPair, LadderPair]:
    """``a1 = d_1``, ``a1* = z2``, ``a2 = d_2``, ``a2* = z1``."""
    c = HOLO2_CHART
    h = exact(hbar)
    d1 = QuantumOperator.derivative(c, "z1", 1, h)
    d2 = QuantumOperator.derivative(c, "z2", 1, h)
    z1 = QuantumOperator.multiply(MultiPolynomial.var(c, "z1"), h)
    z2 = QuantumOperator.multiply(MultiPolynomial.var(c, "z2"), h)
    return LadderPair(d1, z2, "1"), LadderPair(d2, z1, "2")


def damped_hamiltonian_from_ladders(l1: LadderPair, l2: LadderPair, omega=1, gamma=1, hbar=1) -> QuantumOperator:
    """``hbar (alpha a2* a1 + conj(alpha) a1* a2 + omega)`` with ``alpha = omega - i gamma``."""
    w, g, h = exact(omega), exact(gamma), exact(hbar)
    alpha = w - sp.I * g
    alpha_bar = w + sp.I * g
    return (l2.raising @ l1.lowering * alpha + l1.raising @ l2.lowering * alpha_bar + w) * h


def damped_hamiltonian_xy(omega=1, gamma=1, hbar=1) -> QuantumOperator:
    """``hbar omega (x y - d_xy) - i hbar gamma (y d_y - x d_x)`` written out directly."""
    w, g, h = exact(omega), exact(gamma), exact(hbar)
    c = XY_CHART
    x, y = MultiPolynomial.var(c, "x"), MultiPolynomial.var(c, "y")
    return QuantumOperator(
        c,
        {
            (0, 0): x * y * (h * w),
            (1, 1): MultiPolynomial.const(c, -h * w),
            (0, 1): y * (-sp.I * h * g),
            (1, 0): x * (sp.I * h * g),
        },
        h,
    )


def damped_holomorphic_hamiltonian(omega=1, gamma=1, hbar=1) -> QuantumOperator:
    """``hbar (alpha z1 d_1 + conj(alpha) z2 d_2 + omega)``."""
    w, g, h = exact(omega), exact(gamma), exact(hbar)
    c = HOLO2_CHART
    z1, z2 = MultiPolynomial.var(c, "z1"), MultiPolynomial.var(c, "z2")
    return QuantumOperator(
        c,
        {
            (0, 0): MultiPolynomial.const(c, h * w),
            (1, 0): z1 * (h * (w - sp.I * g)),
            (0, 1): z2 * (h * (w + sp.I * g)),
        },
        h,
    )


def mu(n: int, k: int, omega=1, gamma=1, hbar=1) -> sp.Expr:
    """Closed form ``hbar omega (n + k + 1) - i hbar gamma (n - k)``."""
    w, g, h = exact(omega), exact(gamma), exact(hbar)
    return as_coeff(h * w * (n + k + 1) - sp.I * h * g * (n - k))


def ground_state() -> ExpPoly:
    """``phi_00 = exp(-x y)``, annihilated by both lowering operators."""
    c = XY_CHART
    return ExpPoly.exp(MultiPolynomial.var(c, "x") * MultiPolynomial.var(c, "y") * -1)


def excited_state(n: int, k: int, hbar=1, order: str = "matched") -> ExpPoly:
    """Ladder state built on ``exp(-x y)``.

    ``order="matched"`` gives ``(a2*)^n (a1*)^k phi_00``, the word whose
    holomorphic image is ``z1^n z2^k`` and whose eigenvalue is ``mu_nk``.
    ``order="a1-first"`` gives ``(a1*)^n (a2*)^k phi_00``, which carries
    ``mu_kn`` because ``a2* a1`` counts ``a2*`` quanta.
    """
    if order not in ("matched", "a1-first"):
        raise ValueError(f"order must be 'matched' or 'a1-first', got {order!r}")
    l1, l2 = damped_ladders(hbar)
    outer, inner = (l2, l1) if order == "matched" else (l1, l2)
    f = ground_state()
    for _ in range(k):
        f = apply_quantum(inner.raising, f)
    for _ in range(n):
        f = apply_quantum(outer.raising, f)
    return f


def damped_osc_eigencheck(n: int, k: int, omega=1, gamma=1, hbar=1,
                          order: str = "matched") -> tuple[sp.Expr, ExpPoly]:
    """Eigenvalue of the (x, y) Hamiltonian on ``excited_state(n, k)`` and the exact residual."""
    H = damped_hamiltonian_xy(omega, gamma, hbar)
    phi = excited_state(n, k, hbar, order)
    return eigenvalue_of(H, phi)


def holomorphic_damped_spectrum(n: int, k: int, omega=1, gamma=1, hbar=1) -> sp.Expr:
    """Eigenvalue of the holomorphic Hamiltonian on ``psi_nk = z1^n z2^k``."""
    H = damped_holomorphic_hamiltonian(omega, gamma, hbar)
    c = HOLO2_CHART
    psi = ExpPoly.from_poly(MultiPolynomial.var(c, "z1") ** n * MultiPolynomial.var(c, "z2") ** k)
    lam, residual = eigenvalue_of(H, psi)
    if not residual.is_zero:
        raise ArithmeticError(f"psi_{n}{k} is not an eigenvector: {residual}")
    return lam


def damped_osc_spectrum(N: int, rep: str = "ccr", omega=1, gamma=1, hbar=1) -> SpectrumReport:
    """``mu_nk`` for ``n + k <= N`` via the (x, y) representation or the holomorphic one."""
    pairs = []
    for d in range(N + 1):
        for n in range(d + 1):
            k = d - n
            if rep == "ccr":
                lam, res = damped_osc_eigencheck(n, k, omega, gamma, hbar)
                if not res.is_zero:
                    raise ArithmeticError(f"phi_{n}{k} residual is not zero")
            elif rep == "holomorphic":
                lam = holomorphic_damped_spectrum(n, k, omega, gamma, hbar)
            else:
                raise ValueError(f"rep must be 'ccr' or 'holomorphic', got {rep!r}")
            pairs.append(Eigenpair(complex(sp.N(lam)), 1, [], [f"phi_{{{n},{k}}}"], lam))
    return SpectrumReport(pairs, f"quantum-{rep}", "damped-oscillator", {"D": N})


# ---------------------------------------------------------------------------
# correspondences and the momentum operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrespondenceRow:
    system: str
    classical_label: str
    quantum_label: str
    classical_eigenvalue: sp.Expr
    quantum_eigenvalue: sp.Expr


def correspondence_table(N: int, omega=1, gamma=1, hbar=1) -> list[CorrespondenceRow]:
    """Pair classical resonant states with quantum eigenvectors by label.

    Eigenvalues are computed by applying the respective operators and are
    listed side by side; they are not expected to coincide.
    """
    from .presets import damped_oscillator, damped_toy, harmonic

    rows: list[CorrespondenceRow] = []

    osc = harmonic(omega)
    osc_op = to_complex_chart(build_liouville(osc.hamiltonian), osc.complex_map)
    H_b = bargmann_oscillator(omega, hbar)
    zc = osc.complex_map.target
    z, zb = MultiPolynomial.var(zc, "z"), MultiPolynomial.var(zc, "zb")
    for n in range(N + 1):
        cl_hol, _ = eigenvalue_of(lambda f: apply_classical(osc_op, f), ExpPoly.from_poly(z**n))
        cl_anti, _ = eigenvalue_of(lambda f: apply_classical(osc_op, f), ExpPoly.from_poly(zb**n))
        q, _ = eigenvalue_of(H_b, bargmann_state(n))
        rows.append(CorrespondenceRow("harmonic", f"f_{{{n},0}}", f"psi_{n}", cl_hol, q))
        rows.append(CorrespondenceRow("harmonic", f"f_{{0,{n}}}", f"conj(psi_{n})", cl_anti, as_coeff(sp.conjugate(q))))

    toy = damped_toy(gamma)
    toy_op = build_liouville(toy.hamiltonian)
    x, p = (MultiPolynomial.var(toy.chart, v) for v in ("x", "p"))
    Hx = damped_toy_hamiltonian("position", gamma, hbar)
    Hp = damped_toy_hamiltonian("momentum", gamma, hbar)
    for n in range(N + 1):
        cx, _ = eigenvalue_of(lambda f: apply_classical(toy_op, f), ExpPoly.from_poly(x**n))
        cp, _ = eigenvalue_of(lambda f: apply_classical(toy_op, f), ExpPoly.from_poly(p**n))
        qx, _ = eigenvalue_of(Hx, ExpPoly.from_poly(MultiPolynomial.var(X1_CHART, "x") ** n))
        qp, _ = eigenvalue_of(Hp, ExpPoly.from_poly(MultiPolynomial.var(P1_CHART, "p") ** n))
        rows.append(CorrespondenceRow("damped-toy", f"g_{{{n},0}}", f"psi_{n}", cx, qx))
        rows.append(CorrespondenceRow("damped-toy", f"g_{{0,{n}}}", f"F[phi_{n}]", cp, qp))

    dosc = damped_oscillator(omega, gamma)
    d_op = to_complex_chart(build_liouville(dosc.hamiltonian), dosc.complex_map)
    zc4 = dosc.complex_map.target
    z1, z2 = MultiPolynomial.var(zc4, "z1"), MultiPolynomial.var(zc4, "z2")
    for d in range(N + 1):
        for n in range(d + 1):
            k = d - n
            cl, _ = eigenvalue_of(lambda f: apply_classical(d_op, f), ExpPoly.from_poly(z1**n * z2**k))
            q = holomorphic_damped_spectrum(n, k, omega, gamma, hbar)
            rows.append(CorrespondenceRow("damped-oscillator", f"f_{{{n},0,{k},0}}", f"psi_{{{n},{k}}}", cl, q))
    return rows


@dataclass(frozen=True)
class MomentumEigencheck:
    value: sp.Expr
    residual: ExpPoly
    alternate_value: sp.Expr
    alternate_residual: ExpPoly
    note: str


def momentum_eigencheck(z, hbar=1) -> MomentumEigencheck:
    """``p = -i hbar d/dx`` on ``exp(i z x / hbar)`` (eigenvalue ``z``) and on ``exp(-i z x)``.

    With ``hbar = 1`` the second function has eigenvalue ``-z``; both are
    reported so the sign convention is visible.
    """
    zc, h = exact(z), exact(hbar)
    chart = X1_CHART
    x = MultiPolynomial.var(chart, "x")
    p = QuantumOperator.derivative(chart, "x", 1, h) * (-sp.I * h)
    f = ExpPoly.exp(x * (sp.I * zc / h))
    g = ExpPoly.exp(x * (-sp.I * zc))
    lam_f, res_f = eigenvalue_of(p, f)
    lam_g, res_g = eigenvalue_of(p, g)
    note = (f"p exp(i z x/hbar) = {lam_f} exp(i z x/hbar); "
            f"p exp(-i z x) = {lam_g} exp(-i z x)")
    return MomentumEigencheck(lam_f, res_f, lam_g, res_g, note)
