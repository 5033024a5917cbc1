"""Exact polynomial and exp-polynomial algebra over coordinate charts.

Coefficients are sympy numbers.  Rational and Gaussian-rational inputs stay
exact, radicals such as ``sqrt(2)`` and factors such as ``exp(I*pi/4)`` are
kept symbolic, and anything containing a floating point number is evaluated
to a complex float and compared with an absolute tolerance of ``ZERO_TOL``.

Integration always uses the Liouville measure ``dmu = prod dx dp``.  On a
chart with a conjugate pair ``(z, zb)`` the pair is integrated against
``d(Re z) d(Im z)``, so that ``int exp(-|z|^2) dmu = pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import sympy as sp

from .errors import (
    ChartMismatchError,
    DivergentPairingError,
    NonAffineMapError,
    SingularMapError,
    UnknownCoordinateError,
)

ZERO_TOL = 1e-12

Scalar = Union[int, float, complex, Fraction, sp.Expr]
Exponents = tuple[int, ...]


def as_coeff(value) -> sp.Expr:
    """Convert a scalar to the canonical coefficient representation."""
    if isinstance(value, sp.Basic):
        expr = value
    elif isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    elif isinstance(value, (int, np.integer)):
        return sp.Integer(int(value))
    elif isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite coefficient {value!r}")
        return sp.Float(float(value))
    elif isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return _chop(as_coeff(value.real) + sp.I * as_coeff(value.imag))
    elif isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    else:
        expr = sp.sympify(value)
    if expr.is_Number:
        return expr
    if expr.has(sp.Float) and expr.is_number:
        return _chop(sp.N(expr))
    return sp.expand(expr)


def _chop(c: sp.Expr) -> sp.Expr:
    """Drop float real or imaginary parts below ``ZERO_TOL`` (rounding debris)."""
    re_, im_ = c.as_real_imag()
    re_ = sp.Integer(0) if re_.has(sp.Float) and abs(float(re_)) <= ZERO_TOL else re_
    im_ = sp.Integer(0) if im_.has(sp.Float) and abs(float(im_)) <= ZERO_TOL else im_
    return re_ + sp.I * im_


def exact(value) -> sp.Expr:
    """Like :func:`as_coeff` but decimal floats become exact rationals.

    ``0.3`` is read as ``3/10`` (shortest repr), which is what a user typing
    a parameter means.
    """
    if isinstance(value, (float, np.floating)):
        return sp.Rational(repr(float(value)))
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return exact(value.real) + sp.I * exact(value.imag)
    return as_coeff(value)


def is_zero_coeff(c: sp.Expr) -> bool:
    if c == 0:
        return True
    if c.is_number and c.has(sp.Float):
        return abs(complex(c)) <= ZERO_TOL
    return False


def to_complex(c: sp.Expr) -> complex:
    if c.free_symbols:
        raise ValueError(f"coefficient {c} has unbound symbols {sorted(map(str, c.free_symbols))}")
    return complex(sp.N(c, 17))


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordinateChart:
    """Ordered coordinate names with optional canonical and conjugate structure.

    A canonical chart has ``momentum_names`` paired with ``base_names``; a
    plain chart (function-space coordinates, complex coordinates) leaves
    ``momentum_names`` empty.  ``conjugate_pairs`` records the involution
    ``z <-> zb`` of a complex chart; coordinates not listed are real.
    """

    base_names: tuple[str, ...]
    momentum_names: tuple[str, ...] = ()
    conjugate_pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "base_names", tuple(self.base_names))
        object.__setattr__(self, "momentum_names", tuple(self.momentum_names))
        object.__setattr__(
            self, "conjugate_pairs", tuple(tuple(p) for p in self.conjugate_pairs)
        )
        if not self.base_names:
            raise ValueError("a chart needs at least one coordinate")
        if self.momentum_names and len(self.momentum_names) != len(self.base_names):
            raise ValueError("base and momentum name lists must have equal length")
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError(f"coordinate names are not distinct: {names}")
        if "i" in names:
            raise ValueError("'i' is reserved for the imaginary unit")
        seen = set()
        for pair in self.conjugate_pairs:
            if len(pair) != 2 or pair[0] == pair[1]:
                raise ValueError(f"bad conjugate pair {pair}")
            for name in pair:
                if name not in names:
                    raise UnknownCoordinateError(f"conjugate pair names unknown coordinate {name!r}")
                if name in seen:
                    raise ValueError(f"{name!r} appears in two conjugate pairs")
                seen.add(name)

    @classmethod
    def canonical(cls, base: Sequence[str], momentum: Sequence[str]) -> "CoordinateChart":
        return cls(tuple(base), tuple(momentum))

    @classmethod
    def plain(cls, names: Sequence[str], conjugates: Sequence[tuple[str, str]] = ()) -> "CoordinateChart":
        return cls(tuple(names), (), tuple(conjugates))

    @property
    def names(self) -> tuple[str, ...]:
        return self.base_names + self.momentum_names

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        """Half phase-space dimension (number of canonical pairs)."""
        return len(self.momentum_names)

    @property
    def is_canonical(self) -> bool:
        return bool(self.momentum_names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownCoordinateError(f"unknown coordinate {name!r} (chart has {self.names})") from None

    def conjugate_of(self, name: str) -> str:
        for a, b in self.conjugate_pairs:
            if name == a:
                return b
            if name == b:
                return a
        return name

    def to_json(self) -> dict:
        return {
            "base": list(self.base_names),
            "momentum": list(self.momentum_names),
            "conjugates": [list(p) for p in self.conjugate_pairs],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "CoordinateChart":
        return cls(
            tuple(data["base"]),
            tuple(data.get("momentum", ())),
            tuple(tuple(p) for p in data.get("conjugates", ())),
        )

    def __str__(self):
        return "(" + ", ".join(self.names) + ")"


def _check_same_chart(a: CoordinateChart, b: CoordinateChart):
    if a != b:
        raise ChartMismatchError(f"chart mismatch: {a} vs {b}")


def _grlex_key(item):
    exps = item[0]
    return (sum(exps), exps)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class MultiPolynomial:
    """Multivariate polynomial with sympy coefficients, immutable.

    Terms map exponent tuples (one entry per chart coordinate) to nonzero
    coefficients and are stored in graded-lexicographic order.
    """

    __slots__ = ("chart", "_terms", "_numeric", "_hash")

    def __init__(self, chart: CoordinateChart, terms: Mapping[Sequence[int], Scalar] | None = None):
        acc: dict[Exponents, sp.Expr] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != chart.dim or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for chart {chart}")
            c = as_coeff(c)
            acc[exps] = acc[exps] + c if exps in acc else c
        self._init(chart, acc)

    def _init(self, chart, acc):
        self.chart = chart
        canon = {}
        for exps, c in acc.items():
            if not c.is_Number:
                c = as_coeff(c)
            if not is_zero_coeff(c):
                canon[exps] = c
        self._terms = dict(sorted(canon.items(), key=_grlex_key))
        self._numeric = None
        self._hash = None

    @classmethod
    def _raw(cls, chart, acc) -> "MultiPolynomial":
        obj = cls.__new__(cls)
        obj._init(chart, acc)
        return obj

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, chart):
        return cls(chart)

    @classmethod
    def const(cls, chart, c: Scalar = 1):
        return cls(chart, {(0,) * chart.dim: c})

    @classmethod
    def var(cls, chart, name: str):
        exps = [0] * chart.dim
        exps[chart.index(name)] = 1
        return cls(chart, {tuple(exps): 1})

    @classmethod
    def monomial(cls, chart, exps: Sequence[int], c: Scalar = 1):
        return cls(chart, {tuple(exps): c})

    def variables(self) -> dict[str, "MultiPolynomial"]:
        return {name: MultiPolynomial.var(self.chart, name) for name in self.chart.names}

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponents, sp.Expr]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> float:
        if not self._terms:
            return float("-inf")
        return max(sum(e) for e in self._terms)

    def degree_in(self, names: Iterable[str]) -> float:
        idx = [self.chart.index(n) for n in names]
        if not self._terms:
            return float("-inf")
        return max(sum(e[i] for i in idx) for e in self._terms)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self._terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return degree is None or degs == {degree}

    def coefficient(self, exps: Sequence[int]) -> sp.Expr:
        return self._terms.get(tuple(exps), sp.Integer(0))

    def constant_term(self) -> sp.Expr:
        return self.coefficient((0,) * self.chart.dim)

    @property
    def free_symbols(self) -> set:
        out = set()
        for c in self._terms.values():
            out |= c.free_symbols
        return out

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "MultiPolynomial | None":
        if isinstance(other, MultiPolynomial):
            _check_same_chart(self.chart, other.chart)
            return other
        if isinstance(other, (int, float, complex, Fraction, sp.Expr, np.number)):
            return MultiPolynomial.const(self.chart, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc[e] + c if e in acc else c
        return MultiPolynomial._raw(self.chart, acc)

    __radd__ = __add__

    def __neg__(self):
        return MultiPolynomial._raw(self.chart, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, Fraction, sp.Expr, np.number)):
            c = as_coeff(other)
            return MultiPolynomial._raw(self.chart, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc: dict[Exponents, sp.Expr] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                acc[e] = acc[e] + prod if e in acc else prod
        return MultiPolynomial._raw(self.chart, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiPolynomial):
            if len(other) == 1 and other.constant_term() != 0:
                other = other.constant_term()
            else:
                return NotImplemented
        return self * (1 / as_coeff(other))

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = MultiPolynomial.const(self.chart, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPolynomial):
            return self.chart == other.chart and self._terms == other._terms
        if isinstance(other, ExpPoly):
            return other == self
        if isinstance(other, (int, float, complex, Fraction, sp.Expr)):
            return self == MultiPolynomial.const(self.chart, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, tuple(self._terms.items())))
        return self._hash

    # -- calculus and maps -------------------------------------------------
    def diff(self, name: str) -> "MultiPolynomial":
        i = self.chart.index(name)
        acc = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1 :]
                acc[ne] = c * e[i]
        return MultiPolynomial._raw(self.chart, acc)

    def conjugate(self) -> "MultiPolynomial":
        """Complex conjugate; swaps the names of each conjugate pair."""
        chart = self.chart
        perm = [chart.index(chart.conjugate_of(n)) for n in chart.names]
        acc = {}
        for e, c in self._terms.items():
            ne = [0] * chart.dim
            for i, k in enumerate(e):
                ne[perm[i]] = k
            acc[tuple(ne)] = sp.conjugate(c)
        return MultiPolynomial._raw(chart, acc)

    def subs(self, images: Mapping[str, "MultiPolynomial | Scalar"], chart: CoordinateChart | None = None):
        """Substitute coordinates by polynomials over ``chart`` (default: same chart).

        Coordinates without an image map to the coordinate of the same name
        in the target chart.
        """
        target = chart or self.chart
        for name in images:
            self.chart.index(name)
        img = []
        for name in self.chart.names:
            v = images.get(name, None)
            if v is None:
                v = MultiPolynomial.var(target, name)
            elif not isinstance(v, MultiPolynomial):
                v = MultiPolynomial.const(target, v)
            else:
                _check_same_chart(v.chart, target)
            img.append(v)
        powers: list[dict[int, MultiPolynomial]] = [{} for _ in img]

        def power(i, k):
            if k not in powers[i]:
                powers[i][k] = img[i] ** k
            return powers[i][k]

        acc: dict[Exponents, sp.Expr] = {}
        for e, c in self._terms.items():
            term = MultiPolynomial.const(target, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term._terms.items():
                acc[te] = acc[te] + tc if te in acc else tc
        return MultiPolynomial._raw(target, acc)

    def map_coeffs(self, fn) -> "MultiPolynomial":
        return MultiPolynomial._raw(self.chart, {e: as_coeff(fn(c)) for e, c in self._terms.items()})

    # -- numerics ----------------------------------------------------------
    def numeric(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix ``(T, dim)`` and complex coefficient vector ``(T,)``."""
        if self._numeric is None:
            exps = np.array(list(self._terms.keys()), dtype=int).reshape(-1, self.chart.dim)
            coeffs = np.array([to_complex(c) for c in self._terms.values()], dtype=complex)
            self._numeric = (exps, coeffs)
        return self._numeric

    def evaluate(self, points) -> np.ndarray:
        """Evaluate at an array of points with trailing dimension ``chart.dim``."""
        pts = np.asarray(points)
        if pts.shape[-1] != self.chart.dim:
            raise ValueError(f"points have {pts.shape[-1]} coordinates, chart has {self.chart.dim}")
        exps, coeffs = self.numeric()
        if not len(coeffs):
            return np.zeros(pts.shape[:-1], dtype=complex)
        mon = np.prod(pts[..., None, :] ** exps, axis=-1)
        return mon @ coeffs

    # -- text --------------------------------------------------------------
    def to_text(self) -> str:
        from .grammar import format_polynomial

        return format_polynomial(self)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPolynomial({self.to_text()!r} on {self.chart})"

    def to_json(self) -> dict:
        return {
            "chart": self.chart.to_json(),
            "terms": [
                {"exps": list(e), "re": str(sp.re(c)), "im": str(sp.im(c))}
                for e, c in self._terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPolynomial":
        chart = CoordinateChart.from_json(data["chart"])
        terms = {}
        for t in data["terms"]:
            re, im = (sp.sympify(str(t[k])) for k in ("re", "im"))
            terms[tuple(t["exps"])] = re + sp.I * im
        return cls(chart, terms)


# ---------------------------------------------------------------------------
# exp-polynomials
# ---------------------------------------------------------------------------


def _phase_key(phase: MultiPolynomial):
    return tuple((e, str(c)) for e, c in phase.items())


class ExpPoly:
    """Finite sum ``sum_i P_i * exp(S_i)`` with polynomial amplitudes and phases.

    Terms with equal phase are merged, the constant part of every phase is
    folded into its amplitude, and zero amplitudes are dropped.
    """

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: CoordinateChart, terms: Iterable[tuple[MultiPolynomial, MultiPolynomial]] = ()):
        self.chart = chart
        merged: dict[MultiPolynomial, MultiPolynomial] = {}
        for amp, phase in terms:
            _check_same_chart(amp.chart, chart)
            _check_same_chart(phase.chart, chart)
            c0 = phase.constant_term()
            if c0 != 0:
                phase = phase - c0
                amp = amp * sp.exp(c0)
            merged[phase] = merged[phase] + amp if phase in merged else amp
        kept = [(a, s) for s, a in merged.items() if not a.is_zero]
        kept.sort(key=lambda t: _phase_key(t[1]))
        self._terms = tuple(kept)
        self._hash = None

    @classmethod
    def from_poly(cls, poly: MultiPolynomial) -> "ExpPoly":
        return cls(poly.chart, [(poly, MultiPolynomial.zero(poly.chart))])

    @classmethod
    def exp(cls, phase: MultiPolynomial, amplitude: MultiPolynomial | Scalar = 1) -> "ExpPoly":
        if not isinstance(amplitude, MultiPolynomial):
            amplitude = MultiPolynomial.const(phase.chart, amplitude)
        return cls(phase.chart, [(amplitude, phase)])

    @classmethod
    def coerce(cls, value, chart: CoordinateChart | None = None) -> "ExpPoly":
        if isinstance(value, ExpPoly):
            return value
        if isinstance(value, MultiPolynomial):
            return cls.from_poly(value)
        if chart is None:
            raise TypeError(f"cannot coerce {value!r} to ExpPoly without a chart")
        return cls.from_poly(MultiPolynomial.const(chart, value))

    @property
    def terms(self) -> tuple[tuple[MultiPolynomial, MultiPolynomial], ...]:
        return self._terms

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_polynomial(self) -> bool:
        return all(s.is_zero for _, s in self._terms)

    def as_poly(self) -> MultiPolynomial:
        if self.is_zero:
            return MultiPolynomial.zero(self.chart)
        if not self.is_polynomial:
            raise ValueError("ExpPoly has a non-trivial exponential factor")
        return self._terms[0][0]

    def _other(self, other) -> "ExpPoly | None":
        if isinstance(other, ExpPoly):
            _check_same_chart(self.chart, other.chart)
            return other
        if isinstance(other, MultiPolynomial):
            _check_same_chart(self.chart, other.chart)
            return ExpPoly.from_poly(other)
        if isinstance(other, (int, float, complex, Fraction, sp.Expr, np.number)):
            return ExpPoly.from_poly(MultiPolynomial.const(self.chart, other))
        return None

    def __add__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return ExpPoly(self.chart, self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly(self.chart, [(-a, s) for a, s in self._terms])

    def __sub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, Fraction, sp.Expr, np.number)):
            return ExpPoly(self.chart, [(a * other, s) for a, s in self._terms])
        other = self._other(other)
        if other is None:
            return NotImplemented
        return ExpPoly(
            self.chart,
            [(a1 * a2, s1 + s2) for a1, s1 in self._terms for a2, s2 in other._terms],
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / as_coeff(other))

    def __eq__(self, other):
        if isinstance(other, (MultiPolynomial, int, float, complex, Fraction, sp.Expr)):
            other = self._other(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self.chart == other.chart and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, self._terms))
        return self._hash

    def diff(self, name: str) -> "ExpPoly":
        """d(P e^S) = (dP + P dS) e^S."""
        return ExpPoly(self.chart, [(a.diff(name) + a * s.diff(name), s) for a, s in self._terms])

    def conjugate(self) -> "ExpPoly":
        return ExpPoly(self.chart, [(a.conjugate(), s.conjugate()) for a, s in self._terms])

    def subs(self, images: Mapping[str, MultiPolynomial | Scalar], chart: CoordinateChart | None = None) -> "ExpPoly":
        target = chart or self.chart
        return ExpPoly(target, [(a.subs(images, target), s.subs(images, target)) for a, s in self._terms])

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for a, s in self._terms:
            out = out + a.evaluate(pts) * np.exp(s.evaluate(pts))
        return out

    def to_text(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for a, s in self._terms:
            if s.is_zero:
                parts.append(f"[{a.to_text()}]")
            else:
                parts.append(f"[{a.to_text()}]*exp({s.to_text()})")
        return " + ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"ExpPoly({self.to_text()!r} on {self.chart})"


# ---------------------------------------------------------------------------
# brackets, maps, integrals
# ---------------------------------------------------------------------------


def poisson_bracket(F: MultiPolynomial, G: MultiPolynomial) -> MultiPolynomial:
    """Canonical bracket ``sum_k dF/dx^k dG/dp_k - dG/dx^k dF/dp_k``."""
    _check_same_chart(F.chart, G.chart)
    chart = F.chart
    if not chart.is_canonical:
        raise ChartMismatchError(f"Poisson bracket needs a canonical chart, got {chart}")
    out = MultiPolynomial.zero(chart)
    for x, p in zip(chart.base_names, chart.momentum_names):
        out = out + F.diff(x) * G.diff(p) - G.diff(x) * F.diff(p)
    return out


@dataclass(frozen=True)
class ComplexChartMap:
    """Affine invertible change of coordinates between two charts.

    ``forward`` gives each target coordinate as a polynomial over ``source``;
    ``inverse`` gives each source coordinate over ``target``.
    """

    source: CoordinateChart
    target: CoordinateChart
    forward: Mapping[str, MultiPolynomial] = field(hash=False)
    inverse: Mapping[str, MultiPolynomial] = field(hash=False)

    def __post_init__(self):
        if set(self.forward) != set(self.target.names):
            raise ValueError("forward map must give every target coordinate")
        if set(self.inverse) != set(self.source.names):
            raise ValueError("inverse map must give every source coordinate")
        for images, chart in ((self.forward, self.source), (self.inverse, self.target)):
            for name, poly in images.items():
                _check_same_chart(poly.chart, chart)
                if poly.degree > 1:
                    raise NonAffineMapError(f"image of {name!r} has degree {poly.degree}")
        for name in self.source.names:
            back = self.inverse[name].subs(self.forward, self.source)
            if back != MultiPolynomial.var(self.source, name):
                raise SingularMapError(f"inverse does not undo forward on {name!r}: got {back}")

    @classmethod
    def from_forward(cls, source, target, forward: Mapping[str, MultiPolynomial]) -> "ComplexChartMap":
        """Build the map, computing the inverse by exact linear algebra."""
        if set(forward) != set(target.names):
            raise ValueError("forward map must give every target coordinate")
        if target.dim != source.dim:
            raise SingularMapError("charts of different dimension")
        for name, poly in forward.items():
            if poly.degree > 1:
                raise NonAffineMapError(f"image of {name!r} has degree {poly.degree}")
        d = source.dim
        A = sp.zeros(d, d)
        b = sp.zeros(d, 1)
        for i, name in enumerate(target.names):
            poly = forward[name]
            b[i] = poly.constant_term()
            for j in range(d):
                e = [0] * d
                e[j] = 1
                A[i, j] = poly.coefficient(e)
        if sp.simplify(A.det()) == 0:
            raise SingularMapError("linear part of the map is singular")
        Ainv = A.inv()
        shift = -(Ainv * b)
        inverse = {}
        for j, name in enumerate(source.names):
            terms = {(0,) * d: shift[j]}
            for i in range(d):
                e = [0] * d
                e[i] = 1
                terms[tuple(e)] = sp.radsimp(Ainv[j, i])
            inverse[name] = MultiPolynomial(target, terms)
        return cls(source, target, dict(forward), inverse)

    def inverted(self) -> "ComplexChartMap":
        return ComplexChartMap(self.target, self.source, self.inverse, self.forward)


def substitute_linear(f, chart_map: ComplexChartMap):
    """Rewrite ``f`` (over ``chart_map.source``) in the target coordinates."""
    _check_same_chart(f.chart, chart_map.source)
    return f.subs(chart_map.inverse, chart_map.target)


def gaussian_moment(n: int, m: int) -> sp.Expr:
    """``int z^n zb^m exp(-|z|^2) dx dp`` with ``z = x + i p``: ``pi n!`` if n == m else 0."""
    if n < 0 or m < 0:
        raise ValueError("moments need non-negative orders")
    return sp.pi * sp.factorial(n) if n == m else sp.Integer(0)


def _positive_real_part(a: sp.Expr) -> bool | None:
    if a.is_number:
        return complex(sp.N(a)).real > 0
    return sp.re(a).is_positive


def gaussian_integral(amplitude: MultiPolynomial, phase: MultiPolynomial) -> sp.Expr:
    """Exact ``int P exp(S) dmu`` for a separable, negative-definite quadratic ``S``.

    ``S`` may contain ``-a v^2`` for each real coordinate and ``-w z zb`` for
    each conjugate pair, nothing else.
    """
    chart = amplitude.chart
    _check_same_chart(chart, phase.chart)
    if amplitude.is_zero:
        return sp.Integer(0)
    pair_of = {}
    for a, b in chart.conjugate_pairs:
        pair_of[chart.index(a)] = (chart.index(a), chart.index(b))
        pair_of[chart.index(b)] = (chart.index(a), chart.index(b))
    widths: dict = {}
    for exps, c in phase.items():
        support = [i for i, e in enumerate(exps) if e]
        if sum(exps) == 2 and len(support) == 1 and support[0] not in pair_of:
            widths[support[0]] = -c
        elif (
            sum(exps) == 2
            and len(support) == 2
            and support[0] in pair_of
            and pair_of[support[0]] == tuple(support)
        ):
            widths[tuple(support)] = -c
        else:
            raise DivergentPairingError(
                f"phase term {c}*{exps} is not reducible to Gaussian moments"
            )
    blocks = [i for i in range(chart.dim) if i not in pair_of]
    blocks += sorted({pair_of[i] for i in pair_of})
    for blk in blocks:
        if blk not in widths:
            name = chart.names[blk] if isinstance(blk, int) else chart.names[blk[0]]
            raise DivergentPairingError(f"divergent pairing: no Gaussian decay in {name!r}")
        ok = _positive_real_part(widths[blk])
        if ok is None:
            raise DivergentPairingError(f"cannot establish decay of width {widths[blk]}")
        if not ok:
            raise DivergentPairingError(f"divergent pairing: width {widths[blk]} has non-positive real part")
    total = sp.Integer(0)
    for exps, c in amplitude.items():
        val = c
        for blk in blocks:
            w = widths[blk]
            if isinstance(blk, int):
                k = exps[blk]
                if k % 2:
                    val = 0
                    break
                val = val * sp.gamma(sp.Rational(k + 1, 2)) / w ** sp.Rational(k + 1, 2)
            else:
                ka, kb = exps[blk[0]], exps[blk[1]]
                if ka != kb:
                    val = 0
                    break
                val = val * sp.pi * sp.factorial(ka) / w ** (ka + 1)
        total += val
    return as_coeff(total)


def weighted_inner(f, g) -> sp.Expr:
    """Hermitian product ``<f|g> = int conj(f) g dmu``, evaluated exactly."""
    f = ExpPoly.coerce(f)
    g = ExpPoly.coerce(g)
    _check_same_chart(f.chart, g.chart)
    h = f.conjugate() * g
    total = sp.Integer(0)
    for amp, phase in h.terms:
        total += gaussian_integral(amp, phase)
    return as_coeff(total)


def gaussian_dressing(chart: CoordinateChart, scale: Scalar = sp.Rational(1, 2)) -> ExpPoly:
    """``exp(-scale * sum |v|^2)``: ``v^2`` per real coordinate, ``z zb`` per pair."""
    phase = MultiPolynomial.zero(chart)
    paired = set()
    for a, b in chart.conjugate_pairs:
        phase = phase + MultiPolynomial.var(chart, a) * MultiPolynomial.var(chart, b)
        paired |= {a, b}
    for name in chart.names:
        if name not in paired:
            phase = phase + MultiPolynomial.var(chart, name) ** 2
    return ExpPoly.exp(phase * (-as_coeff(scale)))
