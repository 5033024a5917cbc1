"""Numerical flows, Koopman pullbacks and the dynamical checks built on them.

Flows come from three independent routes: an adaptive Dormand-Prince 5(4)
integration of the polynomial right-hand side, the matrix exponential for
linear systems, and closed-form solutions registered per preset.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import RK45
from scipy.linalg import expm

from .errors import ChartMismatchError, QuadratureDomainError
from .lift import HamiltonianSystem, VectorField
from .presets import Preset
from .symbolic import (
    ComplexChartMap,
    CoordinateChart,
    ExpPoly,
    MultiPolynomial,
    exact,
    poisson_bracket,
    substitute_linear,
)

DEFAULT_TOL = 1e-10
ESCAPE_NORM = 1e8
ESCAPE_STEP = 1e-14
ESCAPE_GROWTH = 1e3


# ---------------------------------------------------------------------------
# systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowSystem:
    """Polynomial ODE ``dv/dt = field(v)`` on a chart, with optional provenance."""

    chart: CoordinateChart
    field: tuple[MultiPolynomial, ...]
    name: str = ""
    params: dict | None = None
    hamiltonian: MultiPolynomial | None = None
    complex_map: ComplexChartMap | None = None

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def is_linear(self) -> bool:
        return all(c.is_zero or c.is_homogeneous(1) for c in self.field)

    def rhs(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        return np.array([c.evaluate(state).real if not c.is_zero else np.zeros(state.shape[:-1])
                         for c in self.field]).T

    def linear_matrix(self) -> np.ndarray:
        """``A`` with ``dv/dt = A v``; only meaningful when ``is_linear``."""
        A = np.zeros((self.dim, self.dim))
        for i, comp in enumerate(self.field):
            for j in range(self.dim):
                e = [0] * self.dim
                e[j] = 1
                A[i, j] = complex(comp.coefficient(e)).real
        return A


def as_flow_system(system) -> FlowSystem:
    """Accept a Preset, HamiltonianSystem, VectorField or FlowSystem."""
    if isinstance(system, FlowSystem):
        return system
    if isinstance(system, Preset):
        s = system.system
        return FlowSystem(s.chart, tuple(s.phase_field), system.name, dict(system.params), s.hamiltonian,
                          system.complex_map)
    if isinstance(system, HamiltonianSystem):
        return FlowSystem(system.chart, tuple(system.phase_field), system.name, {}, system.hamiltonian)
    if isinstance(system, VectorField):
        return FlowSystem(system.chart, tuple(system.components), system.name, {})
    raise TypeError(f"cannot build a flow from {type(system).__name__}")


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Escape:
    time: float
    index: int


@dataclass
class Trajectory:
    """Samples of ``Phi_t(x0)``; times are strictly monotone in the direction of integration."""

    times: np.ndarray
    states: np.ndarray
    names: tuple[str, ...]
    integrator: dict = field(default_factory=dict)
    escape: Escape | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float).reshape(len(self.times), -1)
        if self.states.shape[1] != len(self.names):
            raise ValueError("state dimension does not match coordinate names")
        steps = np.diff(self.times)
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("trajectory times must be strictly monotone")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.names.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.names])
        for t, s in zip(self.times, self.states):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in s)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if not header or header[0] != "t":
            raise ValueError("trajectory CSV must start with a 't' column")
        data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
        return cls(data[:, 0], data[:, 1:], tuple(header[1:]))

    def metadata(self) -> dict:
        out = {"names": list(self.names), "samples": len(self.times), "integrator": self.integrator}
        if self.escape is not None:
            out["escape"] = {"time": self.escape.time, "index": self.escape.index}
        return out


def write_ensemble(trajectories: Sequence[Trajectory], directory, stem: str = "traj") -> Path:
    """One CSV per initial condition plus ``index.json``; returns the index path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for k, tr in enumerate(trajectories):
        name = f"{stem}_{k:03d}.csv"
        (directory / name).write_text(tr.to_csv())
        entries.append({"file": name, "x0": tr.states[0].tolist(), **tr.metadata()})
    index = directory / "index.json"
    index.write_text(json.dumps({"trajectories": entries}, indent=2))
    return index


def read_ensemble(index_path) -> list[Trajectory]:
    index_path = Path(index_path)
    data = json.loads(index_path.read_text())
    return [Trajectory.from_csv((index_path.parent / e["file"]).read_text()) for e in data["trajectories"]]


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def integrate(system, x0: Sequence[float], t_end: float, tol: float = DEFAULT_TOL,
              max_steps: int = 200_000, sample_dt: float | None = None) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) with ``rtol = atol = tol``.

    States are recorded at the accepted steps, or, with ``sample_dt``, on the
    uniform grid ``0, dt, 2 dt, ...`` (towards ``t_end``) from the dense output.

    Escape is declared when the step falls below ``1e-14 |t_end|`` while the
    state norm exceeds ``1e8``, when the state becomes non-finite, or when the
    stepper gives up after the norm has grown ``1e3``-fold (slow blow-ups such
    as ``x ~ (t* - t)^(-1/2)`` exhaust double precision in time before
    reaching ``1e8``).  The trajectory is then truncated.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if sample_dt is not None and sample_dt <= 0:
        raise ValueError("sample_dt must be positive")
    sys_ = as_flow_system(system)
    y0 = np.asarray(x0, dtype=float)
    if y0.shape != (sys_.dim,):
        raise ValueError(f"initial state needs {sys_.dim} components, got {y0.shape}")
    meta = {"method": "RK45", "rtol": tol, "atol": tol, "steps": 0}
    if t_end == 0:
        return Trajectory([0.0], [y0], sys_.chart.names, meta)

    def f(t, y):
        return sys_.rhs(y)

    solver = RK45(f, 0.0, y0, t_end, rtol=tol, atol=tol)
    times, states = [0.0], [y0.copy()]
    if sample_dt is not None:
        direction = 1.0 if t_end > 0 else -1.0
        n_samples = int(math.floor(abs(t_end) / sample_dt + 1e-9))
        grid = direction * sample_dt * np.arange(1, n_samples + 1)
        next_sample = 0
    escape = None
    step_floor = ESCAPE_STEP * abs(t_end)
    while solver.status == "running":
        msg = solver.step()
        y = solver.y
        big = np.linalg.norm(y) > ESCAPE_NORM if np.all(np.isfinite(y)) else True
        if msg is not None or solver.status == "failed":
            last = np.linalg.norm(states[-1])
            if big or last > ESCAPE_NORM or last > ESCAPE_GROWTH * max(1.0, np.linalg.norm(y0)):
                escape = Escape(float(times[-1]), int(np.argmax(np.abs(states[-1]))))
            else:
                meta["message"] = str(msg)
            break
        if not np.all(np.isfinite(y)):
            escape = Escape(float(times[-1]), int(np.argmax(np.abs(states[-1]))))
            break
        meta["steps"] += 1
        if sample_dt is not None:
            dense = solver.dense_output()
            while next_sample < len(grid) and direction * (grid[next_sample] - solver.t) <= 1e-12 * abs(t_end):
                times.append(float(grid[next_sample]))
                states.append(dense(grid[next_sample]))
                next_sample += 1
        elif solver.t != times[-1]:
            times.append(float(solver.t))
            states.append(y.copy())
        if big and solver.step_size is not None and solver.step_size < step_floor:
            escape = Escape(float(solver.t), int(np.argmax(np.abs(y))))
            break
        if meta["steps"] >= max_steps:
            meta["message"] = "step limit reached"
            break
    meta["nfev"] = int(solver.nfev)
    return Trajectory(times, states, sys_.chart.names, meta, escape)


# ---------------------------------------------------------------------------
# exact flows
# ---------------------------------------------------------------------------

ExactFlow = Callable[[np.ndarray, float], np.ndarray]


def _rotation(params) -> ExactFlow:
    w = float(params["omega"])

    def flow(pts, t):
        c, s = math.cos(w * t), math.sin(w * t)
        x, p = pts[..., 0], pts[..., 1]
        return np.stack([c * x + s * p, -s * x + c * p], axis=-1)

    return flow


def _diagonal_exp(params) -> ExactFlow:
    g = float(params["gamma"])

    def flow(pts, t):
        return np.stack([pts[..., 0] * math.exp(-g * t), pts[..., 1] * math.exp(g * t)], axis=-1)

    return flow


def _inverted_oscillator(params) -> ExactFlow:
    # H = (gamma/2)(P^2 - X^2): dX/dt = gamma P, dP/dt = gamma X
    g = float(params["gamma"])

    def flow(pts, t):
        c, s = math.cosh(g * t), math.sinh(g * t)
        X, P = pts[..., 0], pts[..., 1]
        return np.stack([c * X + s * P, s * X + c * P], axis=-1)

    return flow


def _complex_exp(params) -> ExactFlow:
    # z1 = x1 + i x2 -> exp(-i alpha t) z1,  w = p1 + i p2 -> exp(-i conj(alpha) t) w
    w, g = float(params["omega"]), float(params["gamma"])
    alpha = complex(w, -g)

    def flow(pts, t):
        z1 = (pts[..., 0] + 1j * pts[..., 1]) * np.exp(-1j * alpha * t)
        q = (pts[..., 2] + 1j * pts[..., 3]) * np.exp(-1j * alpha.conjugate() * t)
        return np.stack([z1.real, z1.imag, q.real, q.imag], axis=-1)

    return flow


def _free_drift(params) -> ExactFlow:
    m = float(params["mass"])

    def flow(pts, t):
        d = pts.shape[-1] // 2
        return np.concatenate([pts[..., :d] + pts[..., d:] * t / m, pts[..., d:]], axis=-1)

    return flow


def _separable(params) -> ExactFlow:
    # dx/dt = -gamma x^n, and H = -gamma x^n p is conserved
    g, n = float(params["gamma"]), int(params["n"])

    def flow(pts, t):
        x0, p0 = pts[..., 0], pts[..., 1]
        if n == 1:
            return np.stack([x0 * math.exp(-g * t), p0 * math.exp(g * t)], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            base = 1.0 + (n - 1) * g * x0 ** (n - 1) * t
            x = np.where(base > 0, x0 * base ** (-1.0 / (n - 1)), np.nan)
            p = np.where(base > 0, p0 * base ** (n / (n - 1)), np.nan)
        return np.stack([x, p], axis=-1)

    return flow


EXACT_FLOWS: dict[str, tuple[str, Callable[[dict], ExactFlow]]] = {
    "harmonic": ("rotation", _rotation),
    "damped-toy": ("diagonal-exp", _diagonal_exp),
    "damped-toy-xp": ("hyperbolic-rotation", _inverted_oscillator),
    "damped-oscillator": ("complex-exp", _complex_exp),
    "free-particle": ("free-drift", _free_drift),
    "power-damped": ("separable", _separable),
}


def exact_flow(system) -> tuple[str, ExactFlow] | None:
    """Closed-form flow registered for a preset, or ``None``."""
    sys_ = as_flow_system(system)
    key = sys_.name.split(":")[0]
    if key not in EXACT_FLOWS or sys_.params is None:
        return None
    label, build = EXACT_FLOWS[key]
    return label, build(sys_.params)


def expm_flow(system) -> ExactFlow:
    """``v(t) = expm(t A) v0`` for linear systems."""
    sys_ = as_flow_system(system)
    if not sys_.is_linear:
        raise ValueError(f"{sys_.name or 'system'} is not linear; no matrix-exponential flow")
    A = sys_.linear_matrix()

    def flow(pts, t):
        return np.asarray(pts, dtype=float) @ expm(t * A).T

    return flow


def flow_points(system, points, t: float, method: str = "auto", tol: float = DEFAULT_TOL):
    """``Phi_t`` at each point; returns ``(states, escaped)`` with NaN rows where escaped.

    ``method``: ``"closed-form"``, ``"expm"``, ``"integrate"`` or ``"auto"``
    (closed form, then expm, then integration).
    """
    sys_ = as_flow_system(system)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if method == "auto":
        if exact_flow(sys_) is not None:
            method = "closed-form"
        elif sys_.is_linear:
            method = "expm"
        else:
            method = "integrate"
    if method == "closed-form":
        found = exact_flow(sys_)
        if found is None:
            raise ValueError(f"no closed-form flow registered for {sys_.name!r}")
        out = found[1](pts, t)
    elif method == "expm":
        out = expm_flow(sys_)(pts, t)
    elif method == "integrate":
        out = np.empty_like(pts)
        for k, p in enumerate(pts):
            tr = integrate(sys_, p, t, tol)
            out[k] = np.nan if tr.escape is not None else tr.final
    else:
        raise ValueError(f"unknown flow method {method!r}")
    escaped = ~np.all(np.isfinite(out), axis=-1)
    out[escaped] = np.nan
    return out, escaped


# ---------------------------------------------------------------------------
# Koopman evolution
# ---------------------------------------------------------------------------


def _on_system_chart(f, sys_: FlowSystem) -> ExpPoly:
    f = ExpPoly.coerce(f, sys_.chart)
    if f.chart == sys_.chart:
        return f
    cmap = sys_.complex_map
    if cmap is not None and f.chart == cmap.target:
        return substitute_linear(f, cmap.inverted())
    raise ChartMismatchError(f"observable on {f.chart}, system on {sys_.chart}")


def koopman_evolve(f, system, t: float, points, method: str = "auto", tol: float = DEFAULT_TOL) -> np.ndarray:
    """``(U(t) f)(pt) = f(Phi_t(pt))``; points are in the system chart, escaped points give NaN."""
    sys_ = as_flow_system(system)
    g = _on_system_chart(f, sys_)
    states, escaped = flow_points(sys_, points, t, method, tol)
    values = np.full(len(states), complex(np.nan, np.nan))
    if np.any(~escaped):
        values[~escaped] = g.evaluate(states[~escaped])
    return values


def eigen_evolution_check(f, lam, system, t: float, points, method: str = "auto",
                          tol: float = DEFAULT_TOL) -> float:
    """``max |f(Phi_t(pt)) - exp(-i lam t) f(pt)|``; NaN if any point escaped."""
    sys_ = as_flow_system(system)
    g = _on_system_chart(f, sys_)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    moved = koopman_evolve(g, sys_, t, pts, method, tol)
    if np.any(np.isnan(moved)):
        return math.nan
    predicted = np.exp(-1j * complex(lam) * t) * g.evaluate(pts)
    return float(np.max(np.abs(moved - predicted))) if len(pts) else 0.0


# ---------------------------------------------------------------------------
# linearisation
# ---------------------------------------------------------------------------


def monodromy(system, t: float, x0=None, h: float = 1e-6, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``D Phi_t``: exact for linear systems, central differences of the integrated flow otherwise."""
    sys_ = as_flow_system(system)
    if sys_.is_linear:
        return expm(t * sys_.linear_matrix())
    x0 = np.zeros(sys_.dim) if x0 is None else np.asarray(x0, dtype=float)
    M = np.empty((sys_.dim, sys_.dim))
    for j in range(sys_.dim):
        e = np.zeros(sys_.dim)
        e[j] = h
        plus = integrate(sys_, x0 + e, t, tol).final
        minus = integrate(sys_, x0 - e, t, tol).final
        M[:, j] = (plus - minus) / (2 * h)
    return M


def symplectic_form(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_defect(M: np.ndarray) -> float:
    """``max |M^T J M - J|``."""
    J = symplectic_form(M.shape[0] // 2)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def energy_drift(traj: Trajectory, system) -> float:
    sys_ = as_flow_system(system)
    if sys_.hamiltonian is None:
        raise ValueError("system has no Hamiltonian")
    H = sys_.hamiltonian.evaluate(traj.states).real
    return float(np.max(np.abs(H - H[0])))


# ---------------------------------------------------------------------------
# isometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product Gauss-Hermite rule for ``int g(v) dv`` over the whole chart.

    Along axis ``k`` the node ``u`` sits at ``center[k] + scale[k] u``; the
    rule is exact when ``g`` is a polynomial of degree below ``2 n`` times
    ``exp(-sum((v - center)/scale)^2)``.
    """

    nodes: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    center: np.ndarray
    scale: np.ndarray
    exactness_degree: int

    @classmethod
    def gauss_hermite(cls, dim: int, n: int, scale=1.0, center=0.0) -> "QuadratureGrid":
        u, w = np.polynomial.hermite.hermgauss(n)
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (dim,)).copy()
        center = np.broadcast_to(np.asarray(center, dtype=float), (dim,)).copy()
        if np.any(scale <= 0):
            raise ValueError("quadrature scales must be positive")
        nodes, weights = [], []
        for k in range(dim):
            nodes.append(center[k] + scale[k] * u)
            # undo the Hermite weight so the rule integrates g itself
            weights.append(w * np.exp(u**2) * scale[k])
        return cls(tuple(nodes), tuple(weights), center, scale, 2 * n - 1)

    @property
    def dim(self) -> int:
        return len(self.nodes)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.nodes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def point_weights(self) -> np.ndarray:
        mesh = np.meshgrid(*self.weights, indexing="ij")
        return np.prod(np.stack([m.ravel() for m in mesh], axis=-1), axis=-1)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.point_weights() * values))

    def domain(self) -> dict:
        return {"center": self.center.tolist(), "scale": self.scale.tolist(),
                "nodes_per_axis": len(self.nodes[0]), "exactness_degree": self.exactness_degree}


def dressing_widths(f: ExpPoly) -> np.ndarray:
    """Per-axis width ``1/sqrt(2 a_k)`` of ``|f|^2`` for a phase ``-sum a_k v_k^2``; 1 otherwise."""
    dim = f.chart.dim
    widths = np.ones(dim)
    phases = {s for _, s in f.terms}
    if len(phases) != 1:
        return widths
    (phase,) = phases
    for k in range(dim):
        e = [0] * dim
        e[k] = 2
        a = complex(phase.coefficient(e)).real * -1
        if a > 0:
            widths[k] = 1 / math.sqrt(2 * a)
    return widths


def norm_squared(f, grid: QuadratureGrid, transform: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
    f = ExpPoly.coerce(f)
    pts = grid.points()
    if transform is not None:
        pts = transform(pts)
    return float(grid.integrate(np.abs(f.evaluate(pts)) ** 2).real)


def flowed_grid(f, system, t: float, n: int) -> QuadratureGrid:
    """Grid whose axes follow the support of ``f o Phi_t``.

    Axis ``k`` is stretched by ``1 / |column k of D Phi_t|``, which matches
    the pulled-back Gaussian whenever the linearisation is diagonal or
    orthogonal (the presets with closed-form flows).
    """
    sys_ = as_flow_system(system)
    f = _on_system_chart(f, sys_)
    M = monodromy(sys_, t)
    col = np.linalg.norm(M, axis=0)
    return QuadratureGrid.gauss_hermite(sys_.dim, n, dressing_widths(f) / col)


@dataclass(frozen=True)
class IsometryResult:
    defect: float
    norm_before: float
    norm_after: float
    grid: dict


def isometry_check(f, system, t: float, grid: QuadratureGrid | None = None, n: int | None = None,
                   method: str = "auto", tol: float = DEFAULT_TOL, refine_tol: float = 1e-9) -> IsometryResult:
    """``|‖U(t) f‖^2 - ‖f‖^2| / ‖f‖^2`` with both norms by quadrature over ``dv``.

    The after-norm is also computed on a grid with twice the nodes; if the two
    disagree by more than ``refine_tol`` the grid does not resolve the flowed
    support and QuadratureDomainError suggests per-axis scales.
    """
    sys_ = as_flow_system(system)
    f = _on_system_chart(f, sys_)
    deg = max(int(a.degree) for a, _ in f.terms) if not f.is_zero else 0
    if n is None:
        n = deg + 3  # exactness 2n - 1 >= 2 deg + 4
    base = QuadratureGrid.gauss_hermite(sys_.dim, n, dressing_widths(f))
    before = norm_squared(f, base)
    if grid is None:
        grid = flowed_grid(f, sys_, t, n)

    def moved(pts):
        out, escaped = flow_points(sys_, pts, t, method, tol)
        if np.any(escaped):
            raise QuadratureDomainError("flow escapes on quadrature nodes", grid.scale.tolist())
        return out

    after = norm_squared(f, grid, moved)
    fine = QuadratureGrid.gauss_hermite(grid.dim, 2 * len(grid.nodes[0]), grid.scale, grid.center)
    after_fine = norm_squared(f, fine, moved)
    if abs(after_fine - after) > refine_tol * max(abs(after_fine), 1e-300):
        pts = moved(fine.points())
        w = fine.point_weights() * np.abs(f.evaluate(pts)) ** 2
        raw = fine.points()
        second = np.sum(w[:, None] * (raw - fine.center) ** 2, axis=0) / np.sum(w)
        suggested = np.sqrt(2 * second).tolist()
        raise QuadratureDomainError(
            f"quadrature does not resolve U(t)f: {after:.6g} vs {after_fine:.6g} on refinement",
            suggested,
        )
    # compare at matching resolution so that t = 0 reproduces the same nodes
    before = norm_squared(f, QuadratureGrid.gauss_hermite(base.dim, 2 * n, base.scale, base.center))
    defect = abs(after_fine - before) / before if before else 0.0
    return IsometryResult(float(defect), before, after_fine, grid.domain())


# ---------------------------------------------------------------------------
# decay, escape, series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r2: float
    window: tuple[float, float]
    samples: int
    warning: str | None = None


def decay_fit(traj: Trajectory, observable, window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares slope of ``log |obs|`` against ``t``; ``rate = -slope``.

    ``observable`` is a coordinate index, a coordinate name, or a callable on
    the state array.  A sign change inside the window shrinks it to the
    samples before the first change.
    """
    if callable(observable):
        obs = np.asarray(observable(traj.states))
    elif isinstance(observable, str):
        obs = traj.column(observable)
    else:
        obs = traj.states[:, int(observable)]
    t = traj.times
    mask = np.ones(len(t), dtype=bool)
    if window is not None:
        mask &= (t >= min(window)) & (t <= max(window))
    t, obs = t[mask], obs[mask]
    note = None
    if np.isrealobj(obs):
        flips = np.nonzero(np.sign(obs[1:]) * np.sign(obs[:-1]) <= 0)[0]
        if len(flips):
            cut = flips[0] + 1
            note = f"sign change at t={t[cut]:.6g}; window shrunk to {cut} samples"
            warnings.warn(note, RuntimeWarning, stacklevel=2)
            t, obs = t[:cut], obs[:cut]
    if len(t) < 2:
        raise ValueError("need at least two samples with a definite sign to fit a rate")
    y = np.log(np.abs(obs))
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return DecayFit(float(-slope), r2, (float(t[0]), float(t[-1])), len(t), note)


def escape_detect(system, x0: float, direction: int = 1, t_max: float | None = None,
                  tol: float = DEFAULT_TOL, p0: float = 1.0) -> float | None:
    """Signed escape time of the lifted power-damped flow from ``(x0, p0)``, or ``None``.

    The search runs to ``t_max`` (default ``20 / gamma``) in the given direction.
    """
    sys_ = as_flow_system(system)
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    gamma = float(sys_.params.get("gamma", 1)) if sys_.params else 1.0
    horizon = t_max if t_max is not None else 20.0 / gamma
    state = [x0, p0] if sys_.dim == 2 else [x0]
    tr = integrate(sys_, state, direction * abs(horizon), tol)
    return None if tr.escape is None else tr.escape.time


@dataclass(frozen=True)
class PullbackSeries:
    observable: str
    coefficients: list[MultiPolynomial]
    closed_form: list[MultiPolynomial]
    agree: bool
    notes: list[str]


def _series_closed_form(observable: str, chart: CoordinateChart, n: int, gamma, K: int) -> list[MultiPolynomial]:
    """Taylor coefficients in ``t`` of the separable solution.

    ``x(t) = x (1 + (n-1) gamma x^(n-1) t)^(-1/(n-1))`` and ``p(t) = p (x / x(t))^n``;
    for ``n = 1`` both are exponentials.
    """
    x, p = MultiPolynomial.var(chart, "x"), MultiPolynomial.var(chart, "p")
    out = []
    for k in range(K + 1):
        if n == 1:
            c = (-gamma) ** k / sp.factorial(k) if observable == "x" else gamma**k / sp.factorial(k)
            out.append((x if observable == "x" else p) * c)
            continue
        expo = sp.Rational(-1, n - 1) if observable == "x" else sp.Rational(n, n - 1)
        c = sp.binomial(expo, k) * ((n - 1) * gamma) ** k
        lead = x if observable == "x" else p
        out.append(lead * x ** ((n - 1) * k) * c)
    return out


def pullback_series(system, K: int, observable: str = "x") -> PullbackSeries:
    """Coefficients ``L^k(obs) / k!`` of ``e^{t L} obs`` up to ``t^K``, with ``L = {., H}``."""
    sys_ = as_flow_system(system)
    if sys_.hamiltonian is None or sys_.chart.names != ("x", "p"):
        raise ValueError("pullback series needs a lifted one-dimensional system on (x, p)")
    if observable not in ("x", "p"):
        raise ValueError("observable must be 'x' or 'p'")
    H = sys_.hamiltonian
    n = int(sys_.params["n"]) if sys_.params and "n" in sys_.params else 1
    gamma = exact(sys_.params.get("gamma", 1)) if sys_.params else sp.Integer(1)
    term = MultiPolynomial.var(sys_.chart, observable)
    raw = [term]
    for _ in range(K):
        term = poisson_bracket(term, H)
        raw.append(term)
    coeffs = [c / sp.factorial(k) for k, c in enumerate(raw)]
    closed = _series_closed_form(observable, sys_.chart, n, gamma, K)
    agree = all(a == b for a, b in zip(coeffs, closed))
    notes = []
    if n == 2 and observable == "x":
        notes.append("e^{tL}x = x - gamma x^2 t + gamma^2 x^3 t^2 - ... = x/(1 + gamma x t), "
                     "convergent for |gamma x t| < 1; the alternating signs and the leading x "
                     "differ from the printed series gamma x t + (gamma x t)^2 + ...")
    if n == 2 and observable == "p":
        notes.append("e^{tL}p = p (1 + gamma x t)^2 terminates at t^2; it is not e^{2 gamma x t} p")
    return PullbackSeries(observable, coeffs, closed, agree, notes)


@dataclass(frozen=True)
class SeparableCheck:
    derived: str
    derived_residual: sp.Expr
    printed: str
    printed_residual: sp.Expr


def separable_solution_check(n: int) -> SeparableCheck:
    """Substitute candidate solutions into ``dx/dt = -gamma x^n`` (``n >= 2``).

    The derived family ``x = ((n-1) gamma (t - c))^(-1/(n-1))`` has zero
    residual; the printed form with ``+ c`` outside the power does not.
    """
    if n < 2:
        raise ValueError("separable blow-up solutions need n >= 2")
    t, c, g = sp.symbols("t c gamma", positive=True)
    derived = ((n - 1) * g * (t - c)) ** sp.Rational(-1, n - 1)
    printed = ((n - 1) * g * t) ** sp.Rational(-1, n - 1) + c

    def residual(x):
        return sp.simplify(sp.diff(x, t) + g * x**n)

    return SeparableCheck(str(derived), residual(derived), str(printed), residual(printed))
