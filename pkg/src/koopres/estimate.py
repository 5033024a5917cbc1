"""Least-squares Koopman estimates from snapshot pairs (EDMD).

Given pairs ``(x, Phi_dt(x))`` and a dictionary ``psi``, the fitted ``K``
satisfies ``psi(Phi_dt(x)) ~ psi(x) K`` row by row.  Its eigenvalues
``kappa = exp(-i lam dt)`` give generator eigenvalues ``lam = i log(kappa) / dt``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import IllConditionedDictionaryError
from .flow import DEFAULT_TOL, Trajectory, as_flow_system, flow_points
from .liouville import Eigenpair, GradedBasis, SpectrumReport, cluster_eigenvalues
from .symbolic import CoordinateChart, ExpPoly, gaussian_dressing

GRAM_COND_LIMIT = 1e10
EDMD_CLUSTER_TOL = 1e-6


@dataclass
class SnapshotSet:
    dt: float
    X: np.ndarray
    Y: np.ndarray
    names: tuple[str, ...]
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("snapshot spacing must be positive")
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if self.X.shape != self.Y.shape:
            raise ValueError("snapshot arrays differ in shape")
        if self.X.shape[1] != len(self.names):
            raise ValueError("snapshot dimension does not match coordinate names")

    def __len__(self):
        return len(self.X)

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> "SnapshotSet":
        """Consecutive samples of a uniformly sampled trajectory (e.g. read from CSV)."""
        steps = np.diff(traj.times)
        if not len(steps):
            raise ValueError("trajectory has a single sample")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("trajectory is not uniformly sampled")
        return cls(float(steps[0]), traj.states[:-1], traj.states[1:], traj.names, {"from": "trajectory"})


@dataclass
class Dictionary:
    chart: CoordinateChart
    elements: list[ExpPoly]
    labels: list[str]
    degree: int | None = None

    @classmethod
    def monomials(cls, chart: CoordinateChart, degree: int, dressed: bool = False) -> "Dictionary":
        basis = GradedBasis(chart, degree, dressed)
        elements = [basis.element(e) for e in basis.elements]
        return cls(chart, elements, [basis.label(e) for e in basis.elements], degree)

    @classmethod
    def from_polys(cls, polys: Sequence, labels: Sequence[str] | None = None) -> "Dictionary":
        elements = [ExpPoly.coerce(p) for p in polys]
        chart = elements[0].chart
        return cls(chart, elements, list(labels) if labels else [e.to_text() for e in elements])

    def __len__(self):
        return len(self.elements)

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([e.evaluate(pts) for e in self.elements], axis=-1)

    def gram_condition(self, points) -> float:
        Psi = self.evaluate(points)
        return float(np.linalg.cond(Psi.conj().T @ Psi))


def collect_snapshots(system, initial_conditions, dt: float, steps: int = 1, method: str = "auto",
                      tol: float = DEFAULT_TOL) -> SnapshotSet:
    """Pairs ``(x, Phi_dt(x))`` along each trajectory for ``steps`` steps.

    A trajectory that escapes stops contributing at the escaping step and a
    warning is emitted.
    """
    sys_ = as_flow_system(system)
    current = np.atleast_2d(np.asarray(initial_conditions, dtype=float))
    alive = np.ones(len(current), dtype=bool)
    X, Y = [], []
    for _ in range(steps):
        nxt, escaped = flow_points(sys_, current[alive], dt, method, tol)
        ok = ~escaped
        X.append(current[alive][ok])
        Y.append(nxt[ok])
        if np.any(escaped):
            warnings.warn(f"{int(escaped.sum())} trajectories escaped during sampling", RuntimeWarning,
                          stacklevel=2)
        idx = np.nonzero(alive)[0]
        current[idx[ok]] = nxt[ok]
        alive[idx[escaped]] = False
        if not alive.any():
            break
    X = np.concatenate(X) if X else np.empty((0, sys_.dim))
    Y = np.concatenate(Y) if Y else np.empty((0, sys_.dim))
    return SnapshotSet(dt, X, Y, sys_.chart.names,
                       {"system": sys_.name, "initial_conditions": len(current), "steps": steps,
                        "flow": method})


@dataclass(frozen=True)
class KoopmanFit:
    K: np.ndarray
    condition_number: float
    dt: float
    labels: list[str]
    dict_degree: int | None


def fit_koopman(snapshots: SnapshotSet, dictionary: Dictionary) -> KoopmanFit:
    if tuple(dictionary.chart.names) != tuple(snapshots.names):
        raise ValueError(f"dictionary on {dictionary.chart.names}, snapshots on {snapshots.names}")
    PX = dictionary.evaluate(snapshots.X)
    PY = dictionary.evaluate(snapshots.Y)
    if len(snapshots) < len(dictionary):
        raise IllConditionedDictionaryError(
            f"{len(snapshots)} snapshot pairs for {len(dictionary)} dictionary elements", math.inf)
    cond = float(np.linalg.cond(PX.conj().T @ PX))
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise IllConditionedDictionaryError(
            f"dictionary Gram matrix has condition number {cond:.3e} (limit {GRAM_COND_LIMIT:.0e})", cond)
    K, *_ = np.linalg.lstsq(PX, PY, rcond=None)
    return KoopmanFit(K, cond, snapshots.dt, list(dictionary.labels), dictionary.degree)


def fit_koopman_matrix(snapshots: SnapshotSet, dictionary: Dictionary) -> np.ndarray:
    """``K`` minimising ``sum |psi(x') - psi(x) K|^2`` via an orthogonal least-squares solve."""
    return fit_koopman(snapshots, dictionary).K


def recover_generator_spectrum(K, dt: float, *, dict_degree: int | None = None,
                               condition_number: float | None = None, system: str = "",
                               tol: float = EDMD_CLUSTER_TOL, wrap_margin: float = 0.05) -> SpectrumReport:
    """``lam = i log(kappa) / dt`` on the principal branch.

    Eigenvalues with ``|arg kappa| > (1 - wrap_margin) pi`` are flagged as
    possibly aliased; ``kappa = 0`` is dropped with a note.
    """
    if isinstance(K, KoopmanFit):
        dict_degree = K.dict_degree if dict_degree is None else dict_degree
        condition_number = K.condition_number if condition_number is None else condition_number
        K = K.K
    K = np.asarray(K, dtype=complex)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    kappa = np.linalg.eigvals(K)
    notes = []
    keep = np.abs(kappa) > 1e-14
    if not np.all(keep):
        notes.append(f"{int((~keep).sum())} zero eigenvalues of K excluded")
    kappa = kappa[keep]
    logs = np.log(kappa)
    lam = 1j * logs / dt
    aliased = np.abs(logs.imag) > (1 - wrap_margin) * math.pi
    if np.any(aliased):
        notes.append(f"{int(aliased.sum())} eigenvalues near the branch cut; omega*dt may exceed pi")
    pairs = []
    for idx in cluster_eigenvalues(list(lam), tol):
        value = complex(np.mean(lam[idx]))
        labels = ["aliased"] if np.any(aliased[idx]) else []
        pairs.append(Eigenpair(value, len(idx), [], labels))
    meta = {
        "dt": float(dt),
        "dict_degree": dict_degree,
        "condition_number": condition_number,
        "aliasing_guard": {
            "rule": "omega*dt < pi",
            "max_abs_arg": float(np.max(np.abs(logs.imag))) if len(logs) else 0.0,
            "flagged": int(aliased.sum()),
        },
    }
    if notes:
        meta["notes"] = notes
    return SpectrumReport(pairs, "edmd", system, {"D": dict_degree}, meta)


def edmd_spectrum(system, D: int, dt: float, initial_conditions=None, steps: int = 1, *, seed: int = 0,
                  n_points: int = 50, box: float = 2.0, dressed: bool = False, method: str = "auto",
                  tol: float = DEFAULT_TOL) -> SpectrumReport:
    """Sample, fit and convert in one call; points default to a seeded uniform box."""
    sys_ = as_flow_system(system)
    if initial_conditions is None:
        rng = np.random.default_rng(seed)
        initial_conditions = rng.uniform(-box, box, (n_points, sys_.dim))
    snaps = collect_snapshots(sys_, initial_conditions, dt, steps, method, tol)
    dictionary = Dictionary.monomials(sys_.chart, D, dressed)
    fit = fit_koopman(snaps, dictionary)
    return recover_generator_spectrum(fit, dt, system=sys_.name)


def dressed_dictionary(chart: CoordinateChart, degree: int, scale=0.5) -> Dictionary:
    d = Dictionary.monomials(chart, degree)
    g = gaussian_dressing(chart, scale)
    return Dictionary(chart, [e * g for e in d.elements], [f"{lbl}*G" for lbl in d.labels], degree)
