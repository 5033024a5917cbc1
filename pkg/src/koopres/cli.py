"""Command-line front end: ``koopres <lift|spectrum|evolve|verify|estimate|scale> ...``.

Every subcommand writes JSON (or CSV with ``--format csv``) to ``--out`` or
stdout and exits with 0 only if all requested checks pass.  Sampled points
are seeded from ``KOOPMAN_SEED`` (default 0).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimate as est
from . import flow
from . import quantum as qm
from .errors import DegreeChangingError, KoopresError, PolynomialParseError
from .grammar import format_pretty, identifiers, parse_components, parse_polynomial
from .lift import HamiltonianSystem, VectorField, lift_vector_field
from .liouville import (
    ANALYTIC_PRESETS,
    GradedBasis,
    SpectrumReport,
    analytic_spectrum,
    build_liouville,
    compare_spectra,
    complex_scale,
    selfadjointness_residual,
    spectrum,
    to_complex_chart,
)
from .presets import Preset, get_preset
from .symbolic import CoordinateChart, ExpPoly, MultiPolynomial, exact, gaussian_dressing

SPECTRUM_METHODS = ("matrix", "analytic", "quantum-position", "quantum-momentum", "quantum-both",
                    "quantum-bargmann", "quantum-ccr", "quantum-holomorphic")
SUITES = ("isometry", "eigen-evolution", "selfadjoint", "ccr")


class UsageError(KoopresError):
    pass


def load_schema(name: str) -> dict:
    """Shipped JSON schema, e.g. ``load_schema("spectrum_report")``."""
    text = resources.files("koopres").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def seed() -> int:
    return int(os.environ.get("KOOPMAN_SEED", "0"))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    field: str | None = None
    coords: str | None = None
    system: str | None = None
    gamma: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0
    D: int = 2
    method: str | None = None
    t: float | None = None
    x0: str | None = None
    dt: float | None = None
    steps: int = 1
    tol: float = flow.DEFAULT_TOL
    lam: float | None = None
    poly: str | None = None
    fit: str | None = None
    suite: str = "all"
    input: str | None = None
    out: str | None = None
    format: str = "json"

    def validate(self, needs_system: bool = True):
        if self.gamma < 0 or self.omega < 0:
            raise UsageError("gamma and omega must be non-negative")
        if self.hbar <= 0 or self.mass <= 0:
            raise UsageError("hbar and mass must be positive")
        if self.D < 0:
            raise UsageError("D must be non-negative")
        if self.tol <= 0:
            raise UsageError("tol must be positive")
        if self.dt is not None and self.dt <= 0:
            raise UsageError("dt must be positive")
        sources = [s for s in (self.preset, self.field, self.system) if s is not None]
        if len(sources) > 1:
            raise UsageError("give exactly one of --preset, --field, --system")
        if needs_system and not sources:
            raise UsageError("a system is required: --preset, --field or --system")

    @property
    def params(self) -> dict:
        return {"omega": exact(self.omega), "gamma": exact(self.gamma), "mass": exact(self.mass)}

    def load_preset(self) -> Preset:
        return get_preset(self.preset, **self.params)

    def load_system(self) -> Preset:
        """Preset, lifted ``--field``, or inline JSON (``{"base_coords", "components"}`` or
        ``{"hamiltonian", "base", "momentum"}``)."""
        if self.preset is not None:
            return self.load_preset()
        if self.field is not None:
            X = field_from_text(self.field, self.coords)
            return Preset(X.name or "inline", lift_vector_field(X), {}, X)
        data = json.loads(Path(self.system).read_text()) if Path(self.system).is_file() else json.loads(self.system)
        if "components" in data:
            X = VectorField.from_json(data)
            return Preset(X.name or "inline", lift_vector_field(X), {}, X)
        chart = CoordinateChart.canonical(data["base"], data["momentum"])
        H = parse_polynomial(data["hamiltonian"], chart)
        return Preset(data.get("name", "inline"), HamiltonianSystem.from_hamiltonian(H, data.get("name", "inline")))


def field_from_text(text: str, coords: str | None) -> VectorField:
    if coords:
        names = [c.strip() for c in coords.split(",") if c.strip()]
    else:
        names = identifiers(text) or ["x"]
    comps = parse_components(text, CoordinateChart.plain(names))
    if len(comps) != len(names):
        raise UsageError(f"{len(comps)} components for coordinates {names}; pass --coords")
    return VectorField(tuple(names), tuple(comps), "inline")


def chart_for_poly(text: str, coords: str | None) -> CoordinateChart:
    """``--coords "X;P"`` gives base and momentum names; otherwise (X, P) or (x, p) is inferred."""
    if coords:
        base, _, mom = coords.partition(";")
        return CoordinateChart.canonical([b.strip() for b in base.split(",") if b.strip()],
                                         [m.strip() for m in mom.split(",") if m.strip()])
    names = set(identifiers(text))
    for base, mom in (("X", "P"), ("x", "p")):
        if names <= {base, mom}:
            return CoordinateChart.canonical([base], [mom])
    raise UsageError(f"cannot infer a canonical pair from {sorted(names)}; pass --coords 'X;P'")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def spectrum_csv(report: dict) -> str:
    return _csv_text(["re", "im", "multiplicity", "labels"],
                     [[e["re"], e["im"], e["multiplicity"], ";".join(e["labels"])] for e in report["eigenvalues"]])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_lift(cfg: RunConfig) -> tuple[dict, bool]:
    cfg.validate()
    preset = cfg.load_system()
    system = preset.system
    out = system.to_json()
    out["hamiltonian_pretty"] = format_pretty(system.hamiltonian)
    out["equations_pretty"] = {n: format_pretty(c) for n, c in zip(system.chart.names, system.phase_field)}
    if preset.field is not None:
        out["field"] = preset.field.to_json()
    return out, True


def _matrix_report(preset: Preset, D: int) -> SpectrumReport:
    op = build_liouville(preset.hamiltonian)
    if preset.complex_map is not None:
        op = to_complex_chart(op, preset.complex_map)
    return spectrum(op, GradedBasis(op.chart, D), preset.name)


def spectrum_report(cfg: RunConfig, method: str) -> SpectrumReport:
    w, g, h = exact(cfg.omega), exact(cfg.gamma), exact(cfg.hbar)
    if method == "matrix":
        return _matrix_report(cfg.load_system(), cfg.D)
    if method == "analytic":
        if cfg.preset not in ANALYTIC_PRESETS:
            raise UsageError(f"analytic spectra exist for {', '.join(ANALYTIC_PRESETS)}")
        return analytic_spectrum(cfg.preset, cfg.D, w, g)
    if method in ("quantum-position", "quantum-momentum", "quantum-both"):
        return qm.damped_toy_spectrum(method.split("-")[1], cfg.D, g, h)
    if method == "quantum-bargmann":
        return qm.oscillator_spectrum(cfg.D, w, h)
    if method in ("quantum-ccr", "quantum-holomorphic"):
        return qm.damped_osc_spectrum(cfg.D, method.split("-")[1], w, g, h)
    raise UsageError(f"unknown method {method!r}; choose from {', '.join(SPECTRUM_METHODS)}")


def cmd_spectrum(cfg: RunConfig) -> tuple[dict, bool]:
    methods = [m.strip() for m in (cfg.method or "matrix").split(",") if m.strip()]
    needs = any(m in ("matrix", "analytic") for m in methods)
    cfg.validate(needs_system=needs)
    reports = [spectrum_report(cfg, m) for m in methods]
    if len(reports) == 1:
        return reports[0].to_json(), True
    dev = compare_spectra(reports[0], reports[1])
    return {
        "reports": [r.to_json() for r in reports],
        "diff": {"methods": methods[:2], "max_deviation": None if math.isinf(dev) else dev,
                 "same_multiset_size": not math.isinf(dev)},
    }, True


def _parse_points(text: str) -> list[list[float]]:
    return [[float(v) for v in part.split(",")] for part in text.split(";") if part.strip()]


def cmd_evolve(cfg: RunConfig) -> tuple[object, bool]:
    cfg.validate()
    preset = cfg.load_system()
    if cfg.x0 is None or cfg.t is None:
        raise UsageError("evolve needs --x0 and --t")
    starts = _parse_points(cfg.x0)
    trajs = [flow.integrate(preset, x, cfg.t, cfg.tol, sample_dt=cfg.dt) for x in starts]
    fits = []
    if cfg.fit:
        for tr in trajs:
            f = flow.decay_fit(tr, cfg.fit)
            fits.append({"observable": cfg.fit, "rate": f.rate, "r2": f.r2, "window": list(f.window),
                         "samples": f.samples, "warning": f.warning})
    payload = {"system": preset.name, "trajectories": [tr.metadata() for tr in trajs], "fits": fits}
    return {"trajs": trajs, "json": payload}, True


def _test_functions(chart: CoordinateChart) -> list[ExpPoly]:
    G = gaussian_dressing(chart)
    v = [MultiPolynomial.var(chart, n) for n in chart.names]
    first = v[0]
    last = v[-1]
    return [G * first, G * (first * last + 1), G * (first**2 - last * 2)]


def _eigenpairs(preset: Preset, D: int):
    op = build_liouville(preset.hamiltonian)
    if preset.complex_map is not None:
        op = to_complex_chart(op, preset.complex_map)
    basis = GradedBasis(op.chart, D)
    report = spectrum(op, basis, preset.name)
    for ep in report.eigenpairs:
        for vec, label in zip(ep.vectors, ep.labels):
            yield ep.value, basis.to_poly(vec), label


def run_suite(cfg: RunConfig, suite: str) -> list[dict]:
    checks = []

    def record(name, value, threshold, detail=""):
        ok = value is not None and np.isfinite(value) and value <= threshold
        checks.append({"name": name, "passed": bool(ok), "value": None if value is None else float(value),
                       "threshold": threshold, "detail": detail})

    if suite == "ccr":
        a = qm.bargmann_ladder(cfg.hbar)
        l1, l2 = qm.damped_ladders(cfg.hbar)
        cases = [("[a,a*]", a.lowering, a.raising, 1),
                 ("[a1,a2]", l1.lowering, l2.lowering, 0), ("[a1,a1*]", l1.lowering, l1.raising, 0),
                 ("[a2,a2*]", l2.lowering, l2.raising, 0), ("[a1,a2*]", l1.lowering, l2.raising, 1),
                 ("[a2,a1*]", l2.lowering, l1.raising, 1)]
        for name, x, y, want in cases:
            c = qm.commutator(x, y, 6)
            dev = None if c.scalar is None else abs(complex(c.scalar) - want)
            record(f"ccr {name}", dev, 0.0, f"expected {want}")
        return checks

    preset = cfg.load_system()
    fs = flow.as_flow_system(preset)
    rng = np.random.default_rng(seed())
    pts = rng.uniform(-1, 1, (20, fs.dim))
    if suite == "isometry":
        t = 1.0 if cfg.t is None else cfg.t
        for k, f in enumerate(_test_functions(fs.chart)):
            try:
                res = flow.isometry_check(f, preset, t)
                record(f"isometry f{k} t={t}", res.defect, 1e-6, f"grid {res.grid}")
            except KoopresError as exc:
                record(f"isometry f{k} t={t}", None, 1e-6, str(exc))
    elif suite == "eigen-evolution":
        times = [0.1, 1.0] if cfg.t is None else [cfg.t]
        try:
            pairs = list(_eigenpairs(preset, min(cfg.D, 3)))
        except DegreeChangingError as exc:
            record("eigen-evolution", None, 1e-6, str(exc))
            return checks
        for lam, poly, label in pairs:
            for t in times:
                r = flow.eigen_evolution_check(poly, lam, preset, t, pts)
                record(f"eigen-evolution {label} t={t}", r, 1e-6, f"lambda={lam}")
    elif suite == "selfadjoint":
        op = build_liouville(preset.hamiltonian)
        tf = _test_functions(op.chart)
        for i, f in enumerate(tf):
            for j, g in enumerate(tf):
                r = selfadjointness_residual(op, f, g)
                record(f"selfadjoint <f{i}, iL f{j}>", abs(complex(r)), 1e-12)
    else:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    return checks


def cmd_verify(cfg: RunConfig) -> tuple[dict, bool]:
    suites = list(SUITES) if cfg.suite == "all" else [s.strip() for s in cfg.suite.split(",")]
    cfg.validate(needs_system=any(s != "ccr" for s in suites))
    checks = []
    for s in suites:
        checks.extend(run_suite(cfg, s))
    ok = all(c["passed"] for c in checks)
    return {"system": cfg.preset or "inline", "suites": suites, "seed": seed(), "checks": checks,
            "passed": ok}, ok


def cmd_estimate(cfg: RunConfig) -> tuple[dict, bool]:
    if cfg.input:
        cfg.validate(needs_system=False)
        path = Path(cfg.input)
        trajs = flow.read_ensemble(path) if path.suffix == ".json" else [flow.Trajectory.from_csv(path.read_text())]
        sets = [est.SnapshotSet.from_trajectory(tr) for tr in trajs]
        snaps = est.SnapshotSet(sets[0].dt, np.concatenate([s.X for s in sets]),
                                np.concatenate([s.Y for s in sets]), sets[0].names, {"from": str(path)})
        chart = CoordinateChart.plain(snaps.names)
        name = cfg.preset or "data"
    else:
        cfg.validate()
        preset = cfg.load_system()
        rng = np.random.default_rng(seed())
        ics = rng.uniform(-2, 2, (50, preset.chart.dim))
        snaps = est.collect_snapshots(preset, ics, cfg.dt, cfg.steps, "auto", cfg.tol)
        chart = preset.chart
        name = preset.name
    dictionary = est.Dictionary.monomials(chart, cfg.D)
    fit = est.fit_koopman(snaps, dictionary)
    report = est.recover_generator_spectrum(fit, snaps.dt, system=name)
    out = report.to_json()
    out["seed"] = seed()
    if cfg.preset in ANALYTIC_PRESETS and not cfg.input:
        exact_report = analytic_spectrum(cfg.preset, cfg.D, exact(cfg.omega), exact(cfg.gamma))
        dev = compare_spectra(report, exact_report)
        out["analytic_max_deviation"] = None if math.isinf(dev) else dev
    return out, True


def cmd_scale(cfg: RunConfig) -> tuple[dict, bool]:
    if cfg.lam is None:
        raise UsageError("scale needs --lambda")
    if cfg.poly is not None:
        cfg.validate(needs_system=False)
        chart = chart_for_poly(cfg.poly, cfg.coords)
        target = parse_polynomial(cfg.poly, chart)
    else:
        cfg.validate()
        target = cfg.load_system().hamiltonian
    scaled = complex_scale(target, exact(cfg.lam))
    return {"lambda": cfg.lam, "chart": target.chart.to_json(), "before": target.to_text(),
            "after": scaled.to_text(), "before_pretty": format_pretty(target),
            "after_pretty": format_pretty(scaled)}, True


COMMANDS = {"lift": cmd_lift, "spectrum": cmd_spectrum, "evolve": cmd_evolve, "verify": cmd_verify,
            "estimate": cmd_estimate, "scale": cmd_scale}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="koopres", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset")
        p.add_argument("--field", help="comma-separated base vector field components")
        p.add_argument("--coords", help="coordinate names: 'x1,x2' for --field, 'X;P' for --poly")
        p.add_argument("--system", help="inline JSON system or path to one")
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--omega", type=float, default=1.0)
        p.add_argument("--hbar", type=float, default=1.0)
        p.add_argument("--mass", type=float, default=1.0)
        p.add_argument("--D", type=int, default=None)
        p.add_argument("--method")
        p.add_argument("--t", type=float)
        p.add_argument("--x0", help="comma-separated state; ';' separates several")
        p.add_argument("--dt", type=float, help="snapshot step (estimate, default 0.1) or output spacing (evolve)")
        p.add_argument("--steps", type=int, default=1)
        p.add_argument("--tol", type=float, default=flow.DEFAULT_TOL)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--poly")
        p.add_argument("--fit")
        p.add_argument("--suite", default="all")
        p.add_argument("--input", help="trajectory CSV or ensemble index.json")
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"), default=None)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    command = d.pop("command")
    if d["D"] is None:
        d["D"] = 3 if command == "estimate" else 2
    if d["format"] is None:
        d["format"] = "csv" if command == "evolve" else "json"
    if d["dt"] is None and command == "estimate":
        d["dt"] = 0.1
    return RunConfig(command, **d)


def _write_evolve(cfg: RunConfig, result: dict):
    trajs, payload = result["trajs"], result["json"]
    if cfg.format == "json":
        payload = dict(payload)
        payload["data"] = [{"header": ["t", *tr.names], "rows": np.column_stack([tr.times, tr.states]).tolist()}
                           for tr in trajs]
        emit(json.dumps(payload, indent=2), cfg.out)
        return
    if len(trajs) > 1:
        if not cfg.out:
            raise UsageError("several initial conditions need --out DIRECTORY")
        index = flow.write_ensemble(trajs, cfg.out)
        if payload["fits"]:
            (index.parent / "fits.json").write_text(json.dumps(payload["fits"], indent=2))
        return
    emit(trajs[0].to_csv(), cfg.out)
    if payload["fits"]:
        text = json.dumps(payload["fits"][0], indent=2)
        if cfg.out:
            Path(str(cfg.out) + ".fit.json").write_text(text + "\n")
            sys.stdout.write(text + "\n")
        else:
            sys.stderr.write(text + "\n")


VALUE_OPTIONS = ("--field", "--poly", "--x0", "--lambda", "--system", "--t", "--gamma", "--omega")


def _join_negative_values(argv: list[str]) -> list[str]:
    """``--field -0.5*x`` becomes ``--field=-0.5*x`` so argparse does not read it as a flag."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and not argv[i + 1].startswith("--"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = build_parser().parse_args(_join_negative_values(argv))
    cfg = config_from_args(ns)
    try:
        result, ok = COMMANDS[cfg.command](cfg)
    except PolynomialParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return 2
    except DegreeChangingError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except (KoopresError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    if cfg.command == "evolve":
        _write_evolve(cfg, result)
    elif cfg.format == "csv":
        if "eigenvalues" in result:
            emit(spectrum_csv(result), cfg.out)
        elif "checks" in result:
            emit(_csv_text(["name", "passed", "value", "threshold"],
                           [[c["name"], c["passed"], c["value"], c["threshold"]] for c in result["checks"]]),
                 cfg.out)
        else:
            raise SystemExit(f"no CSV form for {cfg.command}; use --format json")
    else:
        emit(json.dumps(result, indent=2), cfg.out)
    return 0 if ok else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
