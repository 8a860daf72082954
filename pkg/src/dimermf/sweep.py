"""Parameter sweeps over the available solvers, with figure presets.

A sweep evaluates every ``(method, observable)`` pair at each grid value of
one control parameter.  Energies are reported per pair in units of ``Jx``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import entanglement as ent
from . import exactdiag, freefermion, meanfield, pairmf, perturbation
from .model import (Boundary, GaugeRecord, SystemSpec, Topology, canonicalize,
                    effective_alpha, spec_from_config, spec_to_config)

METHODS = ("mf", "gmf", "gmf_p", "freefermion", "ed")
EXACT_METHODS = ("freefermion", "ed")
BASE_OBSERVABLES = ("energy", "theta", "phi", "phase", "S_rho12", "S_rho1", "S_rho23",
                    "C12", "C23", "fidelity12", "crossings", "Bc1", "Bc2", "Bs",
                    "Bc1_ex", "Bc2_ex")
SWEEP_VARIABLES = ("B", "alpha", "Jz")

_DENSITY_OBS = {"S_rho12", "S_rho1", "S_rho23", "C12", "C23", "fidelity12"}
SUPPORT = {
    "mf": {"energy", "theta", "Bs"} | _DENSITY_OBS,
    "gmf": {"energy", "theta", "phi", "phase", "Bc1", "Bc2"} | _DENSITY_OBS,
    "gmf_p": _DENSITY_OBS | {"spectrum"},
    "freefermion": {"energy", "crossings", "Bc1_ex", "Bc2_ex"} | (_DENSITY_OBS - {"fidelity12"}),
    "ed": {"energy", "crossings", "spectrum"} | (_DENSITY_OBS - {"fidelity12"}),
}


class ConfigError(ValueError):
    """Invalid or inconsistent sweep configuration."""


class SolverFailure(RuntimeError):
    """A method raised while evaluating a grid point."""


@dataclass(frozen=True)
class SweepConfig:
    spec: SystemSpec
    sweep_variable: str = "B"
    grid: tuple[float, float, int] = (0.0, 1.0, 11)
    methods: tuple[str, ...] = ("gmf",)
    observables: tuple[str, ...] = ("energy",)
    overlap_mode: str = "neglect"
    variants: tuple = ()
    name: str = "sweep"

    def grid_values(self) -> np.ndarray:
        start, stop, points = self.grid
        return np.linspace(start, stop, int(points))


def _observable_kind(obs: str) -> str:
    return "spectrum" if obs.startswith("spectrum:") else obs


def _spectrum_index(obs: str) -> int:
    try:
        k = int(obs.split(":", 1)[1])
    except ValueError as exc:
        raise ConfigError(f"bad spectrum observable {obs!r}; use spectrum:<k>") from exc
    if k < 1:
        raise ConfigError("spectrum index must be >= 1")
    return k


def method_precondition(method: str, spec: SystemSpec) -> str | None:
    """Reason ``method`` cannot run on ``spec``, or None."""
    analytic = method in ("mf", "gmf", "gmf_p")
    if analytic:
        if spec.boundary is not Boundary.CYCLIC:
            return "analytic methods need a cyclic system"
        if not abs(spec.jy) < spec.jx:
            return "analytic methods need |Jy| < Jx"
        if spec.jz != 0.0 and spec.topology is not Topology.CHAIN:
            return "Jz is only supported for chains in analytic methods"
        if min(spec.alphas) < 0:
            return "analytic methods need nonnegative inter-pair couplings"
    if method == "gmf_p":
        if spec.topology is not Topology.CHAIN:
            return "perturbative corrections are implemented for chains only"
        if spec.pair_count < 2:
            return "perturbative corrections need at least two pairs"
    if method == "freefermion":
        if spec.topology is not Topology.CHAIN or spec.boundary is not Boundary.CYCLIC:
            return "free fermions need a cyclic chain"
        if spec.jz != 0.0:
            return "free fermions need Jz = 0"
    if method == "ed" and spec.n_sites > exactdiag.MAX_SITES:
        return f"exact diagonalization is capped at {exactdiag.MAX_SITES} spins"
    return None


def apply_value(spec: SystemSpec, variable: str, value: float) -> SystemSpec:
    value = float(value)
    if variable == "B":
        return spec.replace(b=value)
    if variable == "Jz":
        return spec.replace(jz=value)
    if variable == "alpha":
        if spec.topology is Topology.CHAIN:
            return spec.replace(alphas=(value,))
        total = effective_alpha(spec)
        if total == 0:
            raise ConfigError("alpha sweep on a ladder/lattice needs a nonzero base alpha")
        return spec.replace(alphas=tuple(a * value / total for a in spec.alphas))
    raise ConfigError(f"unknown sweep variable {variable!r}")


def _variant_specs(config: SweepConfig) -> list[tuple[str, SystemSpec]]:
    if not config.variants:
        return [("", config.spec)]
    out = []
    for label, overrides in config.variants:
        merged = dict(spec_to_config(config.spec))
        merged.update({k: str(v) for k, v in overrides.items()})
        out.append((label, spec_from_config(merged, config.spec)))
    return out


def _sample_specs(spec: SystemSpec, config: SweepConfig):
    vals = config.grid_values()
    return [apply_value(spec, config.sweep_variable, vals[0]),
            apply_value(spec, config.sweep_variable, vals[-1])]


def resolve_columns(config: SweepConfig):
    """Validate the configuration and return ``[(variant, spec, method, obs)]``."""
    if config.sweep_variable not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
    if int(config.grid[2]) < 2:
        raise ConfigError("a sweep grid needs at least 2 points")
    if config.overlap_mode not in ("neglect", "keep"):
        raise ConfigError("overlap must be 'keep' or 'neglect'")
    for m in config.methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
    for o in config.observables:
        kind = _observable_kind(o)
        if kind == "spectrum":
            _spectrum_index(o)
        elif kind not in BASE_OBSERVABLES:
            raise ConfigError(f"unknown observable {o!r}")
    columns = []
    for label, base in _variant_specs(config):
        canon, _ = canonicalize(base)
        for m in config.methods:
            reasons = {method_precondition(m, canonicalize(s)[0])
                       for s in _sample_specs(canon, config)} - {None}
            if reasons:
                raise ConfigError(f"method {m}{'[' + label + ']' if label else ''}: "
                                  + "; ".join(sorted(reasons)))
            for o in config.observables:
                kind = _observable_kind(o)
                if kind not in SUPPORT[m]:
                    continue
                if kind == "fidelity12" and not _reference_method(config.methods, canon):
                    continue
                columns.append((label, base, m, o))
    for o in config.observables:
        if not any(c[3] == o for c in columns):
            raise ConfigError(f"no selected method provides observable {o!r}")
    return columns


def _reference_method(methods, spec: SystemSpec) -> str | None:
    for m in EXACT_METHODS:
        if m in methods and method_precondition(m, spec) is None:
            return m
    return None


def column_name(label: str, method: str, obs: str) -> str:
    return f"{method}[{label}]:{obs}" if label else f"{method}:{obs}"


# ---------------------------------------------------------------------------
# per-point evaluation


class _Point:
    """Lazily computed quantities of one method at one canonical spec."""

    def __init__(self, spec: SystemSpec, overlap_mode: str, diagnostics: dict):
        self.spec = spec
        self.overlap = overlap_mode
        self.diag = diagnostics
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # solver handles
    def gmf(self):
        def run():
            sol = pairmf.pairmf_solve(self.spec)
            if sol.fallback:
                self.diag["gmf_fallbacks"] = self.diag.get("gmf_fallbacks", 0) + 1
            return sol
        return self._memo("gmf", run)

    def mf(self):
        return self._memo("mf", lambda: meanfield.mf_solve(self.spec))

    def ed(self):
        def run():
            gs = exactdiag.gs_observables(self.spec)
            res = max(r.residual for r in gs.sectors.values())
            self.diag["ed_max_residual"] = max(self.diag.get("ed_max_residual", 0.0), res)
            return gs
        return self._memo("ed", run)

    def ed_levels(self, count):
        def run():
            lv = [exactdiag.lowest_states(self.spec, p, count).energies for p in (1, -1)]
            return np.sort(np.concatenate(lv))
        return self._memo(("edlv", count), run)

    # densities: (rho12, rho1, rho23)
    def densities(self, method):
        return self._memo(("rho", method), lambda: self._densities(method))

    def _densities(self, method):
        s = self.spec
        if method == "mf":
            rho12, rho1 = meanfield.mf_restored_states(self.mf().theta)
            return rho12, rho1, rho12
        if method == "gmf":
            sol = self.gmf()
            if self.overlap == "neglect":
                return ent.gmf_reduced_states(sol.theta, sol.phi)
            states = [sol.state] * s.pair_count
            r12 = ent.restore_parity(states, "keep", group=(0,)).density
            r2 = ent.restore_parity(states, "keep", group=(0, 1)).density
            return r12, ent.partial_trace(r12, [0]), ent.partial_trace(r2, [1, 2])
        if method == "gmf_p":
            r12 = perturbation.perturbed_cluster_density(s)
            r23 = perturbation.perturbed_cross_pair_density(s)
            return r12, ent.partial_trace(r12, [0]), r23
        if method == "freefermion":
            p = freefermion.ground_parity(s)
            return (freefermion.exact_rdm(s, p, [0, 1]), freefermion.exact_rdm(s, p, [0]),
                    freefermion.exact_rdm(s, p, [1, 2]))
        if method == "ed":
            gs = self.ed()
            return gs.rdm([0, 1]), gs.rdm([0]), gs.rdm([1, 2])
        raise AssertionError(method)

    def value(self, method: str, obs: str, reference: str | None):
        s = self.spec
        kind = _observable_kind(obs)
        jx = s.jx
        if kind in ("S_rho12", "S_rho1", "S_rho23", "C12", "C23"):
            rho12, rho1, rho23 = self.densities(method)
            return {"S_rho12": lambda: ent.entropy(rho12),
                    "S_rho1": lambda: ent.entropy(rho1),
                    "S_rho23": lambda: ent.entropy(rho23),
                    "C12": lambda: ent.concurrence(rho12),
                    "C23": lambda: ent.concurrence(rho23)}[kind]()
        if kind == "fidelity12":
            return ent.fidelity(self.densities(method)[0], self.densities(reference)[0])
        if kind == "energy":
            if method == "mf":
                return self.mf().energy_per_pair / jx
            if method == "gmf":
                return self.gmf().energy_per_pair / jx
            if method == "freefermion":
                e = freefermion.sector_energies(s)
                return min(e.values()) / s.pair_count / jx
            return self.ed().energy / s.pair_count / jx
        if kind == "theta":
            return (self.mf() if method == "mf" else self.gmf()).theta
        if kind == "phi":
            return self.gmf().phi
        if kind == "phase":
            return self.gmf().phase.value
        if kind in ("Bc1", "Bc2"):
            v = pairmf.critical_fields(s)[0 if kind == "Bc1" else 1]
            return math.nan if v is None else v
        if kind in ("Bc1_ex", "Bc2_ex"):
            v = freefermion.exact_critical_fields(s)[0 if kind == "Bc1_ex" else 1]
            return math.nan if v is None else v
        if kind == "Bs":
            v = meanfield.factorizing_field(s)
            return math.nan if v is None else v
        if kind == "crossings":
            if method == "freefermion":
                return freefermion.ground_parity(s)
            return self.ed().parity
        if kind == "spectrum":
            k = _spectrum_index(obs)
            if method == "gmf_p":
                if self.gmf().phase is pairmf.Phase.PARITY_BREAKING:
                    return math.nan
                levels = np.sort(np.concatenate(
                    [perturbation.excitation_band(s, q) for q in range(s.pair_count)]))
                return float(levels[k - 1]) / jx if k <= levels.size else math.nan
            levels = self.ed_levels(k + 1)
            return float(levels[k] - levels[0]) / jx
        raise AssertionError(obs)


@dataclass
class SweepResult:
    header: list[str]
    rows: list[list]
    manifest: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows])


def _gauge_dict(record: GaugeRecord) -> dict:
    return {"sign_flips": sorted(record.sign_flips),
            "site_rotations": [list(r) for r in record.site_rotations],
            "warnings": list(record.warnings)}


def run_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    """Evaluate all supported columns on the grid; rows ordered by grid index."""
    columns = resolve_columns(config)
    values = config.grid_values()
    diagnostics: dict = {}
    variant_specs = {}
    for label, base, _, _ in columns:
        variant_specs[label] = base

    def evaluate(x):
        points = {}
        row = [float(x)]
        for label, base, method, obs in columns:
            if label not in points:
                canon, _ = canonicalize(apply_value(base, config.sweep_variable, x))
                points[label] = _Point(canon, config.overlap_mode, diagnostics)
            pt = points[label]
            ref = _reference_method(config.methods, pt.spec)
            try:
                row.append(pt.value(method, obs, ref))
            except Exception as exc:  # surfaced as a solver failure with context
                raise SolverFailure(f"{column_name(label, method, obs)} at "
                                    f"{config.sweep_variable}={x:g}: {exc}") from exc
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, values))
    else:
        rows = [evaluate(x) for x in values]

    header = [config.sweep_variable] + [column_name(lb, m, o) for lb, _, m, o in columns]
    manifest = {
        "tool": "dimermf",
        "version": __version__,
        "name": config.name,
        "sweep": {"variable": config.sweep_variable, "start": float(config.grid[0]),
                  "stop": float(config.grid[1]), "points": int(config.grid[2])},
        "methods": list(config.methods),
        "observables": list(config.observables),
        "overlap": config.overlap_mode,
        "energy_units": "Jx",
        "spec": spec_to_config(config.spec),
        "variants": {},
        "diagnostics": diagnostics,
    }
    for label, base in variant_specs.items():
        canon, record = canonicalize(base)
        entry = {"spec": spec_to_config(base), "gauge": _gauge_dict(record)}
        if method_precondition("gmf", canon) is None:
            bc1, bc2 = pairmf.critical_fields(canon)
            entry["critical_fields"] = {"Bc1": bc1, "Bc2": bc2,
                                        "Bs": meanfield.factorizing_field(canon)}
        if ("crossings" in config.observables and "freefermion" in config.methods
                and config.sweep_variable == "B"
                and method_precondition("freefermion", canon) is None):
            lo, hi = float(values[0]), float(values[-1])
            entry["parity_crossings"] = freefermion.parity_crossings(canon, (lo, hi))
        manifest["variants"][label or "default"] = entry
    return SweepResult(header, rows, manifest)


# ---------------------------------------------------------------------------
# comparison against exact methods


@dataclass
class CompareReport:
    header: list[str]
    rows: list[list]
    checks: list[dict]
    manifest: dict

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)


APPROX_METHODS = ("mf", "gmf", "gmf_p")
FIDELITY_THRESHOLD = 0.99
# single-spin mean field is reported but not held to the fidelity threshold
FIDELITY_CHECKED = ("gmf", "gmf_p")
ENERGY_SLACK = 1e-9


def compare(config: SweepConfig, threads: int = 1) -> CompareReport:
    """Energy deltas per pair and pair fidelities of approximate vs exact methods."""
    exact = [m for m in config.methods if m in EXACT_METHODS]
    approx = [m for m in config.methods if m in APPROX_METHODS]
    if not exact or not approx:
        raise ConfigError("compare needs at least one exact and one approximate method")
    observables = ["energy", "fidelity12"]
    cfg = SweepConfig(config.spec, config.sweep_variable, config.grid,
                      tuple(config.methods), tuple(observables), config.overlap_mode,
                      config.variants, config.name)
    result = run_sweep(cfg, threads)
    ref = exact[0]
    header = [config.sweep_variable]
    rows = [[r[0]] for r in result.rows]
    checks = []
    labels = [lb for lb, _ in _variant_specs(config)]
    for label in labels:
        e_ref = result.column(column_name(label, ref, "energy"))
        deltas = {}
        for m in approx:
            ename = column_name(label, m, "energy")
            if ename in result.header:
                d = result.column(ename) - e_ref
                deltas[m] = d
                header.append(f"dE/n[{m}{'|' + label if label else ''}]")
                for row, v in zip(rows, d):
                    row.append(float(v))
                checks.append({"check": f"variational {m}{'[' + label + ']' if label else ''}",
                               "pass": bool(np.all(d >= -ENERGY_SLACK)),
                               "worst": float(d.min())})
            fname = column_name(label, m, "fidelity12")
            if fname in result.header:
                f = result.column(fname)
                header.append(f"F12[{m}{'|' + label if label else ''}]")
                for row, v in zip(rows, f):
                    row.append(float(v))
                if m not in FIDELITY_CHECKED:
                    continue
                checks.append({"check": f"fidelity {m}{'[' + label + ']' if label else ''}",
                               "pass": bool(np.all(f >= FIDELITY_THRESHOLD)),
                               "worst": float(f.min())})
        if "mf" in deltas and "gmf" in deltas:
            gap = deltas["mf"] - deltas["gmf"]
            checks.append({"check": f"gmf below mf{'[' + label + ']' if label else ''}",
                           "pass": bool(np.all(gap >= -ENERGY_SLACK)),
                           "worst": float(gap.min())})
    manifest = dict(result.manifest)
    manifest["compare"] = {"reference": ref, "checks": checks,
                           "fidelity_threshold": FIDELITY_THRESHOLD,
                           "energy_slack": ENERGY_SLACK}
    return CompareReport(header, rows, checks, manifest)


# ---------------------------------------------------------------------------
# figure presets


def _chain(**kw) -> dict:
    base = {"topology": "chain", "boundary": "cyclic", "jx": 1.0, "jy": 0.5, "jz": 0.0,
            "alpha1": 0.1}
    base.update(kw)
    return base


PRESETS: dict[str, dict] = {
    "fig2": {
        "spec": _chain(n_pairs=50),
        "sweep": "B", "grid": (0.0, 0.8, 81),
        "methods": ("gmf",), "observables": ("phase", "theta"),
        "variants": tuple((f"alpha={a:g}", {"alpha1": a})
                          for a in (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5)),
    },
    "fig3": {
        "spec": _chain(n_pairs=50),
        "sweep": "B", "grid": (0.0, 1.0, 101),
        "methods": ("mf", "gmf", "gmf_p", "freefermion"),
        "observables": ("S_rho12", "S_rho1", "S_rho23"),
    },
    "fig4": {
        "spec": _chain(n_pairs=50),
        "sweep": "B", "grid": (0.0, 1.0, 101),
        "methods": ("mf", "gmf", "gmf_p", "freefermion"),
        "observables": ("C12", "C23", "fidelity12"),
    },
    "fig5": {
        "spec": _chain(n_pairs=4),
        "sweep": "B", "grid": (0.0, 1.0, 51),
        "methods": ("ed", "gmf_p"),
        "observables": ("spectrum:1", "spectrum:2", "spectrum:3", "spectrum:4"),
    },
    "fig5-top": {
        "spec": _chain(n_pairs=50),
        "sweep": "B", "grid": (0.0, 1.0, 101),
        "methods": ("freefermion", "mf", "gmf"),
        "observables": ("energy", "fidelity12"),
    },
    "fig7": {
        "spec": _chain(n_pairs=8, alpha1=0.2),
        "sweep": "B", "grid": (0.0, 1.0, 21),
        "methods": ("ed",), "observables": ("C12", "S_rho12"),
        "variants": (
            ("chain", {}),
            ("ladder", {"topology": "ladder", "n_pairs": 8, "alpha1": 0.05,
                        "alpha2": 0.05, "alpha3": 0.05}),
            ("lattice", {"topology": "lattice", "n_pairs": "2x4", "alpha1": 0.2 / 3,
                         "alpha2": 0.2 / 3}),
        ),
    },
    "fig8": {
        "spec": _chain(n_pairs=50),
        "sweep": "B", "grid": (0.0, 1.0, 101),
        "methods": ("gmf",), "observables": ("theta",),
        "variants": tuple((f"Jz={z:g}", {"jz": z}) for z in (-0.4, -0.2, 0.0, 0.2, 0.4)),
    },
    "fig9": {
        "spec": _chain(n_pairs=8),
        "sweep": "B", "grid": (0.0, 1.0, 21),
        "methods": ("ed", "gmf"), "observables": ("S_rho12", "C12", "energy"),
        "variants": tuple((f"Jz={z:g}", {"jz": z}) for z in (-0.2, 0.2)),
    },
}


def build_config(file_keys: dict[str, str] | None = None,
                 figure: str | None = None,
                 overrides: dict[str, str] | None = None,
                 methods=None, observables=None, overlap=None) -> SweepConfig:
    """Merge preset, config-file keys and ``--set`` overrides into a SweepConfig.

    A key fixed by the preset may not be given a different value by the
    file or the overrides.
    """
    file_keys = dict(file_keys or {})
    overrides = dict(overrides or {})
    user = dict(file_keys)
    for k, v in overrides.items():
        user[k] = v
    keys: dict[str, str] = {}
    variants = ()
    name = "sweep"
    if figure is not None:
        if figure not in PRESETS:
            raise ConfigError(f"unknown figure {figure!r}; choose from {sorted(PRESETS)}")
        pre = PRESETS[figure]
        fixed = {k: str(v) for k, v in pre["spec"].items()}
        fixed["sweep"] = pre["sweep"]
        fixed["grid"] = ":".join(str(v) for v in pre["grid"])
        fixed["methods"] = ",".join(pre["methods"])
        fixed["observables"] = ",".join(pre["observables"])
        for k, v in user.items():
            if k in fixed and not _same(fixed[k], v):
                raise ConfigError(f"--figure {figure} fixes {k}={fixed[k]}; got {k}={v}")
        keys.update(fixed)
        variants = pre.get("variants", ())
        name = figure
    keys.update(user)
    if methods:
        _conflict(keys, "methods", ",".join(methods), figure)
        keys["methods"] = ",".join(methods)
    if observables:
        _conflict(keys, "observables", ",".join(observables), figure)
        keys["observables"] = ",".join(observables)
    if overlap:
        keys["overlap"] = overlap
    try:
        spec = spec_from_config(keys)
        grid = _parse_grid(keys.get("grid", "0:1:11"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return SweepConfig(
        spec=spec,
        sweep_variable=keys.get("sweep", "B"),
        grid=grid,
        methods=tuple(_split(keys.get("methods", "gmf"))),
        observables=tuple(_split(keys.get("observables", "energy"))),
        overlap_mode=keys.get("overlap", "neglect"),
        variants=variants,
        name=keys.get("name", name),
    )


def _conflict(keys, key, value, figure):
    if figure is not None and key in keys and not _same(keys[key], value):
        raise ConfigError(f"--figure {figure} fixes {key}={keys[key]}; got {value}")


def _same(a: str, b: str) -> bool:
    a, b = str(a).strip(), str(b).strip()
    if a == b:
        return True
    try:
        return float(a) == float(b)
    except ValueError:
        return a.lower() == b.lower()


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("grid must be start:stop:points")
    return float(parts[0]), float(parts[1]), int(parts[2])


# ---------------------------------------------------------------------------
# output


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    out = f"{v:.12g}"
    return "0" if out == "-0" else out


def to_csv(header, rows, manifest: dict) -> str:
    lines = [f"# tool: {manifest.get('tool')} {manifest.get('version')}",
             f"# name: {manifest.get('name')}"]
    sw = manifest.get("sweep", {})
    lines.append(f"# sweep: {sw.get('variable')} {sw.get('start')}:{sw.get('stop')}:"
                 f"{sw.get('points')}")
    lines.append("# spec: " + " ".join(f"{k}={v}" for k, v in manifest.get("spec", {}).items()))
    lines.append(f"# energy_units: {manifest.get('energy_units', 'Jx')}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"
