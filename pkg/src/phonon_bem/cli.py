"""Command-line front end: ``phonon-bem <task> --config FILE [--out DIR] [--strict] [--threads K]``."""
import argparse
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import __version__
from .asymptotics import (
    DegenerateEigenvalue,
    cell_corrector,
    dirichlet_eigenpair,
    leading_coefficient,
    periodic_expansion_terms,
)
from .charvalue import ContourRejected, RootWindow, refine_root
from .checks import run_validation
from .geometry import GeometryError, curve_from_dict, sample_mesh
from .kernels import LameParams
from .lattice import LatticeSumConfig
from .spectra import (
    band_sweep,
    bloch_family,
    brillouin_path,
    dirichlet_eigenvalues,
    expand,
    gap_report,
    modified_eigenvalues,
    modified_family,
    transition_eigenvalues,
)

log = logging.getLogger("phonon_bem")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "PHONON_BEM_THREADS"
TASKS = ("validate", "dirichlet", "modified", "transition", "bands", "asymptotics")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_lame = {
    "type": "object",
    "properties": {"lam": _num, "mu": _pos, "rho": _pos},
    "required": ["lam", "mu"],
    "additionalProperties": False,
}
SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "geometry": {"type": "object", "required": ["shape"]},
        "materials": {
            "type": "object",
            "properties": {
                "inclusion": _lame,
                "matrix": _lame,
                "mu_sweep": {"type": "array", "items": _pos, "minItems": 1},
                "rho_sweep": {"type": "array", "items": _pos, "minItems": 1},
            },
            "required": ["inclusion"],
            "additionalProperties": False,
        },
        "discretization": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 16},
                "N_scan": {"type": ["integer", "null"], "minimum": 16},
                "M": {"type": "integer", "minimum": 8},
                "tol": _pos,
            },
            "additionalProperties": False,
        },
        "window": {
            "type": "object",
            "properties": {"lo": {"type": "number", "minimum": 0}, "hi": _pos, "step": _pos, "radius": _pos,
                           "Q": {"type": "integer", "minimum": 8}},
            "required": ["lo", "hi", "step"],
            "additionalProperties": False,
        },
        "transition": {
            "type": "object",
            "properties": {"tau": _pos, "direction": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
            "required": ["tau"],
            "additionalProperties": False,
        },
        "bands": {
            "type": "object",
            "properties": {
                "samples_per_leg": {"type": "integer", "minimum": 1},
                "path": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
                "J": {"type": "integer", "minimum": 1},
                "near_gamma": {"enum": ["exact", "limit"]},
                "gaps": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "asymptotics": {
            "type": "object",
            "properties": {
                "alpha": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "omega_guess": _pos,
            },
            "required": ["omega_guess"],
            "additionalProperties": False,
        },
    },
    "required": ["geometry", "materials"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config


def load_config(path):
    text = Path(path).read_text()
    try:
        cfg = yaml.safe_load(text) if str(path).endswith((".yml", ".yaml")) else json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    return cfg


def _lame(d, where):
    try:
        return LameParams(float(d["lam"]), float(d["mu"]), float(d.get("rho", 1.0)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


class RunConfig:
    """Validated configuration with derived objects."""

    def __init__(self, raw):
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{where}: {exc.message}") from exc
        self.raw = raw
        try:
            self.curve = curve_from_dict(raw["geometry"])
            self.curve.check()
        except GeometryError as exc:
            field = f"geometry.{exc.field}" if getattr(exc, "field", None) else "geometry"
            raise ConfigError(f"{field}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"geometry: {exc}") from exc
        mats = raw["materials"]
        self.inclusion = _lame(mats["inclusion"], "materials.inclusion")
        self.matrix = _lame(mats.get("matrix", {"lam": 1.0, "mu": 1.0}), "materials.matrix")
        self.mu_sweep = [float(m) for m in mats.get("mu_sweep", [self.matrix.mu])]
        self.rho_sweep = [float(r) for r in mats.get("rho_sweep", [self.matrix.rho])]
        for mu in self.mu_sweep:
            _lame({"lam": self.matrix.lam / self.matrix.mu * mu, "mu": mu}, "materials.mu_sweep")
        disc = raw.get("discretization", {})
        self.N = int(disc.get("N", 128))
        if self.N % 2:
            raise ConfigError("discretization.N: must be even")
        self.N_scan = disc.get("N_scan", None)
        self.lattice = LatticeSumConfig(M=int(disc.get("M", 40)), tol=float(disc.get("tol", 1e-14)))
        w = raw.get("window", {"lo": 8.0, "hi": 18.5, "step": 0.1})
        if w["hi"] <= w["lo"]:
            raise ConfigError("window.hi: must exceed window.lo")
        self.window = RootWindow(float(w["lo"]), float(w["hi"]), float(w["step"]), float(w.get("radius", 0.02)),
                                 int(w.get("Q", 32)))
        tr = raw.get("transition", {})
        self.tau = float(tr.get("tau", 1.0))
        d = np.asarray(tr.get("direction", [1.0, 0.0]), float)
        if not np.linalg.norm(d) > 0:
            raise ConfigError("transition.direction: must be nonzero")
        self.direction = tuple(d / np.linalg.norm(d))
        self.bands = raw.get("bands", {})
        self.asym = raw.get("asymptotics", {})

    def matrix_at(self, mu):
        return LameParams(self.matrix.lam / self.matrix.mu * mu, mu, self.matrix.rho)


# ------------------------------------------------------------------ output


def fmt(x):
    """17 significant digits, plain ASCII."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def spectrum_rows(roots):
    return [(i + 1, r.omega.real, r.multiplicity, r.sigma_min, r.count_residual) for i, r in enumerate(roots)]


SPECTRUM_HEADER = ["index", "omega", "multiplicity", "sigma_min", "count_residual"]


# ------------------------------------------------------------------ tasks


def _scan_kw(cfg):
    return {"N": cfg.N, "N_scan": cfg.N_scan}


def task_validate(cfg, out, bundle):
    results = run_validation(cfg.curve, cfg.inclusion, cfg.matrix, N=cfg.N, window=None)
    rows = [(r.name, r.value, r.threshold, int(r.passed)) for r in results]
    with open(out / "checks.csv", "w", newline="\n", encoding="ascii") as fh:
        fh.write("check,value,threshold,passed\n")
        for name, v, t, p in rows:
            fh.write(f"{name},{fmt(v)},{fmt(t)},{p}\n")
    bundle["files"].append("checks.csv")
    bundle["checks"] = {r.name: {"value": r.value, "threshold": r.threshold, "passed": r.passed} for r in results}
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def task_dirichlet(cfg, out, bundle):
    notes = []
    roots = dirichlet_eigenvalues(cfg.curve, cfg.inclusion, cfg.window, log=notes, **_scan_kw(cfg))
    write_csv(out / "spectrum.csv", SPECTRUM_HEADER, spectrum_rows(roots))
    bundle["files"].append("spectrum.csv")
    bundle["notes"].extend(notes)
    return EXIT_OK


def task_modified(cfg, out, bundle, transition=False):
    for k, rho in enumerate(cfg.rho_sweep):
        notes = []
        if transition:
            roots = transition_eigenvalues(cfg.curve, cfg.inclusion, cfg.tau, cfg.direction, rho, cfg.window,
                                           matrix=cfg.matrix, cfg=cfg.lattice, log=notes, **_scan_kw(cfg))
        else:
            roots = modified_eigenvalues(cfg.curve, cfg.inclusion, rho, cfg.window, matrix=cfg.matrix,
                                         cfg=cfg.lattice, log=notes, **_scan_kw(cfg))
        name = "spectrum.csv" if len(cfg.rho_sweep) == 1 else f"spectrum_rho{k}.csv"
        write_csv(out / name, SPECTRUM_HEADER, spectrum_rows(roots))
        bundle["files"].append(name)
        bundle["spectra"].append({"file": name, "rho": rho})
        bundle["notes"].extend(notes)
    return EXIT_OK


def task_bands(cfg, out, bundle, strict=False):
    b = cfg.bands
    J = int(b.get("J", 4))
    path = b.get("path") or brillouin_path(int(b.get("samples_per_leg", 8)))
    rows, any_incomplete = [], False
    gap_rows = []
    for rho in cfg.rho_sweep:
        for mu in cfg.mu_sweep:
            notes = []
            diag = band_sweep(cfg.curve, cfg.matrix_at(mu), cfg.inclusion, rho, path, J, cfg.window, N=cfg.N,
                              N_scan=cfg.N_scan, near_gamma=b.get("near_gamma", "exact"), cfg=cfg.lattice, log=notes)
            for i, (alpha, vals) in enumerate(zip(diag.path, diag.bands)):
                for j, w in enumerate(vals):
                    rows.append((mu, rho, i, alpha[0], alpha[1], j + 1, w))
            bad = [i for i, f in enumerate(diag.incomplete) if f]
            any_incomplete |= bool(bad)
            bundle["bands"].append({"mu": mu, "rho": rho, "incomplete_samples": bad})
            bundle["notes"].extend(notes)
        if b.get("gaps", False):
            w = expand(dirichlet_eigenvalues(cfg.curve, cfg.inclusion, cfg.window, **_scan_kw(cfg)))
            wt = expand(modified_eigenvalues(cfg.curve, cfg.inclusion, rho, cfg.window, matrix=cfg.matrix,
                                             cfg=cfg.lattice, **_scan_kw(cfg)))
            rep = gap_report(w, wt, rho)
            gap_rows.extend((rho, g.j, g.lower, g.upper, g.width) for g in rep.gaps)
            bundle["notes"].extend(rep.limiting.flags)
    header = ["mu", "rho", "path_index", "alpha_1", "alpha_2", "band_index", "omega"]
    write_csv(out / "bands.csv", header, rows)
    bundle["files"].append("bands.csv")
    if b.get("gaps", False):
        write_csv(out / "gaps.csv", ["rho", "j", "omega_lower", "omega_upper", "width"], gap_rows)
        bundle["files"].append("gaps.csv")
    if any_incomplete:
        log.warning("some band samples are incomplete")
        bundle["warnings"].append("incomplete band samples")
        return EXIT_NUMERIC if strict else EXIT_OK
    return EXIT_OK


def task_asymptotics(cfg, out, bundle):
    alpha = tuple(float(a) for a in cfg.asym.get("alpha", (np.pi, np.pi)))
    guess = float(cfg.asym["omega_guess"])
    mesh = sample_mesh(cfg.curve, cfg.N)
    rho = cfg.rho_sweep[0]
    if np.allclose(alpha, 0):
        fam = modified_family(mesh, cfg.inclusion, rho, cfg.matrix, cfg.lattice)
        w_lim, rel, _ = refine_root(fam, guess)
        if rel > 1e-6:
            raise ArithmeticError(f"no modified eigenvalue near {guess}")
        w_lim = w_lim.real
        c1 = periodic_expansion_terms(w_lim, mesh, cfg.matrix, cfg.inclusion, rho, n_max=1,
                                      radius=cfg.window.radius, Q=cfg.window.Q, cfg=cfg.lattice)[0].real
    else:
        pair = dirichlet_eigenpair(mesh, cfg.inclusion, guess, radius=cfg.window.radius, Q=cfg.window.Q)
        w_lim = pair.omega0
        c1 = leading_coefficient(pair, cell_corrector(pair, alpha, cfg.matrix, cfg.lattice)).coefficient
    rows = []
    for mu in cfg.mu_sweep:
        fam = bloch_family(mesh, cfg.matrix_at(mu), cfg.inclusion, alpha, rho, cfg.lattice)
        w, rel, _ = refine_root(fam, w_lim + c1 / mu, h=min(1e-2, abs(c1) / mu + 1e-4))
        if rel > 1e-6:
            raise ArithmeticError(f"Bloch root not found for mu = {mu}")
        pred = w_lim + c1 / mu
        rows.append((mu, w.real, w_lim, pred, w.real - pred))
    write_csv(out / "asym.csv", ["mu", "omega_mu", "omega_limit", "first_order_prediction", "residual"], rows)
    bundle["files"].append("asym.csv")
    bundle["asymptotics"] = {"alpha": list(alpha), "omega_limit": w_lim, "coefficient": c1}
    if len(rows) >= 2:
        mus = np.log([r[0] for r in rows])
        d = np.array([r[1] - r[2] for r in rows])
        res = np.array([r[4] for r in rows])
        if np.all(d != 0):
            bundle["asymptotics"]["slope_first"] = float(np.polyfit(mus, np.log(np.abs(d)), 1)[0])
        if np.all(res != 0):
            bundle["asymptotics"]["slope_residual"] = float(np.polyfit(mus, np.log(np.abs(res)), 1)[0])
    return EXIT_OK


# ------------------------------------------------------------------ entry point


def _threads(arg):
    env = os.environ.get(THREADS_ENV)
    if arg is not None:
        return arg
    if env:
        try:
            k = int(env)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}: not an integer") from exc
        if k < 1:
            raise ConfigError(f"{THREADS_ENV}: must be >= 1")
        return k
    return None


def build_parser():
    p = argparse.ArgumentParser(prog="phonon-bem", description="Boundary-integral phononic band-gap solver")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", required=True, help="YAML or JSON run configuration")
    p.add_argument("--out", default="phonon_bem_out", help="output directory")
    p.add_argument("--strict", action="store_true", help="treat incomplete results as failures")
    p.add_argument("--threads", type=int, default=None, help=f"BLAS threads (overrides ${THREADS_ENV})")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig(load_config(args.config))
        threads = _threads(args.threads)
        if threads is not None and threads < 1:
            raise ConfigError("--threads: must be >= 1")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bundle = {
        "schema_version": 1,
        "task": args.task,
        "config": cfg.raw,
        "versions": {"phonon_bem": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "files": [],
        "notes": [],
        "warnings": [],
        "spectra": [],
        "bands": [],
        "threads": threads,
    }
    import scipy

    bundle["versions"]["scipy"] = scipy.__version__
    t0 = time.perf_counter()
    runners = {
        "validate": lambda: task_validate(cfg, out, bundle),
        "dirichlet": lambda: task_dirichlet(cfg, out, bundle),
        "modified": lambda: task_modified(cfg, out, bundle),
        "transition": lambda: task_modified(cfg, out, bundle, transition=True),
        "bands": lambda: task_bands(cfg, out, bundle, args.strict),
        "asymptotics": lambda: task_asymptotics(cfg, out, bundle),
    }
    from threadpoolctl import threadpool_limits

    try:
        with threadpool_limits(limits=threads):
            code = runners[args.task]()
        status = {EXIT_OK: "ok", EXIT_CHECK: "check failed", EXIT_NUMERIC: "incomplete"}[code]
    except (ArithmeticError, np.linalg.LinAlgError, ContourRejected, DegenerateEigenvalue) as exc:
        code, status = EXIT_NUMERIC, f"numerical failure: {exc}"
        print(status, file=sys.stderr)
    bundle["status"] = {args.task: status}
    bundle["timings"] = {args.task: time.perf_counter() - t0}
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
