"""Experiment orchestration: strict JSON configs in, deterministic result
tables and plot-data files out.

Each experiment fans out over its (k, axis) grid -- the axis is the disk
radius for field experiments and the grid size for the unit-disk spectral
scan -- then appends summary rows computed from the sorted per-unit results.
Workers run single-threaded solvers; merging sorts by key, so a run is
byte-reproducible at any thread count (the manifest's wall time is the one
field allowed to differ between reruns).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from . import __version__
from .disk import (
    DiskField,
    PolarGrid,
    angular_mean_profile,
    disk_energy,
    lift_profile,
    minimize_disk,
    perturbed_field,
    symmetry_diagnostics,
)
from .limits import (
    OutOfNeighborhoodError,
    decompose,
    eps_norm,
    field_matrices,
    init_harmonic_radial,
    manifold_defect,
    reconstruct,
)
from .paths import (
    MinimizerCache,
    PathConfig,
    explicit_path,
    odd_k_energy_scan,
    path_energy_profile,
    string_relax,
)
from .radial import (
    NonConvergenceError,
    RadialGrid,
    SolverOptions,
    alpha_R,
    init_ramp,
    minimize_radial,
    radial_energy,
)
from .spectra import (
    l_parallel_spectrum,
    l_perp_point_eigs,
    scalar_mode_correlation,
)
from .tensors import act_z2, derive_params
from .tolerances import TOL

EXPERIMENT_IDS = (
    "two_minimizers",
    "table1",
    "alpha_scaling",
    "odd_k_scaling",
    "mountain_pass",
    "spectra",
    "decomposition_diag",
)

# quoted asymptotic anchors attached to result rows as the `target` column
ANCHOR_ESCAPED = "4π s_+² |k| + o_k(1)"
ANCHOR_ALPHA = "(π k² s_+²/2) ln R"
ANCHOR_ALPHA_LIM = "lim α_R/ln R"
ANCHOR_PATH = "≤ C(R_0² + |k|)"
ANCHOR_ODD = "(π/2) s_+² |ln ε|"
ANCHOR_EVEN = "C_1 ≤ min … ≤ C_2"
ANCHOR_SCALAR = "ζ = t(1−r^k)/(1+r^k)"
ANCHOR_CONSTR = "n_* is strictly stable"
ANCHOR_POINT = "{2.5, 1.5, 1.5}"
ANCHOR_SIGN = "w_3 > 0 in (0,R)"
ANCHOR_TWO = "there exist exactly two minimizers"
ANCHOR_FIVE = "at least five k-fold O(2)-symmetric critical points"
ANCHOR_FOUR = "at least four of these solutions are not Z2×O(2)-symmetric"
ANCHOR_LEAVE = "must therefore necessarily leave the limit manifold"
ANCHOR_TUBE = "Q = Q♯ + ε²P"


class ConfigError(ValueError):
    """Raised when a config file violates the schema."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved run description; every field is echoed into outputs."""

    experiment: str
    params: tuple[float, float, float] = (1.0, 1.0, 1.0)
    k: tuple[int, ...] = (2,)
    R_list: tuple[float, ...] = (25.0, 50.0, 100.0)
    radial_cells: int = 4096
    disk_cells: tuple[int, int] = (192, 48)
    unit_grid_sizes: tuple[int, ...] = (48, 96, 192)
    resolution: float = 0.1
    seeds: tuple[int, ...] = (101, 202, 303, 404)
    out_dir: str = ""
    path_images: int = 33
    path_core_radius: float = 5.0
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"expected one of {EXPERIMENT_IDS}")
        if len(self.params) != 3 or any(c <= 0 for c in self.params):
            raise ConfigError("params must be three positive coefficients")
        if not self.k or any(kk == 0 for kk in self.k):
            raise ConfigError("winding numbers must be nonzero")
        if any(r <= 0 for r in self.R_list):
            raise ConfigError("radii must be positive")
        if self.radial_cells < 16:
            raise ConfigError("radial_cells must be at least 16")
        if self.resolution <= 0:
            raise ConfigError("resolution must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not self.out_dir:
            object.__setattr__(self, "out_dir", f"runs/{self.experiment}")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": list(self.params),
            "k": list(self.k),
            "R_list": list(self.R_list),
            "radial_cells": self.radial_cells,
            "disk_cells": list(self.disk_cells),
            "unit_grid_sizes": list(self.unit_grid_sizes),
            "resolution": self.resolution,
            "seeds": list(self.seeds),
            "out_dir": self.out_dir,
            "path_images": self.path_images,
            "path_core_radius": self.path_core_radius,
            "threads": self.threads,
        }


_DEFAULT_OVERRIDES: dict[str, dict] = {
    "two_minimizers": {"R_list": (30.0,)},
    "table1": {"R_list": (25.0, 50.0, 100.0)},
    "alpha_scaling": {"R_list": (1e2, 1e3, 1e4)},
    "odd_k_scaling": {"k": (1,), "R_list": (1e2, 1e3, 1e4)},
    "mountain_pass": {"R_list": (50.0,), "disk_cells": (512, 16)},
    "spectra": {"R_list": ()},
    "decomposition_diag": {"R_list": (30.0,), "disk_cells": (1024, 32)},
}

_LIST_FIELDS = {
    "params": float, "k": int, "R_list": float,
    "disk_cells": int, "unit_grid_sizes": int, "seeds": int,
}
_SCALAR_FIELDS = {
    "experiment": str, "radial_cells": int, "resolution": float,
    "out_dir": str, "path_images": int, "path_core_radius": float,
    "threads": int,
}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Per-experiment defaults, overridable field by field."""
    if experiment not in EXPERIMENT_IDS:
        raise ConfigError(f"unknown experiment {experiment!r}; "
                          f"expected one of {EXPERIMENT_IDS}")
    merged = dict(_DEFAULT_OVERRIDES.get(experiment, {}))
    merged.update(overrides)
    return ExperimentConfig(experiment=experiment, **merged)


def load_config(source) -> ExperimentConfig:
    """Validate a config given as a path, JSON text mapping, or dict.

    The schema is strict: unknown keys and wrong element types are errors,
    never warnings, so a typo cannot silently fall back to a default.
    """
    if isinstance(source, ExperimentConfig):
        return source
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        raw = json.loads(Path(source).read_text())
    elif isinstance(source, str):
        raw = json.loads(source)
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "experiment" not in raw:
        raise ConfigError("config is missing the 'experiment' field")

    known = {f.name for f in dc_fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    kwargs: dict = {}
    for name, value in raw.items():
        if name in _LIST_FIELDS:
            elem = _LIST_FIELDS[name]
            seq = value if isinstance(value, (list, tuple)) else [value]
            try:
                kwargs[name] = tuple(elem(v) for v in seq)
            except (TypeError, ValueError):
                raise ConfigError(f"field {name!r} needs {elem.__name__} entries")
        elif name in _SCALAR_FIELDS:
            typ = _SCALAR_FIELDS[name]
            if typ in (int, float) and isinstance(value, bool):
                raise ConfigError(f"field {name!r} must be {typ.__name__}")
            try:
                kwargs[name] = typ(value)
            except (TypeError, ValueError):
                raise ConfigError(f"field {name!r} must be {typ.__name__}")
        else:
            raise ConfigError(f"field {name!r} is not configurable")
    experiment = kwargs.pop("experiment")
    return default_config(experiment, **kwargs)


@dataclass(frozen=True)
class ResultRow:
    """One measured quantity with its pass/fail verdict."""

    experiment: str
    k: int
    R: float
    quantity: str
    value: float
    tolerance: float
    target: str
    status: str

    def __post_init__(self):
        if self.status not in ("pass", "fail"):
            raise ValueError(f"status must be pass or fail, got {self.status!r}")

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment, "k": self.k, "R": self.R,
            "quantity": self.quantity, "value": self.value,
            "tolerance": self.tolerance, "target": self.target,
            "status": self.status,
        }


@dataclass
class ResultTable:
    """Ordered result rows plus CSV/JSON emission."""

    rows: list[ResultRow]

    @property
    def failed(self) -> list[ResultRow]:
        return [r for r in self.rows if r.status == "fail"]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment", "k", "R", "quantity", "value",
                             "tolerance", "target", "status"])
            for r in self.rows:
                writer.writerow([r.experiment, r.k, repr(float(r.R)),
                                 r.quantity, repr(float(r.value)),
                                 repr(float(r.tolerance)), r.target, r.status])

    def to_json(self, path) -> None:
        payload = [r.to_dict() for r in self.rows]
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                         ensure_ascii=False) + "\n")


def _row(exp: str, k: int, R: float, quantity: str, value: float,
         tol_name: str, target: str, ok: bool) -> dict:
    # rows travel as dicts between workers; ResultRow validation happens once
    # at merge time
    return {"experiment": exp, "k": int(k), "R": float(R),
            "quantity": quantity, "value": float(value),
            "tolerance": float(TOL[tol_name]), "target": target,
            "status": "pass" if ok else "fail"}


def _fail_row(exp: str, k: int, R: float, quantity: str, target: str,
              message: str) -> dict:
    # the note rides along until merge time, then lands in manifest warnings
    row = _row(exp, k, R, quantity, math.nan, "monotone_slack", target, False)
    row["_note"] = message
    return row


def _field_norm(f: DiskField) -> float:
    g = f.grid
    dens = np.einsum("ijc,ijc->i", f.values, f.values)
    return math.sqrt(float(dens @ g.r_nodes()) * g.h * g.dphi)


# ---------------------------------------------------------------------------
# per-unit work functions (top level so process pools can pickle them)

def _unit_two_minimizers(cfg: dict, k: int, R: float) -> list[dict]:
    exp = "two_minimizers"
    prm = derive_params(*cfg["params"])
    n_r, n_phi = cfg["disk_cells"]
    rgrid = RadialGrid(R=R, N=n_r)
    # starts perturb the in-plane constrained state; the escaped profile is
    # computed independently and serves as the matching reference
    strangled = minimize_radial(init_ramp(rgrid, "Z2O2", k, prm))
    base = lift_profile(strangled, n_phi)
    escaped_ref = lift_profile(minimize_radial(init_harmonic_radial(rgrid, k, prm)),
                               n_phi)
    amp = 0.3 * prm.s_plus
    opts = SolverOptions(tol=TOL["multistart_solve"], max_iter=8000)

    solved: list[DiskField] = []
    rows: list[dict] = []
    for seed in cfg["seeds"]:
        init = perturbed_field(base, amp, int(seed))
        try:
            solved.append(minimize_disk(init, opts))
        except NonConvergenceError as err:
            rows.append(_fail_row(exp, k, R, f"converged[seed={seed}]",
                                  ANCHOR_TWO, str(err)))
            if isinstance(err.last, DiskField):
                solved.append(err.last)
    if not solved:
        return rows

    reports = [symmetry_diagnostics(f) for f in solved]
    norms = [_field_norm(f) for f in solved]
    so2_max = max(rep.so2_defect / nrm for rep, nrm in zip(reports, norms))
    escape_min = min(rep.z2_defect / nrm for rep, nrm in zip(reports, norms))
    rows.append(_row(exp, k, R, "so2_defect_rel_max", so2_max,
                     "so2_defect_rel", ANCHOR_TWO,
                     so2_max <= TOL["so2_defect_rel"]))
    rows.append(_row(exp, k, R, "escape_defect_rel_min", escape_min,
                     "z2_defect_rel_min", ANCHOR_TWO,
                     escape_min >= TOL["z2_defect_rel_min"]))

    # every start must land on the escaped profile up to the out-of-plane flip
    pair = 0.0
    for f in solved:
        d_same = float(np.max(np.abs(f.values - escaped_ref.values)))
        d_flip = float(np.max(np.abs(act_z2(f.values) - escaped_ref.values)))
        pair = max(pair, min(d_same, d_flip) / prm.s_plus)
    rows.append(_row(exp, k, R, "pair_match_rel_max", pair,
                     "multistart_match_rel", ANCHOR_TWO,
                     pair <= TOL["multistart_match_rel"]))

    single = 0
    for f in solved:
        w3 = angular_mean_profile(f).values[:, 3]
        interior = w3[np.abs(w3) > 1e-8 * prm.s_plus]
        if interior.size and (np.all(interior > 0) or np.all(interior < 0)):
            single += 1
    frac = single / len(solved)
    rows.append(_row(exp, k, R, "w3_single_sign_frac", frac,
                     "monotone_slack", ANCHOR_SIGN, frac == 1.0))
    return rows


def _unit_table1(cfg: dict, k: int, R: float) -> list[dict]:
    exp = "table1"
    prm = derive_params(*cfg["params"])
    grid = RadialGrid(R=R, N=cfg["radial_cells"])
    rows: list[dict] = []

    escaped = minimize_radial(init_harmonic_radial(grid, k, prm))
    e_escaped = radial_energy(escaped)
    bound = 4.0 * math.pi * abs(k) * prm.s_plus**2
    rows.append(_row(exp, k, R, "escaped_energy", e_escaped,
                     "energy_upper_slack", ANCHOR_ESCAPED, e_escaped <= bound))

    e_strangled = alpha_R(prm, k, R, N=cfg["radial_cells"])
    rows.append(_row(exp, k, R, "strangled_energy", e_strangled,
                     "monotone_slack", ANCHOR_ALPHA, e_strangled > e_escaped))

    pc = PathConfig(R0=cfg["path_core_radius"], M=cfg["path_images"],
                    n_r=cfg["disk_cells"][0], n_phi=cfg["disk_cells"][1])
    ens = explicit_path(prm, k, R, pc)
    prof = path_energy_profile(ens)
    rows.append(_row(exp, k, R, "path_max", prof.max_energy,
                     "monotone_slack", ANCHOR_PATH,
                     prof.max_energy < e_strangled))
    return rows


def _unit_alpha(cfg: dict, k: int, R: float) -> list[dict]:
    prm = derive_params(*cfg["params"])
    n = max(256, int(round(R / cfg["resolution"])))
    a = alpha_R(prm, k, R, N=n)
    # per-radius rows always pass; the bound and monotonicity rows are
    # summary rows computed across radii
    return [_row("alpha_scaling", k, R, "alpha", a, "monotone_slack",
                 ANCHOR_ALPHA, True)]


def _summary_alpha(cfg: dict, rows: list[dict]) -> list[dict]:
    exp = "alpha_scaling"
    out: list[dict] = []
    prm = derive_params(*cfg["params"])
    for k in cfg["k"]:
        mine = [r for r in rows if r["k"] == k and r["quantity"] == "alpha"]
        if len(mine) < 2:
            continue
        mine.sort(key=lambda r: r["R"])
        radii = np.array([r["R"] for r in mine])
        alphas = np.array([r["value"] for r in mine])
        ratios = alphas / np.log(radii)
        increasing = bool(np.all(np.diff(ratios) > 0))
        out.append(_row(exp, k, radii[-1], "alpha_over_log_increasing",
                        float(increasing), "monotone_slack", ANCHOR_ALPHA_LIM,
                        increasing))
        slope = math.pi * prm.s_plus**2 * k * k / 2.0
        frac = float(ratios[-1] / slope)
        out.append(_row(exp, k, radii[-1], "alpha_over_log_frac", frac,
                        "alpha_lower_frac", ANCHOR_ALPHA,
                        frac >= TOL["alpha_lower_frac"]))
        # upper bound with the constant calibrated at the smallest radius
        c_cal = (alphas[0] - slope * math.log(radii[0])) / (k * k)
        margin = float(np.max(
            alphas[1:] - (slope * np.log(radii[1:]) + c_cal * k * k)))
        out.append(_row(exp, k, radii[-1], "alpha_upper_bound_margin", margin,
                        "monotone_slack", ANCHOR_ALPHA, margin <= 0.0))
        growth = float(alphas[-1] / alphas[0])
        out.append(_row(exp, k, radii[-1], "alpha_growth_factor", growth,
                        "alpha_growth_min", ANCHOR_ALPHA_LIM,
                        growth >= TOL["alpha_growth_min"]))
    return out


def _unit_odd_k(cfg: dict, k: int, R: float) -> list[dict]:
    prm = derive_params(*cfg["params"])
    scan = odd_k_energy_scan(prm, k, [R], resolution=cfg["resolution"])
    e = scan["rows"][0][1]
    return [_row("odd_k_scaling", k, R, "min_energy", e, "monotone_slack",
                 ANCHOR_ODD if k % 2 else ANCHOR_EVEN, True)]


def _summary_odd_k(cfg: dict, rows: list[dict]) -> list[dict]:
    exp = "odd_k_scaling"
    out: list[dict] = []
    prm = derive_params(*cfg["params"])
    for k in cfg["k"]:
        mine = sorted((r for r in rows
                       if r["k"] == k and r["quantity"] == "min_energy"),
                      key=lambda r: r["R"])
        if len(mine) < 2:
            continue
        es = np.array([r["value"] for r in mine])
        lnr = np.log([r["R"] for r in mine])
        top_R = mine[-1]["R"]
        if k % 2:
            slope = float(np.polyfit(lnr, es, 1)[0])
            ref = math.pi * prm.s_plus**2 / 2.0
            rel = abs(slope - ref) / ref
            out.append(_row(exp, k, top_R, "slope_rel_err", rel,
                            "odd_slope_rel", ANCHOR_ODD,
                            rel <= TOL["odd_slope_rel"]))
        else:
            rng = float((es.max() - es.min()) / es.mean())
            out.append(_row(exp, k, top_R, "energy_range_rel", rng,
                            "even_range_rel", ANCHOR_EVEN,
                            rng <= TOL["even_range_rel"]))
    return out


def _unit_mountain_pass(cfg: dict, k: int, R: float) -> list[dict]:
    exp = "mountain_pass"
    prm = derive_params(*cfg["params"])
    pc = PathConfig(R0=cfg["path_core_radius"], M=cfg["path_images"],
                    n_r=cfg["disk_cells"][0], n_phi=cfg["disk_cells"][1])
    rows: list[dict] = []

    cache = MinimizerCache(prm, k, R, pc)
    ens = explicit_path(prm, k, R, pc, cache=cache)
    explicit = path_energy_profile(ens)
    rows.append(_row(exp, k, R, "explicit_max", explicit.max_energy,
                     "monotone_slack", ANCHOR_PATH,
                     math.isfinite(explicit.max_energy)))

    try:
        relaxed, saddle = string_relax(ens, pc)
    except NonConvergenceError as err:
        rows.append(_fail_row(exp, k, R, "saddle_converged", ANCHOR_FIVE,
                              str(err)))
        return rows

    relaxed_prof = path_energy_profile(relaxed)
    excess = relaxed_prof.barrier - explicit.barrier
    slack = TOL["barrier_descent_slack"] * (1.0 + abs(explicit.barrier))
    rows.append(_row(exp, k, R, "relaxed_barrier_excess", excess,
                     "barrier_descent_slack", ANCHOR_PATH, excess <= slack))

    ends = max(float(relaxed.energies[0]), float(relaxed.energies[-1]))
    rows.append(_row(exp, k, R, "saddle_energy", saddle.energy,
                     "monotone_slack", ANCHOR_FIVE,
                     ends < saddle.energy <= explicit.max_energy))

    nrm = _field_norm(saddle.field)
    so2 = saddle.symmetry.so2_defect / nrm
    rows.append(_row(exp, k, R, "saddle_so2_rel", so2, "so2_defect_rel",
                     ANCHOR_FIVE, so2 <= TOL["so2_defect_rel"]))
    escape = saddle.symmetry.z2_defect / nrm
    rows.append(_row(exp, k, R, "saddle_escape_rel", escape,
                     "z2_defect_rel_min", ANCHOR_FOUR,
                     escape >= TOL["z2_defect_rel_min"]))

    d_plus = manifold_defect(relaxed.images[0])
    d_minus = manifold_defect(relaxed.images[-1])
    d_saddle = manifold_defect(saddle.field)
    ratio = d_saddle / max(d_plus, d_minus)
    rows.append(_row(exp, k, R, "manifold_defect_ratio", ratio,
                     "monotone_slack", ANCHOR_LEAVE, ratio > 1.0))
    return rows


def _unit_spectra(cfg: dict, k: int, size: float) -> list[dict]:
    exp = "spectra"
    n = int(size)
    grid = PolarGrid(R=1.0, N_r=n, N_phi=4 * max(8, n // 8))
    rows: list[dict] = []

    rep_u = l_parallel_spectrum(k, False, grid, m=3, keep_vectors=True)
    lam1 = float(rep_u.eigenvalues[0])
    rows.append(_row(exp, k, size, "lambda1_unconstrained", lam1,
                     "l_par_scalar_abs", ANCHOR_SCALAR,
                     abs(lam1) <= TOL["l_par_scalar_abs"]))
    corr = scalar_mode_correlation(rep_u, grid, k)
    rows.append(_row(exp, k, size, "scalar_mode_corr", corr,
                     "l_par_eigfn_corr", ANCHOR_SCALAR,
                     corr >= TOL["l_par_eigfn_corr"]))

    rep_c = l_parallel_spectrum(k, True, grid, m=3)
    lam1c = float(rep_c.eigenvalues[0])
    rows.append(_row(exp, k, size, "lambda1_constrained", lam1c,
                     "l_par_constrained_min", ANCHOR_CONSTR,
                     lam1c >= TOL["l_par_constrained_min"]))
    return rows


def _summary_spectra(cfg: dict, rows: list[dict]) -> list[dict]:
    exp = "spectra"
    prm = derive_params(*cfg["params"])
    out: list[dict] = []
    for k in cfg["k"]:
        mine = sorted((r for r in rows if r["k"] == k
                       and r["quantity"] == "lambda1_constrained"),
                      key=lambda r: r["R"])
        if len(mine) >= 2:
            vals = [r["value"] for r in mine]
            increasing = all(b > a for a, b in zip(vals, vals[1:]))
            out.append(_row(exp, k, mine[-1]["R"], "constrained_increasing",
                            float(increasing), "monotone_slack",
                            ANCHOR_CONSTR, increasing))
        eigs = np.sort(l_perp_point_eigs(prm, (0.0, 0.0), k=k))
        dev = float(np.max(np.abs(eigs - np.array([1.5, 1.5, 2.5]))))
        out.append(_row(exp, k, 0.0, "point_eigs_dev", dev, "l_perp_exact",
                        ANCHOR_POINT, dev <= TOL["l_perp_exact"]))
    return out


def _unit_decomposition(cfg: dict, k: int, R: float) -> list[dict]:
    exp = "decomposition_diag"
    prm = derive_params(*cfg["params"])
    n_r, n_phi = cfg["disk_cells"]
    grid = RadialGrid(R=R, N=n_r)
    escaped = minimize_radial(init_harmonic_radial(grid, k, prm))
    f = lift_profile(escaped, n_phi)
    eps = 1.0 / R
    rows: list[dict] = []
    try:
        dec = decompose(f, eps)
    except (OutOfNeighborhoodError, NonConvergenceError) as err:
        rows.append(_fail_row(exp, k, R, "decomposition_converged",
                              ANCHOR_TUBE, str(err)))
        return rows
    q = field_matrices(f)
    resid = float(np.max(np.abs(reconstruct(dec) - q))) / prm.s_plus
    rows.append(_row(exp, k, R, "roundtrip_rel", resid, "decomp_roundtrip",
                     ANCHOR_TUBE, resid <= TOL["decomp_roundtrip"]))
    p_norm = eps_norm(dec.P, eps, f.grid)
    rows.append(_row(exp, k, R, "normal_norm", p_norm, "monotone_slack",
                     ANCHOR_TUBE, math.isfinite(p_norm)))
    return rows


_UNITS = {
    "two_minimizers": _unit_two_minimizers,
    "table1": _unit_table1,
    "alpha_scaling": _unit_alpha,
    "odd_k_scaling": _unit_odd_k,
    "mountain_pass": _unit_mountain_pass,
    "spectra": _unit_spectra,
    "decomposition_diag": _unit_decomposition,
}

_SUMMARIES = {
    "alpha_scaling": _summary_alpha,
    "odd_k_scaling": _summary_odd_k,
    "spectra": _summary_spectra,
}


def _run_unit(experiment: str, cfg: dict, k: int, x: float) -> list[dict]:
    try:
        return _UNITS[experiment](cfg, k, x)
    except NonConvergenceError as err:
        return [_fail_row(experiment, k, x, "unit_converged", ANCHOR_ESCAPED,
                          str(err))]


def _axis_values(cfg: ExperimentConfig) -> tuple[float, ...]:
    if cfg.experiment == "spectra":
        return tuple(float(n) for n in cfg.unit_grid_sizes)
    return cfg.R_list


def run(config, threads: int | None = None) -> ResultTable:
    """Execute one experiment end to end and write its artifacts.

    Accepts a config path, JSON text, dict, or an ExperimentConfig.  Fans the
    (k, axis) grid over a process pool when more than one worker is
    requested, merges rows in sorted unit order, appends summary rows, then
    writes results.csv / results.json, the resolved config echo, plot data
    when the experiment has a series recipe, and a manifest.  Solver failures
    become failed rows; the run always completes.
    """
    cfg = load_config(config)
    if threads is not None:
        cfg = load_config({**cfg.to_dict(), "threads": int(threads)})
    t0 = time.perf_counter()
    cfg_dict = cfg.to_dict()

    units = [(k, x) for k in cfg.k for x in _axis_values(cfg)]
    unit_rows: list[list[dict]] = []
    if cfg.threads > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_run_unit, cfg.experiment, cfg_dict, k, x)
                       for k, x in units]
            unit_rows = [f.result() for f in futures]
    else:
        unit_rows = [_run_unit(cfg.experiment, cfg_dict, k, x)
                     for k, x in units]

    order = sorted(range(len(units)), key=lambda i: units[i])
    rows = [row for i in order for row in unit_rows[i]]
    if cfg.experiment in _SUMMARIES:
        rows.extend(_SUMMARIES[cfg.experiment](cfg_dict, rows))
    warnings: list[str] = []
    for r in rows:
        note = r.pop("_note", None)
        if note:
            warnings.append(f"{r['quantity']} (k={r['k']}, R={r['R']:g}): {note}")
    table = ResultTable(rows=[ResultRow(**r) for r in rows])

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "results.csv")
    table.to_json(out / "results.json")
    config_text = json.dumps(cfg_dict, indent=2, sort_keys=True) + "\n"
    (out / "config_resolved.json").write_text(config_text)

    artifacts = ["results.csv", "results.json", "config_resolved.json"]
    if cfg.experiment in _PLOT_RECIPES:
        made, warn = emit_plotdata(table, cfg.experiment, out)
        artifacts.extend(made)
        warnings.extend(warn)

    manifest = {
        "code_version": __version__,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "artifacts": sorted(artifacts),
        "warnings": warnings,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return table


# (quantity to plot, x-axis extractor, axis labels)
_PLOT_RECIPES = {
    "alpha_scaling": ("alpha", lambda r: math.log(r.R),
                      {"x": "ln R", "y": "alpha_R"}),
    "odd_k_scaling": ("min_energy", lambda r: math.log(r.R),
                      {"x": "ln R", "y": "minimal energy"}),
    "spectra": ("lambda1_unconstrained", lambda r: r.R,
                {"x": "grid size", "y": "lambda_1"}),
}


def emit_plotdata(table: ResultTable, kind: str, out_dir) -> tuple[list[str], list[str]]:
    """Two-column series files plus a JSON axis descriptor, no rendering.

    Returns (artifact names, warnings); a kind with no matching rows still
    writes an empty data file but flags it, per the orchestration contract.
    """
    if kind not in _PLOT_RECIPES:
        raise ValueError(f"no plot-data recipe for {kind!r}")
    quantity, x_of, axes = _PLOT_RECIPES[kind]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [r for r in table.rows if r.quantity == quantity]
    rows.sort(key=lambda r: (r.k, x_of(r)))
    dat = out / f"{kind}.dat"
    with open(dat, "w") as fh:
        for r in rows:
            fh.write(f"{x_of(r)!r} {r.value!r}\n")
    desc = out / f"{kind}.axes.json"
    desc.write_text(json.dumps({**axes, "series": quantity, "points": len(rows)},
                               indent=2, sort_keys=True) + "\n")
    warnings = [] if rows else [f"no rows for plot kind {kind!r}"]
    return [dat.name, desc.name], warnings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ldgdisk",
        description="Run a disk-anchoring experiment from a JSON config.")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--experiment", choices=EXPERIMENT_IDS,
                        help="experiment id (overrides the config's)")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--seed", type=int,
                        help="base seed; start i uses seed + i")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes for the (k, R) fan-out")
    args = parser.parse_args(argv)

    if args.config is None and args.experiment is None:
        parser.error("need --config and/or --experiment")
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            if args.experiment and args.experiment != cfg.experiment:
                cfg = default_config(args.experiment,
                                     **{kk: vv for kk, vv in cfg.to_dict().items()
                                        if kk not in ("experiment", "out_dir")})
        else:
            cfg = default_config(args.experiment)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    updates: dict = {}
    if args.out:
        updates["out_dir"] = args.out
    if args.seed is not None:
        updates["seeds"] = tuple(args.seed + i for i in range(len(cfg.seeds)))
    if args.threads is not None:
        updates["threads"] = args.threads
    if updates:
        cfg = ExperimentConfig(**{**cfg.to_dict(), **updates})

    table = run(cfg)
    for row in table.rows:
        print(f"[{row.status}] {row.experiment} k={row.k} R={row.R:g} "
              f"{row.quantity} = {row.value:.6g}")
    return 0 if not table.failed else 1


if __name__ == "__main__":
    sys.exit(main())
