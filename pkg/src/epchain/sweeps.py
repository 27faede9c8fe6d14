"""Experiment sweeps and machine-readable output writers.

Every bundled experiment reduces to evaluating the chain pipeline over a
parameter grid and emitting rows.  Grids are evaluated cell by cell (in a
process pool when requested), assembled strictly by grid index, and written
with a pinned float format of 17 significant digits, so identical
configurations produce byte-identical files regardless of thread count.
Each data file gets a sidecar ``<name>.manifest.json`` echoing the
configuration and the tool version.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .chain import ChainSpec, build_bdg_matrix, build_chain_spec, quadrature_generator
from .dynamics import evolve, initial_state
from .entanglement import (
    Bipartition,
    bkc_nu_minus,
    enhancement_ratio,
    entanglement_result,
    nu_closed_form_three_mode_nonuniform,
    three_mode_surface_spec,
)
from .errors import ConfigError, NoTransition, OverflowRisk, UnsortedTimes
from .spectral import (
    DEFAULT_RANK_TOL,
    DEFAULT_REGION_TOL,
    detect_eps,
    locate_ep_1d,
    scan_exceptional_surface,
    spectrum_report,
)

__all__ = [
    "SweepAxis",
    "SweepPlan",
    "format_value",
    "write_rows",
    "write_manifest",
    "spectrum_sweep",
    "entanglement_trajectory",
    "fig2_grid",
    "fig3_tables",
    "fig4_grid",
    "es_scan_table",
]

AXIS_NAMES = ("g", "J", "eta", "phi", "g1", "g2", "J1", "J2", "t", "N")


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: an inclusive linear range."""

    name: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown sweep axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.steps < 1:
            raise ConfigError(f"axis {self.name!r} needs at least 1 step, got {self.steps}")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ConfigError(f"axis {self.name!r} range is not finite")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)

    @classmethod
    def from_config(cls, name: str, cfg) -> "SweepAxis":
        if isinstance(cfg, dict):
            try:
                return cls(name, float(cfg["start"]), float(cfg["stop"]), int(cfg["steps"]))
            except KeyError as exc:
                raise ConfigError(f"axis {name!r} config needs start/stop/steps") from exc
        if isinstance(cfg, (list, tuple)) and len(cfg) == 3:
            return cls(name, float(cfg[0]), float(cfg[1]), int(cfg[2]))
        raise ConfigError(f"axis {name!r} config must be [start, stop, steps] or a mapping")


@dataclass(frozen=True)
class SweepPlan:
    """A chain template plus swept axes, sample times, and output routing."""

    chain: dict
    axes: tuple[SweepAxis, ...] = ()
    times: tuple[float, ...] = ()
    partitions: tuple[str, ...] = ()
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        build_chain_spec(self.chain)  # validate eagerly
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {self.fmt!r}")
        if any(not np.isfinite(t) for t in self.times):
            raise ConfigError("sample times must be finite")


def format_value(value) -> str:
    """Pinned text form: 17 significant digits for floats, plain str otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write a table as CSV or JSON with deterministic formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    elif fmt == "json":
        payload = {
            "columns": list(header),
            "rows": [[format_value(v) for v in row] for row in rows],
        }
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    else:
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    return path


def write_manifest(data_path: str | Path, command: str, config: dict, extras: dict | None = None) -> Path:
    """Write the sidecar manifest next to a data file."""
    from . import __version__

    data_path = Path(data_path)
    manifest = {
        "tool": "epchain",
        "version": __version__,
        "command": command,
        "config": config,
        "data_file": data_path.name,
    }
    if extras:
        manifest["extras"] = extras
    out = data_path.with_name(data_path.name + ".manifest.json")
    out.write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    return out


# ---------------------------------------------------------------------------
# spectrum and trajectory commands

def _apply_axis(chain: dict, axis_name: str, value: float) -> dict:
    cfg = dict(chain)
    cfg[axis_name] = value
    return cfg


def spectrum_sweep(
    chain: dict,
    axis: SweepAxis | None = None,
    tol: float = DEFAULT_REGION_TOL,
    detect: bool = False,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[list[str], list[list], dict]:
    """Eigenvalues and region labels, optionally over one swept parameter.

    Returns (header, rows, extras); extras carries the located transition
    points of the swept family and any detected exceptional points.
    """
    base_spec = build_chain_spec(chain)
    size = 2 * base_spec.n_modes
    header = ["index", "region", "boundary"]
    if axis is not None:
        if axis.name not in ("g", "J", "eta", "phi"):
            raise ConfigError(f"spectrum sweeps support uniform axes g/J/eta/phi, not {axis.name!r}")
        header = ["index", axis.name, "region", "boundary"]
    header += [f"re_{i+1}" for i in range(size)] + [f"im_{i+1}" for i in range(size)]

    rows: list[list] = []
    extras: dict = {}
    points = axis.values() if axis is not None else [None]
    ep_rows = []
    for idx, value in enumerate(points):
        cfg = chain if value is None else _apply_axis(chain, axis.name, float(value))
        m = build_bdg_matrix(build_chain_spec(cfg))
        report = spectrum_report(m, tol)
        row: list = [idx]
        if value is not None:
            row.append(float(value))
        row += [report.region.value, report.boundary]
        row += [v.real for v in report.eigenvalues]
        row += [v.imag for v in report.eigenvalues]
        rows.append(row)
        if detect:
            for cluster in detect_eps(m, rank_tol=rank_tol):
                ep_rows.append(
                    {
                        "index": idx,
                        "center": [cluster.center.real, cluster.center.imag],
                        "multiplicity": cluster.algebraic_multiplicity,
                        "blocks": list(cluster.jordan_blocks),
                    }
                )
    if detect:
        extras["exceptional_points"] = ep_rows
    if axis is not None and axis.steps > 1:
        try:
            transitions = locate_ep_1d(
                lambda v: build_chain_spec(_apply_axis(chain, axis.name, v)),
                float(axis.start),
                float(axis.stop),
                region_tol=tol,
            )
            extras["transitions"] = list(transitions)
        except NoTransition:
            extras["transitions"] = []
    return header, rows, extras


def entanglement_trajectory(
    chain: dict,
    times: Sequence[float],
    partitions: Sequence[str],
    include_cm: bool = False,
) -> tuple[list[str], list[list], dict]:
    """nu_- and logarithmic negativity per time per partition.

    If the overflow guard trips at some time, remaining samples are dropped
    and a final warning row records where the trajectory was truncated.
    """
    spec = build_chain_spec(chain)
    if spec.n_modes < 2:
        raise ConfigError("entanglement requires at least two modes")
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise ConfigError("times must be a nonempty 1-d sequence")
    if np.any(np.diff(ts) < 0):
        raise UnsortedTimes(f"times must be sorted ascending, got {ts}")
    if not partitions:
        partitions = [Bipartition.one_vs_rest(spec.n_modes).label]
    parts = [Bipartition.from_label(p, spec.n_modes) for p in partitions]
    k = quadrature_generator(build_bdg_matrix(spec))
    state0 = initial_state(spec.n_modes)
    header = ["t"]
    for part in parts:
        header += [f"nu_minus_{part.label}", f"log_negativity_{part.label}"]
    if include_cm:
        n2 = 2 * spec.n_modes
        header += [f"cm_{i+1}_{j+1}" for i in range(n2) for j in range(i, n2)]
    rows: list[list] = []
    extras: dict = {}
    for t in times:
        try:
            state = evolve(state0, k, float(t))
        except OverflowRisk as exc:
            rows.append([f"warning: truncated at t={t:.6g}, growth exponent {exc.exponent:.1f}"]
                        + [""] * (len(header) - 1))
            extras["truncated_at"] = float(t)
            break
        row: list = [float(t)]
        for part in parts:
            res = entanglement_result(state, part)
            row += [res.nu_minus, res.log_negativity]
        if include_cm:
            n2 = 2 * spec.n_modes
            row += [float(state.cm[i, j]) for i in range(n2) for j in range(i, n2)]
        rows.append(row)
    return header, rows, extras


# ---------------------------------------------------------------------------
# figure-style grids

def _fig2_column(args: tuple) -> list[tuple[float, float]]:
    """(nu_minus, log_negativity) down one g column of the two-mode map."""
    g, eta, times = args
    spec = ChainSpec.uniform(2, g=g, j=1.0, eta=eta)
    k = quadrature_generator(build_bdg_matrix(spec))
    state0 = initial_state(2)
    part = Bipartition.one_vs_rest(2)
    out = []
    for t in times:
        res = entanglement_result(evolve(state0, k, float(t)), part)
        out.append((res.nu_minus, res.log_negativity))
    return out


def fig2_grid(
    eta: float = 0.2,
    g_axis: SweepAxis | None = None,
    t_axis: SweepAxis | None = None,
    tol: float = DEFAULT_REGION_TOL,
    threads: int = 1,
) -> tuple[list[str], list[list], dict]:
    """Two-mode witness map over hopping strength and time.

    Default grid: 301 hopping values on [0.5, 1.5] by 501 times on [0, 5],
    fine enough to resolve the splitting boundaries visibly.
    """
    g_axis = g_axis or SweepAxis("g", 0.5, 1.5, 301)
    t_axis = t_axis or SweepAxis("t", 0.0, 5.0, 501)
    g_values = g_axis.values()
    times = t_axis.values()
    regions = {
        float(g): spectrum_report(
            build_bdg_matrix(ChainSpec.uniform(2, g=float(g), j=1.0, eta=eta)), tol
        ).region.value
        for g in g_values
    }
    tasks = [(float(g), float(eta), tuple(float(t) for t in times)) for g in g_values]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(_fig2_column, tasks, chunksize=8))
    else:
        columns = [_fig2_column(task) for task in tasks]
    header = ["g", "t", "region", "nu_minus", "log_negativity"]
    rows = []
    for g, column in zip(g_values, columns):
        for t, (nu, logneg) in zip(times, column):
            rows.append([float(g), float(t), regions[float(g)], nu, logneg])
    extras = {"eta": eta, "g_steps": g_axis.steps, "t_steps": t_axis.steps}
    try:
        extras["transitions"] = list(
            locate_ep_1d(
                lambda g: ChainSpec.uniform(2, g=g, j=1.0, eta=eta),
                float(g_axis.start),
                float(g_axis.stop),
                region_tol=tol,
            )
        )
    except NoTransition:
        extras["transitions"] = []
    return header, rows, extras


def fig3_tables(
    n_values: Sequence[int] = (2, 3, 4, 5, 6),
    phi_steps: int = 65,
    t: float = 3.5,
    ratio_times: Sequence[float] = tuple(np.linspace(0.25, 3.5, 14)),
    fit_max_n: int = 30,
) -> tuple[tuple[list[str], list[list]], tuple[list[str], list[list]], dict]:
    """Uniform-chain witness versus hopping phase, plus enhancement ratios.

    Returns (witness table, ratio table, extras).  The witness table runs
    phi over [0, pi] (symmetry about pi/2 is reported in the extras); the
    ratio table gives R(N, t); the extras carry the exponential fit
    a*exp(b*N)+c of R(N) at the fixed time over N = 2..fit_max_n.
    """
    phis = np.linspace(0.0, math.pi, phi_steps)
    witness_rows = []
    by_key: dict[tuple[int, int], float] = {}
    for n in n_values:
        for i, phi in enumerate(phis):
            nu = bkc_nu_minus(int(n), float(phi), float(t))
            by_key[(int(n), i)] = nu
            witness_rows.append([int(n), float(phi), nu, -math.log(nu) if nu > 0 else math.inf])
    witness = (["N", "phi", "nu_minus", "neg_log_nu"], witness_rows)

    ratio_rows = []
    for n in n_values:
        if n < 2:
            continue
        for rt in ratio_times:
            ratio_rows.append([int(n), float(rt), enhancement_ratio(int(n), float(rt))])
    ratio = (["N", "t", "ratio"], ratio_rows)

    asymmetry = 0.0
    for n in n_values:
        for i in range(phi_steps // 2):
            mirrored = phi_steps - 1 - i
            asymmetry = max(asymmetry, abs(by_key[(int(n), i)] - by_key[(int(n), mirrored)]))

    fit_ns = np.arange(2, fit_max_n + 1)
    fit_rs = np.array([enhancement_ratio(int(n), float(t)) for n in fit_ns])
    with warnings.catch_warnings():
        # tiny fit ranges can make the parameter covariance singular; only
        # the point estimate is used
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(
            lambda n, a, b, c: a * np.exp(b * n) + c,
            fit_ns,
            fit_rs,
            p0=(-4.0, -0.5, 2.5),
            maxfev=20000,
        )
    extras = {
        "t": float(t),
        "phi_symmetry_residual": asymmetry,
        "ratio_fit": {"a": float(popt[0]), "b": float(popt[1]), "c": float(popt[2])},
        "ratio_fit_n_range": [2, int(fit_max_n)],
    }
    return witness, ratio, extras


def _fig4_cell(args: tuple) -> tuple[str, float]:
    g1, g2, j, t, tol = args
    spec = ChainSpec(3, hopping=(complex(g1), complex(g2)), pairing=float(j), sms=0)
    m = build_bdg_matrix(spec)
    region = spectrum_report(m, tol).region.value
    k = quadrature_generator(m)
    state = evolve(initial_state(3), k, t)
    res = entanglement_result(state, Bipartition.from_label("13|2", 3))
    return region, res.nu_minus


def fig4_grid(
    j: float = 1.0,
    t: float = 5.0,
    g1_axis: SweepAxis | None = None,
    g2_axis: SweepAxis | None = None,
    arc_steps: int = 65,
    tol: float = DEFAULT_REGION_TOL,
    threads: int = 1,
) -> tuple[tuple[list[str], list[list]], tuple[list[str], list[list]], dict]:
    """Three-mode witness map over (g1, g2) at equal pairing, plus the arc cut.

    The main table maps the middle-vs-outer witness at the fixed time; the
    second table cuts along the coalescence circle g1^2 + g2^2 = 2 J^2,
    parameterized by the angle from the arc point, with the closed-form
    witness alongside for comparison.
    """
    g1_axis = g1_axis or SweepAxis("g1", 0.0, 2.0, 81)
    g2_axis = g2_axis or SweepAxis("g2", 0.0, 2.0, 81)
    tasks = [
        (float(g1), float(g2), float(j), float(t), tol)
        for g1 in g1_axis.values()
        for g2 in g2_axis.values()
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(_fig4_cell, tasks, chunksize=32))
    else:
        cells = [_fig4_cell(task) for task in tasks]
    grid_rows = [
        [task[0], task[1], cell[0], cell[1]] for task, cell in zip(tasks, cells)
    ]
    grid = (["g1", "g2", "region", "nu_minus_13|2"], grid_rows)

    arc_rows = []
    for varphi in np.linspace(-math.pi / 4, math.pi / 4, arc_steps):
        spec = three_mode_surface_spec(float(varphi), j=j)
        m = build_bdg_matrix(spec)
        k = quadrature_generator(m)
        state = evolve(initial_state(3), k, t)
        res = entanglement_result(state, Bipartition.from_label("13|2", 3))
        arc_rows.append(
            [
                float(varphi),
                float(spec.hopping[0].real),
                float(spec.hopping[1].real),
                res.nu_minus,
                nu_closed_form_three_mode_nonuniform(float(varphi), j, t),
            ]
        )
    arc = (["varphi", "g1", "g2", "nu_minus_13|2", "nu_closed_form"], arc_rows)
    extras = {"j": float(j), "t": float(t)}
    return grid, arc, extras


def es_scan_table(
    g1_axis: SweepAxis,
    g2_axis: SweepAxis,
    j1_axis: SweepAxis,
    j2_axis: SweepAxis,
    tol: float = 1e-9,
    rank_tol: float = 1e-8,
    detect_everywhere: bool = False,
) -> tuple[list[str], list[list], dict]:
    """Exceptional-surface scan in the three-mode parameter space."""
    points = scan_exceptional_surface(
        g1_axis.values(),
        g2_axis.values(),
        j1_axis.values(),
        j2_axis.values(),
        tol=tol,
        rank_tol=rank_tol,
        detect_everywhere=detect_everywhere,
    )
    header = ["g1", "g2", "J1", "J2", "residual", "on_surface", "ep_order", "block_sizes"]
    rows = [
        [
            p.g1, p.g2, p.j1, p.j2, p.residual, p.on_surface, p.ep_order,
            "+".join(str(b) for b in p.block_sizes),
        ]
        for p in points
    ]
    n_on = sum(1 for p in points if p.on_surface)
    return header, rows, {"points": len(points), "on_surface": n_on}
