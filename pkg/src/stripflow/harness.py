"""Experiment orchestration: configuration, runs, sweeps, persistence.

A RunConfig (one human-editable JSON file) describes the grid, the
weight parameters, the data, the solver settings, and the experiment
kind.  `cmd_run` executes a single solver run and writes an energy CSV,
snapshots, and a metadata echo; `cmd_sweep` runs the aspect-ratio
convergence study against a shared reference run; `cmd_report` turns a
finished directory into a plain-text table plus plot-ready two-column
files; `cmd_verify` bundles the property suite into an exit status and
a machine-readable report.

Determinism contract: a given config produces bit-identical CSV bytes
on every run — all floats are printed with 17 significant digits and
nothing time- or host-dependent enters the CSV (wall time lives in the
metadata JSON only).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import EnergyReport, Sample, energy_E1, energy_E_s
from .gevrey import PROFILES, GevreyParams, make_gevrey_data
from .grid import Field, Grid, l2_norm
from .hns import CFL_LIMIT, HnsState, hns_step, make_hns_data
from .prandtl import PrandtlState, SolverAbort, prandtl_step, recover_v
from .verify import verify_all

VERSION_STRING = f"stripflow-{__version__}"
SNAPSHOT_MAGIC = b"STRF"
SNAPSHOT_VERSION = 1
OUTPUT_ROOT_ENV = "STRIPFLOW_OUTPUT_ROOT"

# config keys by JSON section; field defaults live on the dataclass
_GROUPS = {
    "grid": ("Lx", "Nx", "Ny"),
    "gevrey": ("a", "lam", "poincare"),
    "data": ("amplitude", "m_max", "profile", "u1"),
    "solver": ("dt", "cfl_factor", "T_final", "n_proj", "n_check", "pressure_factor"),
    "experiment": ("kind", "eps", "eps_list", "self_test"),
    "output": ("directory", "sample_every"),
}

_DOCS = {
    "Lx": "domain period in x (> 0)",
    "Nx": "number of x collocation points (even, >= 4)",
    "Ny": "number of y nodes including both walls (>= 9)",
    "a": "initial Gevrey radius (> 0)",
    "lam": "radius loss multiplier (>= 1)",
    "poincare": "Poincare constant; decay rate K = min(1/6, 1/(4(1+poincare)))",
    "amplitude": "data amplitude (>= 0)",
    "m_max": "highest excited x-mode (1 <= m_max <= Nx/2 - 1)",
    "profile": "vertical profile id (known ids: " + ", ".join(sorted(PROFILES)) + ")",
    "u1": "initial time derivative: 'zero' or 'half-decay' (u1 = -u0/2)",
    "dt": "time step; null selects cfl_factor * dy",
    "cfl_factor": f"auto time step as a multiple of dy (0 < f <= {CFL_LIMIT})",
    "T_final": "integration horizon (> 0, at least one step long)",
    "n_proj": "constraint re-projection cadence in steps, scaled system (>= 1)",
    "n_check": "invariant check cadence in steps (>= 1)",
    "pressure_factor": "prefactor of the nonlinear term in the mean pressure law "
    "(1 conserves the vertical mean exactly)",
    "kind": "experiment kind: prandtl | hns | sweep",
    "eps": "aspect ratio for kind = hns (0 < eps <= 1)",
    "eps_list": "sweep members; positive, strictly decreasing, >= 3 entries",
    "self_test": "sweep self-comparison: members rerun the reference solver, "
    "errors must sit at zero and the slope fit is skipped",
    "directory": "output directory; relative paths live under "
    f"${OUTPUT_ROOT_ENV} when that is set",
    "sample_every": "diagnostic sampling cadence in steps (>= 1)",
}


@dataclass
class RunConfig:
    """Validated settings for one run or sweep; see `schema()` for docs."""

    Lx: float = 2.0 * np.pi
    Nx: int = 64
    Ny: int = 65
    a: float = 0.5
    lam: float = 1.0
    poincare: float = 1.0 / np.pi**2
    amplitude: float = 1e-4
    m_max: int = 4
    profile: str = "sin2py"
    u1: str = "zero"
    dt: float | None = None
    cfl_factor: float = 0.25
    T_final: float = 2.0
    n_proj: int = 50
    n_check: int = 100
    pressure_factor: float = 1.0
    kind: str = "prandtl"
    eps: float = 0.5
    eps_list: tuple = (0.1, 0.05, 0.025, 0.0125)
    self_test: bool = False
    directory: str = "stripflow-out"
    sample_every: int = 10

    def validate(self) -> None:
        """Check every numeric range before any work happens."""
        self.make_grid()  # Lx / Nx / Ny range errors come from the grid
        self.gevrey_params()  # a / lam / poincare likewise
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not (1 <= self.m_max <= self.Nx // 2 - 1):
            raise ValueError(
                f"m_max must lie in [1, Nx/2 - 1] = [1, {self.Nx // 2 - 1}], "
                f"got {self.m_max}"
            )
        if self.profile not in PROFILES:
            raise ValueError(
                f"unknown profile id {self.profile!r}; known: {sorted(PROFILES)}"
            )
        if self.u1 not in ("zero", "half-decay"):
            raise ValueError(f"u1 must be 'zero' or 'half-decay', got {self.u1!r}")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError(f"dt must be positive or null, got {self.dt}")
        if not (0.0 < self.cfl_factor <= CFL_LIMIT):
            raise ValueError(
                f"cfl_factor must lie in (0, {CFL_LIMIT}], got {self.cfl_factor}"
            )
        if self.T_final <= 0.0:
            raise ValueError(f"T_final must be positive, got {self.T_final}")
        if int(round(self.T_final / self.effective_dt())) < 1:
            raise ValueError("T_final is shorter than one time step")
        for name in ("n_proj", "n_check", "sample_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.pressure_factor <= 0.0:
            raise ValueError(
                f"pressure_factor must be positive, got {self.pressure_factor}"
            )
        if self.kind not in ("prandtl", "hns", "sweep"):
            raise ValueError(f"kind must be prandtl | hns | sweep, got {self.kind!r}")
        if not (0.0 < self.eps <= 1.0):
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        eps_list = tuple(float(e) for e in self.eps_list)
        if any(e <= 0.0 for e in eps_list) or any(e > 1.0 for e in eps_list):
            raise ValueError(f"eps_list entries must lie in (0, 1], got {eps_list}")
        if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
            raise ValueError(f"eps_list must be strictly decreasing, got {eps_list}")
        if self.kind == "sweep" and len(eps_list) < 3:
            raise ValueError(f"a sweep needs >= 3 eps values, got {len(eps_list)}")
        if not self.directory:
            raise ValueError("output directory must be a nonempty path")

    def make_grid(self) -> Grid:
        return Grid(self.Nx, self.Ny, Lx=self.Lx)

    def gevrey_params(self) -> GevreyParams:
        return GevreyParams(a=self.a, lam=self.lam, poincare=self.poincare)

    def effective_dt(self) -> float:
        if self.dt is not None:
            return float(self.dt)
        return self.cfl_factor * self.make_grid().dy

    def make_data(self) -> tuple[Field, Field]:
        g = self.make_grid()
        u0, u1 = make_gevrey_data(
            g, self.gevrey_params(), self.amplitude, self.m_max, self.profile
        )
        if self.u1 == "half-decay":
            u1 = u0 * (-0.5)
        return u0, u1

    def to_dict(self) -> dict:
        out: dict = {}
        for group, keys in _GROUPS.items():
            out[group] = {}
            for key in keys:
                val = getattr(self, key)
                if isinstance(val, tuple):
                    val = list(val)
                out[group][key] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        for group in data:
            if group not in _GROUPS:
                raise ValueError(f"unknown config section {group!r}")
        kwargs = {}
        for group, keys in _GROUPS.items():
            sub = data.get(group, {})
            for key in sub:
                if key not in keys:
                    raise ValueError(f"unknown config key {group}.{key}")
            for key in keys:
                if key in sub:
                    val = sub[key]
                    if key == "eps_list":
                        val = tuple(float(e) for e in val)
                    kwargs[key] = val
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def schema(cls) -> dict:
        """Every key with its default and its documentation, by section."""
        defaults = cls()
        out: dict = {}
        for group, keys in _GROUPS.items():
            out[group] = {}
            for key in keys:
                val = getattr(defaults, key)
                if isinstance(val, tuple):
                    val = list(val)
                out[group][key] = {"default": val, "doc": _DOCS[key]}
        return out


@dataclass(frozen=True)
class SweepResult:
    """Per-member errors of an aspect-ratio sweep plus the fitted slope.

    slope/intercept come from least squares on log(sup error) vs
    log(eps); they are None when the fit is skipped (self-test mode or
    an exactly-zero error).
    """

    eps: tuple
    sup_errors: tuple
    final_errors: tuple
    energy_errors: tuple
    slope: float | None
    intercept: float | None
    directory: str

    def validate(self) -> None:
        for name in ("sup_errors", "final_errors", "energy_errors"):
            vals = np.asarray(getattr(self, name), dtype=float)
            if vals.size != len(self.eps):
                raise AssertionError(f"{name} length does not match eps list")
            if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
                raise AssertionError(f"{name} must be finite and nonnegative")
        if self.slope is not None and not np.isfinite(self.slope):
            raise AssertionError("fitted slope is not finite")


def resolve_output_dir(directory: str) -> Path:
    """Root-relative output location, honoring the env override."""
    path = Path(directory)
    if path.is_absolute():
        return path
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return (Path(root) / path) if root else path


# ---------------------------------------------------------------------------
# snapshots: binary state files with a magic header and a version byte
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sBBIIddd")  # magic, version, kind, Nx, Ny, Lx, t, eps
_KIND_PRANDTL, _KIND_HNS = 0, 1


def write_snapshot(path, state) -> Path:
    """Serialize a solver state; layout (little-endian):

    magic "STRF" | version u8 | kind u8 (0 horizontal-only, 1 scaled pair)
    | Nx u32 | Ny u32 | Lx f64 | t f64 | eps f64, then the complex128
    coefficient arrays in C order: u, ut (and v, vt for the pair).
    """
    g = state.u.grid
    is_pair = isinstance(state, HnsState)
    kind = _KIND_HNS if is_pair else _KIND_PRANDTL
    eps = state.eps if is_pair else 1.0
    fields = [state.u, state.ut] if not is_pair else [state.u, state.v, state.ut, state.vt]
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                SNAPSHOT_MAGIC, SNAPSHOT_VERSION, kind, g.Nx, g.Ny, g.Lx, state.t, eps
            )
        )
        for f in fields:
            fh.write(np.ascontiguousarray(f.coeff, dtype="<c16").tobytes())
    return path


def read_snapshot(path):
    """Inverse of write_snapshot; returns the reconstructed state."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, kind, Nx, Ny, Lx, t, eps = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot file (bad magic {magic!r})")
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    g = Grid(Nx, Ny, Lx=Lx)
    n_fields = 2 if kind == _KIND_PRANDTL else 4
    need = _HEADER.size + n_fields * Nx * Ny * 16
    if len(raw) != need:
        raise ValueError(f"{path}: expected {need} bytes, found {len(raw)}")
    arrs = []
    off = _HEADER.size
    for _ in range(n_fields):
        arr = np.frombuffer(raw, dtype="<c16", count=Nx * Ny, offset=off)
        arrs.append(Field(g, arr.reshape(Nx, Ny).copy()))
        off += Nx * Ny * 16
    if kind == _KIND_PRANDTL:
        return PrandtlState(u=arrs[0], ut=arrs[1], t=t)
    if kind != _KIND_HNS:
        raise ValueError(f"{path}: unknown snapshot kind {kind}")
    return HnsState(u=arrs[0], v=arrs[1], ut=arrs[2], vt=arrs[3], eps=eps, t=t)


# ---------------------------------------------------------------------------
# CSV emission (17 significant digits everywhere, fully qualified headers)
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path, header, columns) -> Path:
    """columns is a list of arrays aligned with header."""
    n = len(columns[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(n):
            w.writerow([_fmt(col[i]) for col in columns])
    return Path(path)


_ES_HEADERS = [
    ("term1", "E_s.term1.Linf.B_s"),
    ("term2", "E_s.term2.Linf.B_s+1/4"),
    ("term3", "E_s.term3.Linf.B_s+1/2"),
    ("term4", "E_s.term4.L2w.B_s+1/4"),
    ("term5", "E_s.term5.L2w.B_s+1/2"),
    ("term6", "E_s.term6.L2w.B_s+3/4"),
    ("term7", "E_s.term7.L2.B_s"),
]

_E1_HEADERS = [
    ("term1", "E_1.term1.Linf.B_1/2"),
    ("term2", "E_1.term2.Linf.B_3/4"),
    ("term3", "E_1.term3.Linf.B_1"),
    ("term4", "E_1.term4.L2.B_1/2"),
]


def _energy_csv(path, samples, report: EnergyReport, pair: bool, div_rel=None):
    header = ["time", "l2.u", "l2.ut"]
    cols = [
        report.times,
        np.array([l2_norm(s.u) for s in samples]),
        np.array([l2_norm(s.ut) for s in samples]),
    ]
    if div_rel is not None:
        header.append("div.rel")
        cols.append(np.asarray(div_rel))
    names = _E1_HEADERS if pair else _ES_HEADERS
    for key, col_name in names:
        header.append(col_name)
        cols.append(report.terms[key])
    prefix = "E_1" if pair else "E_s"
    header.append(f"{prefix}.composite")
    cols.append(report.composite)
    if report.composite_full is not None:
        header.append(f"{prefix}.composite_full")
        cols.append(report.composite_full)
    s_name = "B_1/2" if pair else "B_s"
    for key in ("u", "dy_u", "ut"):
        header.append(f"point.{key}.{s_name}")
        cols.append(report.point_norms[key])
    header += ["radius", "trust_horizon"]
    cols += [report.radius, report.trust_horizon]
    return _write_csv(path, header, cols)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify(Nx: int = 64, Ny: int = 33, corrupt: str | None = None) -> dict:
    """Run the property suite; returns the machine-readable report dict.

    The dict carries "passed" (overall), "failed" (names), and per-check
    entries; the CLI exits 0 iff "passed".
    """
    results = verify_all(Nx=Nx, Ny=Ny, corrupt=corrupt)
    return {
        "version": VERSION_STRING,
        "passed": all(r.passed for r in results),
        "failed": [r.name for r in results if not r.passed],
        "checks": [dataclasses.asdict(r) for r in results],
    }


def _collect_run(cfg: RunConfig):
    """Execute the configured single run; returns (samples, extras, abort)."""
    p = cfg.gevrey_params()
    u0, u1 = cfg.make_data()
    dt = cfg.effective_dt()
    n_steps = int(round(cfg.T_final / dt))
    abort = None
    if cfg.kind == "prandtl":
        state = PrandtlState(u=u0, ut=u1)
        step = lambda s, check: prandtl_step(
            s, dt, factor=cfg.pressure_factor, check=check
        )
        div_rel = None
    else:
        state = make_hns_data(u0, p, eps=cfg.eps, u1=(None if cfg.u1 == "zero" else u1))
        step = lambda s, check: hns_step(s, dt, check=check, n_proj=cfg.n_proj)
        div_rel = [state.divergence_rel()]
    samples = [Sample.from_state(state)]
    done = 0
    try:
        for i in range(n_steps):
            state = step(state, (i + 1) % cfg.n_check == 0)
            done = i + 1
            if done % cfg.sample_every == 0:
                samples.append(Sample.from_state(state))
                if div_rel is not None:
                    div_rel.append(state.divergence_rel())
    except SolverAbort as exc:
        abort = str(exc)
        state = exc.state if exc.state is not None else state
    return samples, state, div_rel, dt, n_steps, done, abort


def cmd_run(cfg: RunConfig) -> Path:
    """Run one configured solver; returns the populated run directory.

    Writes energy.csv (per-sample diagnostics), snapshots/initial.snap
    and snapshots/final.snap, and metadata.json.  A solver abort keeps
    whatever was collected and is flagged in the metadata.
    """
    cfg.validate()
    if cfg.kind not in ("prandtl", "hns"):
        raise ValueError(f"cmd_run handles kind prandtl | hns, got {cfg.kind!r}")
    out = resolve_output_dir(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "snapshots").mkdir(exist_ok=True)

    t_wall = time.perf_counter()
    p = cfg.gevrey_params()
    samples, state, div_rel, dt, n_steps, done, abort = _collect_run(cfg)
    write_snapshot(out / "snapshots" / "initial.snap", _sample_state(samples[0], cfg))
    write_snapshot(out / "snapshots" / "final.snap", state)

    if cfg.kind == "prandtl":
        report = energy_E_s(samples, 0.5, p)
        _energy_csv(out / "energy.csv", samples, report, pair=False)
    else:
        report = energy_E1(samples, cfg.eps, p)
        _energy_csv(out / "energy.csv", samples, report, pair=True, div_rel=div_rel)

    meta = {
        "version": VERSION_STRING,
        "config": cfg.to_dict(),
        "kind": cfg.kind,
        "dt": dt,
        "planned_steps": n_steps,
        "completed_steps": done,
        "n_samples": len(samples),
        "abort": abort,
        "wall_time_s": time.perf_counter() - t_wall,
    }
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return out


def _sample_state(smp: Sample, cfg: RunConfig):
    if cfg.kind == "prandtl":
        return PrandtlState(u=smp.u, ut=smp.ut, t=smp.t)
    return HnsState(u=smp.u, v=smp.v, ut=smp.ut, vt=smp.vt, eps=cfg.eps, t=smp.t)


def cmd_sweep(cfg: RunConfig) -> SweepResult:
    """Aspect-ratio convergence study against a shared reference run.

    One reference run (the limit system) and one scaled run per eps, all
    from the same data, grid, and time step, sampled at the same times.
    Per member: sup-in-time and final-time L2 error of the horizontal
    difference, plus the undamped pair-energy of the difference fields.
    Writes sweep.csv and metadata.json into the output directory.
    """
    cfg.validate()
    if cfg.kind != "sweep":
        raise ValueError(f"cmd_sweep needs kind = sweep, got {cfg.kind!r}")
    out = resolve_output_dir(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    t_wall = time.perf_counter()
    p = cfg.gevrey_params()
    u0, u1 = cfg.make_data()
    dt = cfg.effective_dt()
    n_steps = int(round(cfg.T_final / dt))

    def run_reference():
        state = PrandtlState(u=u0, ut=u1)
        samples = [_pair_sample(state)]
        try:
            for i in range(n_steps):
                state = prandtl_step(
                    state, dt, factor=cfg.pressure_factor,
                    check=(i + 1) % cfg.n_check == 0,
                )
                if (i + 1) % cfg.sample_every == 0:
                    samples.append(_pair_sample(state))
        except SolverAbort as exc:
            raise RuntimeError(f"sweep reference (prandtl) aborted: {exc}") from exc
        return samples

    def run_member(eps):
        if cfg.self_test:
            return run_reference()
        state = make_hns_data(u0, p, eps=eps)
        samples = [Sample.from_state(state)]
        try:
            for i in range(n_steps):
                state = hns_step(
                    state, dt, check=(i + 1) % cfg.n_check == 0, n_proj=cfg.n_proj
                )
                if (i + 1) % cfg.sample_every == 0:
                    samples.append(Sample.from_state(state))
        except SolverAbort as exc:
            raise RuntimeError(f"sweep member eps={eps} aborted: {exc}") from exc
        return samples

    reference = run_reference()
    ref_times = np.array([s.t for s in reference])
    sup_errors, final_errors, energy_errors = [], [], []
    for eps in cfg.eps_list:
        member = run_member(eps)
        times = np.array([s.t for s in member])
        if not np.array_equal(times, ref_times):
            raise RuntimeError(
                f"sweep member eps={eps}: sample times diverged from the reference"
            )
        g = u0.grid
        diffs = [
            Sample(
                t=m.t,
                u=Field(g, m.u.coeff - r.u.coeff),
                ut=Field(g, m.ut.coeff - r.ut.coeff),
                v=Field(g, m.v.coeff - r.v.coeff),
                vt=Field(g, m.vt.coeff - r.vt.coeff),
            )
            for m, r in zip(member, reference)
        ]
        errs = np.array([l2_norm(d.u) for d in diffs])
        sup_errors.append(float(errs.max()))
        final_errors.append(float(errs[-1]))
        energy_errors.append(
            float(energy_E1(diffs, eps, p, decay_rates=False).composite[-1])
        )

    if cfg.self_test or min(sup_errors) <= 0.0:
        slope = intercept = None
    else:
        slope_arr = np.polyfit(np.log(cfg.eps_list), np.log(sup_errors), 1)
        slope, intercept = float(slope_arr[0]), float(slope_arr[1])

    result = SweepResult(
        eps=tuple(cfg.eps_list),
        sup_errors=tuple(sup_errors),
        final_errors=tuple(final_errors),
        energy_errors=tuple(energy_errors),
        slope=slope,
        intercept=intercept,
        directory=str(out),
    )
    result.validate()

    _write_csv(
        out / "sweep.csv",
        ["eps", "sup_error.l2", "final_error.l2", "error_energy.E1_0"],
        [
            np.asarray(cfg.eps_list),
            np.asarray(sup_errors),
            np.asarray(final_errors),
            np.asarray(energy_errors),
        ],
    )
    meta = {
        "version": VERSION_STRING,
        "config": cfg.to_dict(),
        "slope": slope,
        "intercept": intercept,
        "self_test": cfg.self_test,
        "dt": dt,
        "planned_steps": n_steps,
        "wall_time_s": time.perf_counter() - t_wall,
    }
    with open(out / "metadata.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return result


def _pair_sample(state: PrandtlState) -> Sample:
    """Reference sample carrying the slaved vertical pair."""
    return Sample(
        t=state.t,
        u=state.u,
        ut=state.ut,
        v=recover_v(state.u),
        vt=recover_v(state.ut),
    )


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return header, data


def _safe_name(column: str) -> str:
    return column.replace("/", "_")


def cmd_report(directory) -> list[Path]:
    """Summarize a finished run or sweep directory.

    Emits report.txt (plain-text table) plus plot-ready two-column
    files: time vs each energy column for a run, log10(eps) vs
    log10(sup error) for a sweep.  Returns the paths written.
    """
    d = Path(directory)
    sweep_csv = d / "sweep.csv"
    energy_csv = d / "energy.csv"
    written: list[Path] = []
    if sweep_csv.exists():
        header, data = _read_csv(sweep_csv)
        loglog = d / "loglog.dat"
        with open(loglog, "w", encoding="utf-8") as fh:
            fh.write("# log10(eps)  log10(sup_error.l2)\n")
            for row in data:
                lo = np.log10(row[0])
                hi = np.log10(row[1]) if row[1] > 0 else -np.inf
                fh.write(f"{lo:.17g} {hi:.17g}\n")
        written.append(loglog)
        report = d / "report.txt"
        with open(report, "w", encoding="utf-8") as fh:
            fh.write("  ".join(f"{h:>22}" for h in header) + "\n")
            for row in data:
                fh.write("  ".join(f"{v:>22.9e}" for v in row) + "\n")
        written.append(report)
        return written
    if energy_csv.exists():
        header, data = _read_csv(energy_csv)
        for j, name in enumerate(header):
            if not name.startswith(("E_s.", "E_1.")):
                continue
            out = d / f"{_safe_name(name)}.dat"
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(f"# time  {name}\n")
                for row in data:
                    fh.write(f"{row[0]:.17g} {row[j]:.17g}\n")
            written.append(out)
        report = d / "report.txt"
        with open(report, "w", encoding="utf-8") as fh:
            fh.write("  ".join(f"{h:>22}" for h in header) + "\n")
            for row in data:
                fh.write("  ".join(f"{v:>22.9e}" for v in row) + "\n")
        written.append(report)
        return written
    raise FileNotFoundError(
        f"{d}: neither energy.csv nor sweep.csv found; nothing to report"
    )
