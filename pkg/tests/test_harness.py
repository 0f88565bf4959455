"""Tests for configuration, persistence, commands, and the property suite."""

import csv
import json

import numpy as np
import pytest

from stripflow import cli, harness
from stripflow.grid import Field, Grid, to_spectral
from stripflow.harness import (
    RunConfig,
    cmd_report,
    cmd_run,
    cmd_sweep,
    cmd_verify,
    read_snapshot,
    resolve_output_dir,
    write_snapshot,
)
from stripflow.hns import make_hns_data
from stripflow.gevrey import GevreyParams
from stripflow.prandtl import PrandtlState, SolverAbort


def small_cfg(tmp_path, **overrides):
    base = dict(
        Nx=16,
        Ny=17,
        amplitude=1e-4,
        m_max=2,
        T_final=0.5,
        directory=str(tmp_path / "out"),
        sample_every=4,
    )
    base.update(overrides)
    return RunConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    return header, data


class TestConfig:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_dict_round_trip(self):
        cfg = RunConfig(Nx=32, kind="hns", eps=0.25, dt=0.002)
        again = RunConfig.from_dict(cfg.to_dict())
        assert again == cfg

    def test_unknown_section_rejected(self):
        with pytest.raises(ValueError, match="unknown config section"):
            RunConfig.from_dict({"grd": {"Nx": 16}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key grid.Nz"):
            RunConfig.from_dict({"grid": {"Nz": 16}})

    @pytest.mark.parametrize(
        "overrides, match",
        [
            (dict(Nx=15), "even"),
            (dict(Ny=5), ">= 9"),
            (dict(amplitude=-1.0), "amplitude"),
            (dict(m_max=0), "m_max"),
            (dict(m_max=200), "m_max"),
            (dict(profile="nope"), "profile"),
            (dict(u1="bogus"), "u1"),
            (dict(dt=-0.1), "dt"),
            (dict(cfl_factor=0.9), "cfl_factor"),
            (dict(T_final=-1.0), "T_final"),
            (dict(T_final=1e-9), "shorter than one"),
            (dict(n_proj=0), "n_proj"),
            (dict(n_check=0), "n_check"),
            (dict(sample_every=0), "sample_every"),
            (dict(pressure_factor=0.0), "pressure_factor"),
            (dict(kind="bogus"), "kind"),
            (dict(eps=0.0), "eps"),
            (dict(eps=1.5), "eps"),
            (dict(eps_list=(0.1, 0.2, 0.3)), "strictly decreasing"),
            (dict(eps_list=(0.1, -0.2, -0.3)), r"\(0, 1\]"),
            (dict(kind="sweep", eps_list=(0.1, 0.05)), ">= 3"),
            (dict(directory=""), "directory"),
        ],
    )
    def test_bad_values_rejected(self, overrides, match):
        cfg = RunConfig(**overrides)
        with pytest.raises(ValueError, match=match):
            cfg.validate()

    def test_schema_covers_every_key(self):
        schema = RunConfig.schema()
        json.dumps(schema)  # must serialize
        flat = {k for group in schema.values() for k in group}
        import dataclasses

        assert flat == {f.name for f in dataclasses.fields(RunConfig)}
        for group in schema.values():
            for entry in group.values():
                assert set(entry) == {"default", "doc"}
                assert entry["doc"]

    def test_from_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"grid": {"Nx": 32, "Ny": 17}}))
        cfg = RunConfig.from_json(path)
        assert (cfg.Nx, cfg.Ny) == (32, 17)

    def test_effective_dt(self):
        cfg = RunConfig(Nx=16, Ny=17)
        assert cfg.effective_dt() == pytest.approx(0.25 / 16)
        assert RunConfig(Nx=16, Ny=17, dt=0.003).effective_dt() == 0.003

    def test_metadata_config_echo_is_json(self):
        json.dumps(RunConfig().to_dict())


class TestSnapshots:
    def rand_state(self, g, seed=0):
        rng = np.random.default_rng(seed)
        c = rng.standard_normal((g.Nx, g.Ny)) + 1j * rng.standard_normal((g.Nx, g.Ny))
        return PrandtlState(u=Field(g, c), ut=Field(g, 0.5 * c), t=1.75)

    def test_prandtl_round_trip(self, tmp_path):
        g = Grid(16, 17)
        st = self.rand_state(g)
        path = write_snapshot(tmp_path / "s.snap", st)
        back = read_snapshot(path)
        assert isinstance(back, PrandtlState)
        assert back.t == st.t
        assert back.u.grid == g
        assert np.array_equal(back.u.coeff, st.u.coeff)
        assert np.array_equal(back.ut.coeff, st.ut.coeff)

    def test_hns_round_trip(self, tmp_path):
        g = Grid(16, 17)
        x = np.arange(g.Nx) * g.Lx / g.Nx
        vals = 1e-3 * np.sin(x)[:, None] * np.sin(2 * np.pi * g.y)[None, :]
        st = make_hns_data(to_spectral(g, vals), GevreyParams(), eps=0.25)
        back = read_snapshot(write_snapshot(tmp_path / "h.snap", st))
        assert back.eps == 0.25
        for name in ("u", "v", "ut", "vt"):
            assert np.array_equal(getattr(back, name).coeff, getattr(st, name).coeff)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.snap"
        path.write_bytes(b"XXXX" + bytes(60))
        with pytest.raises(ValueError, match="bad magic"):
            read_snapshot(path)

    def test_truncated_rejected(self, tmp_path):
        g = Grid(16, 17)
        path = write_snapshot(tmp_path / "t.snap", self.rand_state(g))
        path.write_bytes(path.read_bytes()[:100])
        with pytest.raises(ValueError, match="expected"):
            read_snapshot(path)

    def test_wrong_version_rejected(self, tmp_path):
        g = Grid(16, 17)
        path = write_snapshot(tmp_path / "v.snap", self.rand_state(g))
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(ValueError, match="version"):
            read_snapshot(path)


class TestVerifyCmd:
    def test_default_suite_passes(self):
        report = cmd_verify()
        assert report["passed"] is True
        assert report["failed"] == []
        names = [c["name"] for c in report["checks"]]
        assert "partition-of-unity" in names
        assert "linear-mode-hns" in names
        json.dumps(report)

    def test_tiny_grid_passes(self):
        report = cmd_verify(Nx=16, Ny=9)
        assert report["passed"] is True

    def test_fault_injection_fails_named_check(self):
        report = cmd_verify(Nx=16, Ny=9, corrupt="phi")
        assert report["passed"] is False
        assert report["failed"] == ["partition-of-unity"]


class TestCmdRun:
    def test_run_writes_outputs(self, tmp_path):
        cfg = small_cfg(tmp_path)
        out = cmd_run(cfg)
        assert (out / "energy.csv").exists()
        assert (out / "snapshots" / "initial.snap").exists()
        assert (out / "snapshots" / "final.snap").exists()
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["config"] == cfg.to_dict()
        assert meta["abort"] is None
        assert meta["completed_steps"] == meta["planned_steps"]
        final = read_snapshot(out / "snapshots" / "final.snap")
        assert final.t == pytest.approx(cfg.T_final, rel=1e-9)

    def test_zero_amplitude_gives_zero_energy(self, tmp_path):
        out = cmd_run(small_cfg(tmp_path, amplitude=0.0))
        header, data = read_csv(out / "energy.csv")
        for j, name in enumerate(header):
            if name.startswith(("E_s.", "l2.", "point.")):
                assert np.all(data[:, j] == 0.0), name
        assert np.all(np.diff(data[:, header.index("time")]) > 0.0)

    def test_determinism_bit_identical_csv(self, tmp_path):
        cfg = small_cfg(tmp_path, kind="hns", eps=0.5)
        first = (cmd_run(cfg) / "energy.csv").read_bytes()
        second = (cmd_run(cfg) / "energy.csv").read_bytes()
        assert first == second

    def test_csv_floats_round_trip(self, tmp_path):
        out = cmd_run(small_cfg(tmp_path))
        lines = (out / "energy.csv").read_text().splitlines()
        for cell in lines[1].split(",") + lines[-1].split(","):
            assert f"{float(cell):.17g}" == cell

    def test_cfl_violation_abort_is_recorded(self, tmp_path):
        cfg = small_cfg(tmp_path, dt=1.0 / 16)  # above the 0.70 dy ceiling
        out = cmd_run(cfg)
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["abort"] is not None and "CFL" in meta["abort"]
        assert meta["completed_steps"] == 0
        assert (out / "energy.csv").exists()  # partial outputs retained

    def test_blowup_abort_is_recorded(self, tmp_path):
        cfg = small_cfg(tmp_path, amplitude=1e8, T_final=2.0)
        out = cmd_run(cfg)
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["abort"] is not None
        assert meta["completed_steps"] < meta["planned_steps"]

    def test_hns_run_tracks_divergence(self, tmp_path):
        out = cmd_run(small_cfg(tmp_path, kind="hns", eps=0.3))
        header, data = read_csv(out / "energy.csv")
        div = data[:, header.index("div.rel")]
        assert np.all(div <= 1e-6)
        assert any(h.startswith("E_1.term1") for h in header)

    def test_sweep_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="cmd_run handles"):
            cmd_run(small_cfg(tmp_path, kind="sweep"))


class TestCmdSweep:
    def test_self_test_mode(self, tmp_path):
        cfg = small_cfg(
            tmp_path,
            kind="sweep",
            amplitude=1e-3,
            T_final=0.25,
            eps_list=(0.2, 0.1, 0.05),
            self_test=True,
        )
        res = cmd_sweep(cfg)
        assert res.sup_errors == (0.0, 0.0, 0.0)
        assert res.slope is None
        out = resolve_output_dir(cfg.directory)
        assert (out / "sweep.csv").exists()
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["self_test"] is True
        res.validate()

    def test_mini_sweep_converges(self, tmp_path):
        cfg = small_cfg(
            tmp_path,
            Nx=32,
            kind="sweep",
            amplitude=1e-3,
            eps_list=(0.2, 0.1, 0.05),
        )
        res = cmd_sweep(cfg)
        res.validate()
        sups = np.array(res.sup_errors)
        assert np.all(np.diff(sups) < 0.0)  # strictly decreasing with eps
        assert res.slope >= 0.9
        header, data = read_csv(resolve_output_dir(cfg.directory) / "sweep.csv")
        assert header[0] == "eps"
        assert data.shape == (3, 4)

    def test_wrong_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="cmd_sweep needs"):
            cmd_sweep(small_cfg(tmp_path))

    def test_member_abort_names_member(self, tmp_path, monkeypatch):
        def exploding_step(state, dt, **kw):
            raise SolverAbort("synthetic failure", state)

        monkeypatch.setattr(harness, "hns_step", exploding_step)
        cfg = small_cfg(
            tmp_path, kind="sweep", T_final=0.25, eps_list=(0.2, 0.1, 0.05)
        )
        with pytest.raises(RuntimeError, match="sweep member eps=0.2 aborted"):
            cmd_sweep(cfg)


class TestCmdReport:
    def test_run_report(self, tmp_path):
        out = cmd_run(small_cfg(tmp_path))
        paths = cmd_report(out)
        names = {p.name for p in paths}
        assert "report.txt" in names
        dats = [p for p in paths if p.suffix == ".dat"]
        assert dats, "expected per-term data files"
        cols = np.loadtxt(dats[0])
        header, data = read_csv(out / "energy.csv")
        assert cols.shape == (len(data), 2)
        report_lines = (out / "report.txt").read_text().splitlines()
        assert len(report_lines) == len(data) + 1

    def test_sweep_report(self, tmp_path):
        cfg = small_cfg(
            tmp_path,
            Nx=32,
            kind="sweep",
            amplitude=1e-3,
            T_final=0.25,
            eps_list=(0.2, 0.1, 0.05),
        )
        cmd_sweep(cfg)
        paths = cmd_report(resolve_output_dir(cfg.directory))
        loglog = [p for p in paths if p.name == "loglog.dat"][0]
        rows = [l for l in loglog.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 3
        assert len(rows[0].split()) == 2

    def test_empty_dir_rejected(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nothing to report"):
            cmd_report(tmp_path)


class TestOutputRoot:
    def test_env_override_applies_to_relative_paths(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STRIPFLOW_OUTPUT_ROOT", str(tmp_path / "root"))
        assert resolve_output_dir("runs/a") == tmp_path / "root" / "runs" / "a"
        assert resolve_output_dir(str(tmp_path / "abs")) == tmp_path / "abs"

    def test_no_env_keeps_relative(self, monkeypatch):
        monkeypatch.delenv("STRIPFLOW_OUTPUT_ROOT", raising=False)
        assert str(resolve_output_dir("runs/a")) == "runs/a"

    def test_cmd_run_honors_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STRIPFLOW_OUTPUT_ROOT", str(tmp_path))
        out = cmd_run(small_cfg(tmp_path, directory="rooted/run"))
        assert out == tmp_path / "rooted" / "run"
        assert (out / "energy.csv").exists()


class TestCli:
    def test_config_schema(self, capsys):
        assert cli.main(["config", "--schema"]) == 0
        schema = json.loads(capsys.readouterr().out)
        assert "grid" in schema

    def test_config_defaults(self, capsys):
        assert cli.main(["config"]) == 0
        cfg = json.loads(capsys.readouterr().out)
        assert cfg["grid"]["Nx"] == 64

    def test_verify_exit_codes(self, capsys):
        assert cli.main(["verify", "--nx", "16", "--ny", "9"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert (
            cli.main(["verify", "--nx", "16", "--ny", "9", "--inject-fault", "phi"])
            == 1
        )
        report = json.loads(capsys.readouterr().out)
        assert report["failed"] == ["partition-of-unity"]

    def test_run_and_report(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg = small_cfg(tmp_path)
        cfg_path.write_text(json.dumps(cfg.to_dict()))
        assert cli.main(["run", "--config", str(cfg_path)]) == 0
        out_dir = capsys.readouterr().out.strip()
        assert cli.main(["report", out_dir]) == 0

    def test_sweep_cli(self, tmp_path, capsys):
        cfg = small_cfg(
            tmp_path,
            kind="sweep",
            T_final=0.25,
            eps_list=(0.2, 0.1, 0.05),
            self_test=True,
        )
        cfg_path = tmp_path / "sweep.json"
        cfg_path.write_text(json.dumps(cfg.to_dict()))
        assert cli.main(["sweep", "--config", str(cfg_path)]) == 0
        assert "slope fit skipped" in capsys.readouterr().out
