import json

import numpy as np
import pytest

from lambda_fwm import cli, model
from lambda_fwm.config import ConfigError, RunConfig, config_from_dict
from lambda_fwm.datasets import (
    data_section,
    extract_config,
    read_dataset,
    run,
    thread_count,
    write_dataset,
)
from lambda_fwm.presets import FIG2A

FIG2A_CONFIG = {
    "medium": {
        "omega12_tau": 200,
        "omega13_tau": 100,
        "delta1_tau": 0,
        "delta2_tau": 20,
        "delta3_tau": 20,
        "gamma1_tau": 0.1,
        "gamma2_tau": 0.1,
        "gamma3_tau": 0.1,
        "kappa02_c_tau2": 40,
        "kappa03_c_tau2": 10,
    },
    "z_over_c_tau": "auto",
    "solvers": ["analytic", "spectral"],
}


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _edit(**changes):
    data = json.loads(json.dumps(FIG2A_CONFIG))
    for key, value in changes.items():
        if key in data["medium"]:
            data["medium"][key] = value
        else:
            data[key] = value
    return data


class TestConfig:
    def test_parses_fig2a(self):
        cfg = config_from_dict(FIG2A_CONFIG)
        assert cfg.medium == FIG2A
        assert cfg.resolved_z == pytest.approx(3.927, rel=5e-4)

    def test_empty_solvers_names_field(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict(_edit(solvers=[]))
        assert info.value.path == "solvers"

    def test_negative_gamma_rejected_at_construction(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict(_edit(gamma2_tau=-1.0))
        assert info.value.path == "medium.gamma2_tau"

    def test_missing_field_path(self):
        data = _edit()
        del data["medium"]["kappa03_c_tau2"]
        with pytest.raises(ConfigError) as info:
            config_from_dict(data)
        assert info.value.path == "medium.kappa03_c_tau2"

    def test_unknown_field_path(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict(_edit(zz=1))
        assert info.value.path == "zz"

    def test_auto_needs_nondegenerate_detuning(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict(_edit(delta2_tau=0, delta3_tau=0))
        assert info.value.path == "z_over_c_tau"

    def test_complex_rabi_round_trip(self):
        data = _edit(omega13_tau=[0.0, 100.0])
        cfg = config_from_dict(data)
        assert cfg.medium.omega13 == 100j
        assert config_from_dict(cfg.to_dict()) == cfg

    def test_tabulated_pulse(self):
        t = list(np.linspace(-5, 5, 101))
        data = _edit(pulse={"times_over_tau": t, "samples_tau": [float(np.exp(-x * x)) for x in t]})
        cfg = config_from_dict(data)
        assert not cfg.pulse.is_gaussian
        assert config_from_dict(cfg.to_dict()).pulse.samples.tolist() == cfg.pulse.samples.tolist()

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("LAMBDA_FWM_THREADS", "2")
        assert thread_count(8) == 2 and thread_count(1) == 1
        monkeypatch.setenv("LAMBDA_FWM_THREADS", "zero")
        with pytest.raises(ConfigError):
            thread_count(4)


class TestRun:
    def test_fig2a_columns_agree(self):
        ds = run(config_from_dict(FIG2A_CONFIG))
        assert ds.metadata["z_over_c_tau"] == pytest.approx(3.927, rel=5e-4)
        a, s = ds.columns["analytic_efficiency"], ds.columns["spectral_efficiency"]
        near = np.abs(ds.columns["retarded_t_over_tau"] - ds.metadata["peaks"]["spectral"]["retarded_t_over_tau"]) <= 2
        assert np.max(np.abs(a - s)[near]) < 0.02
        for solver in ("analytic", "spectral"):
            for col in ("re_omega20", "im_omega20", "re_omega30", "im_omega30", "efficiency"):
                assert f"{solver}_{col}" in ds.columns

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_deterministic_and_round_trips(self, tmp_path, fmt):
        cfg = config_from_dict(_edit(time_grid={"min": 0, "max": 8, "n": 201}))
        first = write_dataset(run(cfg), tmp_path / f"a.{fmt}", fmt)
        second = write_dataset(run(cfg, stamp=True), tmp_path / f"b.{fmt}", fmt)
        assert data_section(first) == data_section(second)
        assert "created" in read_dataset(second).metadata
        assert "created" not in read_dataset(first).metadata

        again = extract_config(first)
        assert again == cfg
        third = write_dataset(run(again), tmp_path / f"c.{fmt}", fmt)
        assert first.read_bytes() == third.read_bytes()

    def test_read_back_values(self, tmp_path):
        cfg = config_from_dict(_edit(time_grid={"min": 0, "max": 8, "n": 11}))
        ds = run(cfg)
        path = write_dataset(ds, tmp_path / "r.csv")
        back = read_dataset(path)
        for key, values in ds.columns.items():
            assert np.array_equal(back.columns[key], values)

    def test_oracle_column_interpolated(self):
        p = {
            "omega12_tau": 5, "omega13_tau": 5, "delta1_tau": 0, "delta2_tau": 3, "delta3_tau": 3,
            "gamma1_tau": 0.1, "gamma2_tau": 1, "gamma3_tau": 1, "kappa02_c_tau2": 5, "kappa03_c_tau2": 5,
        }
        cfg = config_from_dict({"medium": p, "z_over_c_tau": 1.0, "solvers": ["spectral", "oracle"]})
        ds = run(cfg)
        diff = ds.columns["oracle_re_omega30"] - ds.columns["spectral_re_omega30"]
        assert np.max(np.abs(diff)) < 1e-4
        assert ds.metadata["solver_diagnostics"]["oracle"]["richardson_error"] < 1e-3


class TestCommandLine:
    def test_run_writes_file(self, tmp_path, capsys):
        code = cli.main(["run", "--config", _write(tmp_path, FIG2A_CONFIG), "--out", str(tmp_path / "o")])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["peaks"]["analytic"]["efficiency"] >= 0.95
        assert (tmp_path / "o" / "run.csv").exists()

    def test_run_json_format_and_solver_override(self, tmp_path):
        code = cli.main(
            ["run", "--config", _write(tmp_path, FIG2A_CONFIG), "--out", str(tmp_path), "--format", "json", "--solvers", "spectral"]
        )
        assert code == 0
        ds = read_dataset(tmp_path / "run.json")
        assert "spectral_efficiency" in ds.columns and "analytic_efficiency" not in ds.columns

    def test_config_error_exit_code(self, tmp_path, capsys):
        assert cli.main(["run", "--config", _write(tmp_path, _edit(solvers=[]))]) == 2
        assert "solvers" in capsys.readouterr().err
        assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2
        assert cli.main(["run", "--config", _write(tmp_path, FIG2A_CONFIG), "--solvers", "magic"]) == 2

    def test_regime_error_exit_code(self, tmp_path, capsys):
        data = _edit(delta3_tau=5, z_over_c_tau=1.0)
        assert cli.main(["run", "--config", _write(tmp_path, data), "--out", str(tmp_path)]) == 3
        assert "RegimeViolation" in capsys.readouterr().err

    def test_optimal_z(self, tmp_path, capsys):
        assert cli.main(["optimal-z", "--figure", "fig2a"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["z_cm"] == pytest.approx(3.93, rel=5e-3)
        data = _edit(c_tau_cm=2.0)
        assert cli.main(["optimal-z", "--config", _write(tmp_path, data)]) == 0
        assert json.loads(capsys.readouterr().out)["z_cm"] == pytest.approx(2 * 3.927, rel=5e-4)

    def test_sweep_writes_points_then_index(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LAMBDA_FWM_THREADS", "2")
        out = tmp_path / "sw"
        code = cli.main(
            ["sweep", "--config", _write(tmp_path, FIG2A_CONFIG), "--parameter", "delta3", "--values", "10,20", "--out", str(out)]
        )
        assert code == 0
        index = read_dataset(out / "index.csv")
        assert index.metadata["files"] == ["point_000.csv", "point_001.csv"]
        assert index.columns["delta3"].tolist() == [10.0, 20.0]
        point = read_dataset(out / "point_001.csv")
        assert point.metadata["peaks"]["spectral"]["efficiency"] == index.columns["spectral_peak_efficiency"][1]
        assert not list(out.glob(".*.tmp"))

    def test_sweep_threads_do_not_change_output(self, tmp_path, monkeypatch):
        cfg = _write(tmp_path, FIG2A_CONFIG)
        for n in ("1", "3"):
            monkeypatch.setenv("LAMBDA_FWM_THREADS", n)
            cli.main(["sweep", "--config", cfg, "--parameter", "delta2", "--values", "10,20,40", "--out", str(tmp_path / n)])
        for name in ("point_000.csv", "point_002.csv", "index.csv"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "3" / name).read_bytes()

    def test_sweep_config_block_and_bad_values(self, tmp_path):
        data = _edit(sweep={"parameter": "rabi_ratio_sq", "values": []})
        assert cli.main(["sweep", "--config", _write(tmp_path, data), "--out", str(tmp_path)]) == 2
        data = _edit(sweep={"parameter": "rabi_ratio_sq", "values": [-1.0]})
        assert cli.main(["sweep", "--config", _write(tmp_path, data), "--out", str(tmp_path)]) == 2

    def test_figure_fig2a(self, tmp_path, capsys):
        assert cli.main(["figure", "fig2a", "--out", str(tmp_path)]) == 0
        ds = read_dataset(tmp_path / "fig2a.csv")
        assert np.max(ds.columns["analytic_efficiency"]) >= 0.95
        assert np.max(ds.columns["spectral_efficiency"]) >= 0.95
        curve = ds.metadata["curves"][0]["config"]
        assert curve["medium"]["omega12_tau"] == 200.0 and curve["z_over_c_tau"] == pytest.approx(3.927, rel=5e-4)

    def test_figure_fig3a_has_both_variants(self, tmp_path):
        assert cli.main(["figure", "fig3a", "--out", str(tmp_path), "--format", "json"]) == 0
        ds = read_dataset(tmp_path / "fig3a.json")
        assert "delta2=60_spectral_efficiency" in ds.columns
        assert "delta2=60_fixedz_spectral_efficiency" in ds.columns
        peaks = read_dataset(tmp_path / "fig3a_peaks.json")
        assert len(peaks.columns["solver"]) == 16

    def test_validate_quick(self, capsys):
        assert cli.main(["validate", "--skip-oracle"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        summary = json.loads(lines[-1])["summary"]
        assert summary["failed"] == []
        names = {json.loads(line)["name"] for line in lines[:-1]}
        assert {"semigroup", "branch_invariance", "parseval", "ratio_lock_spread"} <= names

    def test_validate_catches_flipped_s3(self, monkeypatch, capsys):
        original = model.spectral_response

        def flipped(params, eta):
            resp = original(params, eta)
            s3 = -resp.s3
            lam = np.sqrt(np.asarray(((resp.k2 - resp.k3) / 2) ** 2 + resp.s2 * s3, dtype=complex))
            return type(resp)(resp.eta, resp.d1, resp.d2, resp.d3, resp.delta_det, resp.k2, resp.k3, resp.s2, s3, lam, resp.d_bar)

        import lambda_fwm.spectral as spectral

        monkeypatch.setattr(spectral, "spectral_response", flipped)
        assert cli.main(["validate", "--skip-oracle"]) == 4
        report = {json.loads(line).get("name"): json.loads(line) for line in capsys.readouterr().out.strip().splitlines()}
        assert report["semigroup"]["passed"]
        assert not report["fig2a_peak_spectral"]["passed"]


def test_runconfig_requires_solver():
    with pytest.raises(ConfigError):
        RunConfig(medium=FIG2A, solvers=())
