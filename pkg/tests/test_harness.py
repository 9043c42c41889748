import json
import math

import pytest

from mcsfa import ConfigError, emit_csv, run_sweep, write_manifest
from mcsfa.harness import CSV_HEADER, ExperimentResult, config_from_dict, load_config
from mcsfa.plots import best_cells, emit_plots


def base_config(**overrides):
    raw = {
        "environment": {"kind": "linear", "n": 40},
        "behavior": "zeta_greedy",
        "directedness_grid": [0.45, 0.5, 0.55],
        "reward_positions": [15],
        "feature_counts": [1, 2, 5],
        "corrections": ["none"],
        "gamma": 0.95,
        "seed": 0,
    }
    raw.update(overrides)
    return raw


class TestConfigValidation:
    def test_valid_config_parses(self):
        cfg = config_from_dict(base_config())
        assert cfg.env_name == "linear-40"
        assert cfg.n_states == 40
        assert cfg.reward_positions == ((15,),)

    def test_defaults_applied(self):
        raw = base_config()
        del raw["directedness_grid"], raw["corrections"], raw["gamma"], raw["seed"]
        cfg = config_from_dict(raw)
        assert len(cfg.directedness_grid) == 11
        assert cfg.corrections == ("none",)
        assert cfg.gamma == 0.95 and cfg.seed == 0

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            config_from_dict(base_config(typo_key=1))

    def test_unknown_environment_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            config_from_dict(base_config(environment={"kind": "linear", "n": 10, "m": 2}))

    @pytest.mark.parametrize(
        "patch",
        [
            {"behavior": "epsilon_greedy"},
            {"directedness_grid": []},
            {"directedness_grid": [0.0, 0.5]},
            {"directedness_grid": [0.5, 1.0]},
            {"reward_positions": []},
            {"reward_positions": [40]},
            {"feature_counts": []},
            {"feature_counts": [0]},
            {"feature_counts": [40]},
            {"corrections": ["none", "magic"]},
            {"gamma": 1.0},
            {"seed": "abc"},
            {"environment": {"kind": "hexagon"}},
            {"environment": {"kind": "lattice", "width": 4, "height": 1}},
        ],
    )
    def test_invalid_values_rejected(self, patch):
        with pytest.raises(ConfigError):
            config_from_dict(base_config(**patch))

    def test_lattice_rewards_are_pairs(self):
        raw = base_config(
            environment={"kind": "lattice", "width": 4, "height": 3},
            reward_positions=[[0, 0], [3, 2]],
            feature_counts=[2],
        )
        cfg = config_from_dict(raw)
        assert cfg.reward_label((3, 2)) == "3x2"
        with pytest.raises(ConfigError):
            config_from_dict(base_config(
                environment={"kind": "lattice", "width": 4, "height": 3},
                reward_positions=[[4, 0]],
                feature_counts=[2],
            ))

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(base_config()))
        assert load_config(path).config_hash() == config_from_dict(base_config()).config_hash()

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(path)


class TestRunSweep:
    def test_grid_cardinality(self):
        cfg = config_from_dict(base_config(feature_counts=list(range(1, 11))))
        rows = run_sweep(cfg)
        assert len(rows) == 3 * 10
        assert all(r.status == "ok" for r in rows)

    def test_uniform_mu_makes_scale_correction_a_no_op(self):
        # zeta = 0.5 induces the uniform chain; the correction collapses to a
        # scalar the regression weights absorb.
        cfg = config_from_dict(base_config(directedness_grid=[0.5], corrections=["none", "scale"]))
        rows = run_sweep(cfg)
        by_corr = {(r.correction, r.e): r for r in rows}
        for e in (1, 2, 5):
            assert by_corr[("none", e)].mse_uniform == pytest.approx(
                by_corr[("scale", e)].mse_uniform, abs=1e-10
            )

    def test_boltzmann_sweep_runs(self):
        cfg = config_from_dict(base_config(behavior="boltzmann", directedness_grid=[0.4, 0.6]))
        rows = run_sweep(cfg)
        assert len(rows) == 6
        assert all(r.status == "ok" for r in rows)

    def test_unstable_cells_are_skipped_not_fatal(self):
        # Strong aversion on a long linear graph starves the goal region
        # below the occupancy guard.
        cfg = config_from_dict({
            "environment": {"kind": "linear", "n": 200},
            "behavior": "zeta_greedy",
            "directedness_grid": [0.5, 0.95],
            "reward_positions": [100],
            "feature_counts": [2],
        })
        rows = run_sweep(cfg)
        status = {r.param: r.status for r in rows}
        assert status[0.5] == "ok"
        assert status[0.95] == "skipped-unstable"
        skipped = [r for r in rows if r.status != "ok"]
        assert all(math.isnan(r.mse_uniform) for r in skipped)

    def test_requested_cells_all_present(self):
        cfg = config_from_dict(base_config(corrections=["none", "scale", "lra"]))
        rows = run_sweep(cfg)
        assert len(rows) == 3 * 3 * 3
        combos = {(r.param, r.e, r.correction) for r in rows}
        assert len(combos) == 27

    def test_parallel_jobs_identical_to_serial(self):
        cfg = config_from_dict(base_config())
        assert run_sweep(cfg, jobs=2) == run_sweep(cfg, jobs=1)

    def test_rows_sorted_lexicographically(self):
        cfg = config_from_dict(base_config(corrections=["none", "scale"]))
        rows = run_sweep(cfg)
        keys = [(r.param, r.reward, r.e, r.correction) for r in rows]
        corr_rank = {"none": 0, "scale": 1}
        expected = sorted(keys, key=lambda k: (k[0], k[1], k[2], corr_rank[k[3]]))
        assert keys == expected


class TestEmitCsv:
    def test_empty_results_error_and_no_file(self, tmp_path):
        target = tmp_path / "results.csv"
        with pytest.raises(ValueError):
            emit_csv([], target)
        assert not target.exists()

    def test_row_count_and_header(self, tmp_path):
        cfg = config_from_dict(base_config(feature_counts=list(range(1, 11))))
        rows = run_sweep(cfg)
        path = emit_csv(rows, tmp_path / "results.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 31
        assert lines[0] == ",".join(CSV_HEADER)

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = config_from_dict(base_config())
        first = emit_csv(run_sweep(cfg), tmp_path / "a.csv").read_bytes()
        second = emit_csv(run_sweep(cfg), tmp_path / "b.csv").read_bytes()
        assert first == second


class TestManifest:
    def test_lists_files_with_digests(self, tmp_path):
        cfg = config_from_dict(base_config())
        csv_path = emit_csv(run_sweep(cfg), tmp_path / "results.csv")
        manifest_path = write_manifest(tmp_path, cfg, [csv_path])
        manifest = json.loads(manifest_path.read_text())
        assert manifest["config_hash"] == cfg.config_hash()
        assert manifest["files"][0]["name"] == "results.csv"
        assert len(manifest["files"][0]["sha256"]) == 64
        assert manifest["version"]


def fake_row(param, e, mse, status="ok", reward="15", correction="none"):
    log = math.log(mse) if status == "ok" else float("nan")
    value = mse if status == "ok" else float("nan")
    return ExperimentResult("linear-40", "zeta_greedy", param, reward, e, correction,
                            value, value, log, status)


class TestBestCells:
    def test_marker_per_feature_count(self):
        rows = [fake_row(z, e, mse)
                for z, e, mse in [(0.4, 1, 3.0), (0.5, 1, 1.0), (0.4, 2, 0.5), (0.5, 2, 2.0)]]
        assert best_cells(rows) == {1: 0.5, 2: 0.4}

    def test_skipped_cells_ignored(self):
        rows = [fake_row(0.4, 1, 5.0), fake_row(0.5, 1, 1.0, status="skipped-unstable")]
        assert best_cells(rows) == {1: 0.4}

    def test_all_skipped_column_absent(self):
        rows = [fake_row(0.4, 1, 1.0, status="skipped-unstable")]
        assert best_cells(rows) == {}


class TestPlots:
    def test_heatmap_written_and_deterministic(self, tmp_path):
        cfg = config_from_dict(base_config(feature_counts=list(range(1, 11))))
        rows = run_sweep(cfg)
        a = emit_plots(rows, "heatmap_logmse", tmp_path / "a.svg").read_bytes()
        b = emit_plots(rows, "heatmap_logmse", tmp_path / "b.svg").read_bytes()
        assert a == b
        assert b"<svg" in a

    def test_diff_map_of_identical_runs_is_neutral(self, tmp_path):
        rows = [fake_row(z, e, 2.0) for z in (0.4, 0.6) for e in (1, 2)]
        path = emit_plots((rows, rows), "heatmap_diff", tmp_path / "d.svg")
        assert path.exists()

    def test_diff_map_requires_aligned_cells(self, tmp_path):
        rows = [fake_row(0.4, 1, 2.0)]
        other = [fake_row(0.5, 1, 2.0)]
        with pytest.raises(ValueError):
            emit_plots((rows, other), "heatmap_diff", tmp_path / "d.svg")

    def test_feature_and_stationary_kinds(self, tmp_path):
        from mcsfa import birth_death_chain, build_quadratic_form, solve_mcsfa, stationary

        P = birth_death_chain(30, 0.48)
        mu = stationary(P)
        basis = solve_mcsfa(build_quadratic_form(P, mu), 8)
        assert emit_plots(basis, "features_1d", tmp_path / "f.svg").exists()
        assert emit_plots(mu, "stationary", tmp_path / "s.svg").exists()

    def test_features_2d_kind(self, tmp_path):
        from mcsfa import (build_quadratic_form, induce_chain, make_lattice, solve_mcsfa,
                           stationary, uniform_policy)

        env = make_lattice(5, 4, (0, 0))
        P = induce_chain(env, uniform_policy(env))
        mu = stationary(P)
        basis = solve_mcsfa(build_quadratic_form(P, mu), 6)
        path = emit_plots(basis, "features_2d", tmp_path / "f2.svg", shape=(5, 4))
        assert path.exists()

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plots(None, "pie_chart", tmp_path / "x.svg")
