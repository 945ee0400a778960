import math
import warnings

import numpy as np
import pytest

from beamalign.harness import (
    ALGORITHM_IDS,
    BoundsRow,
    ScenarioConfig,
    SummaryRow,
    TrialRecord,
    build_scenario,
    effective_rate,
    load_scenario_config,
    parse_scenario_config,
    read_summary,
    run_scenario,
    trial_seed_sequence,
    write_reports,
)
from beamalign.channel import Channel, PathSpec, SteeringConfig, write_channel


TOY_CONFIG = """
# small synthetic scenario used by the tests
num_antennas = 8
spacing_ratio = 0.5
codebook_size = 12
paths = 0.30 0 0, 0.62 -3 0
channel_gain_db = -3
snr_db_grid = 22 25
noise_dbm = 0
delta = 0.2
delta_split = 0.1 0.1
trials = 3
seed = 77
algorithms = eba ts hts heba 2pts 2phts
coherence_slots = 14000
"""


def toy_config(**overrides):
    cfg = parse_scenario_config(TOY_CONFIG)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


class TestConfigParsing:
    def test_round_trip_fields(self):
        cfg = parse_scenario_config(TOY_CONFIG)
        assert cfg.steering.num_antennas == 8
        assert cfg.steering.codebook_size == 12
        assert cfg.paths[1].loss_db == -3.0
        assert cfg.snr_db_grid == (22.0, 25.0)
        assert cfg.delta_split == (0.1, 0.1)
        assert cfg.algorithms == ("eba", "ts", "hts", "heba", "2pts", "2phts")

    def test_default_correlation_length_formula(self):
        cfg = parse_scenario_config(TOY_CONFIG)
        assert cfg.correlation_length == 2 * math.ceil(12 / 8) - 1 == 3

    def test_split_must_sum_to_delta(self):
        with pytest.raises(ValueError, match="delta_split"):
            parse_scenario_config(TOY_CONFIG, overrides={"delta_split": "0.1 0.05"})

    def test_overrides_reparse(self):
        cfg = parse_scenario_config(
            TOY_CONFIG, overrides={"trials": "9", "snr_db_grid": "18"}
        )
        assert cfg.trials == 9
        assert cfg.snr_db_grid == (18.0,)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            parse_scenario_config(TOY_CONFIG + "\nbogus = 1\n")

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError, match="unknown algorithms"):
            parse_scenario_config(TOY_CONFIG, overrides={"algorithms": "zigzag"})

    def test_ships_scenario_configs(self):
        cfg1 = load_scenario_config("configs/scenario1.cfg")
        assert cfg1.steering.codebook_size == 120
        assert cfg1.correlation_length == 3
        cfg2 = load_scenario_config("configs/scenario2.cfg")
        assert cfg2.snr_db_grid == (70.0, 74.0, 78.0, 82.0)

    def test_channel_file_scenario(self, tmp_path):
        rng = np.random.default_rng(4)
        chan = Channel(h=rng.normal(size=8) + 1j * rng.normal(size=8))
        path = tmp_path / "chan.csv"
        write_channel(path, chan)
        cfg = parse_scenario_config(
            TOY_CONFIG,
            overrides={"paths": "", "channel_file": str(path)},
        )
        scenario = build_scenario(cfg)
        assert np.allclose(scenario.channel.h, chan.h * 10 ** (-3 / 20))


class TestEffectiveRate:
    def test_zero_overhead(self):
        assert effective_rate(0, 14000, 2.0, 1.0) == pytest.approx(math.log2(3.0))

    def test_half_interval_gives_zero(self):
        assert effective_rate(7000, 14000, 10.0, 1.0) == 0.0
        assert effective_rate(15000, 14000, 10.0, 1.0) == 0.0

    def test_reference_value(self):
        got = effective_rate(48, 14000, 10**7.8, 1.0)
        want = (1 - 48 / 13952) * math.log2(1 + 10**7.8)
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(25.8, abs=0.1)

    def test_rejects_bad_horizon(self):
        with pytest.raises(ValueError):
            effective_rate(1, 0, 1.0, 1.0)


class TestSeedSplit:
    def test_streams_keyed_by_algorithm_identity(self):
        a = trial_seed_sequence(7, 0, "hts", 3).generate_state(4)
        b = trial_seed_sequence(7, 0, "hts", 3).generate_state(4)
        c = trial_seed_sequence(7, 0, "eba", 3).generate_state(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_registry_ids_are_frozen(self):
        # renumbering would silently change every published stream
        assert ALGORITHM_IDS == {
            "eba": 0, "ts": 1, "hts": 2, "heba": 3, "2pts": 4,
            "2phts": 5, "2phts-overlap": 6,
        }


class TestRunScenario:
    @pytest.fixture(scope="class")
    def outcome(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run_scenario(toy_config(), scenario_name="toy")

    def test_row_shape(self, outcome):
        rows, records, bounds = outcome
        assert len(rows) == 6 * 2  # algorithms x snr points
        assert len(records) == 6 * 2 * 3
        assert len(bounds) == 2

    def test_single_trial_has_zero_std(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows, _, _ = run_scenario(
                toy_config(trials=1, algorithms=("2phts",)), compute_bounds=False
            )
        assert all(r.std_tau == 0.0 for r in rows)

    def test_deterministic_replay(self, outcome):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows2, records2, _ = run_scenario(toy_config(), scenario_name="toy")
        assert records2 == outcome[1]
        assert rows2 == outcome[0]

    def test_algorithm_order_does_not_change_records(self, outcome):
        reordered = toy_config(algorithms=("2phts", "hts", "2pts", "heba", "eba", "ts"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, records2, _ = run_scenario(reordered)
        key = lambda r: (r.algorithm, r.snr_db, r.trial)
        assert sorted(records2, key=key) == sorted(outcome[1], key=key)

    def test_jobs_parallel_matches_serial(self, outcome):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, records2, _ = run_scenario(toy_config(), jobs=2, scenario_name="toy")
        assert records2 == outcome[1]

    def test_budget_and_phase_identities(self, outcome):
        _, records, _ = outcome
        for rec in records:
            assert rec.tau == rec.tau_phase1 + rec.tau_phase2
            assert 1 <= rec.chosen_arm <= 12

    def test_warns_when_noise_condition_fails(self):
        cfg = toy_config(trials=1, algorithms=("2phts",))
        with pytest.warns(UserWarning, match="large-noise condition"):
            run_scenario(cfg, compute_bounds=False)

    def test_step_cap_recorded_not_fatal(self):
        cfg = toy_config(trials=2, algorithms=("hts",), snr_db_grid=(10.0,))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, records, _ = run_scenario(cfg, step_cap=5, compute_bounds=False)
        assert all(r.capped for r in records)
        assert all(r.tau == 5 for r in records)

    def test_mean_tau_nonincreasing_in_snr(self):
        # a hotter grid point never costs more pilot slots on average
        cfg = toy_config(trials=8, snr_db_grid=(20.0, 28.0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows, _, _ = run_scenario(cfg, compute_bounds=False)
        for algo in cfg.algorithms:
            cold = next(r.mean_tau for r in rows
                        if r.algorithm == algo and r.snr_db == 20.0)
            hot = next(r.mean_tau for r in rows
                       if r.algorithm == algo and r.snr_db == 28.0)
            assert hot <= cold, (algo, hot, cold)

    def test_bounds_rows_sane(self, outcome):
        _, _, bounds = outcome
        for b in bounds:
            assert b.t_star_u > 0
            assert b.lower_bound == b.lower_bound  # not NaN
            # the closed-form constant dominates the exact one when finite
            if math.isfinite(b.c_star_u_total):
                assert b.c_star_u_total > 0


class TestReports:
    def sample_rows(self):
        rows = [SummaryRow("hts", 70.0, 5, 123.4, 8.1, 0.2, 3.25)]
        records = [
            TrialRecord("hts", 70.0, 0, 42, 120, 120, 0, 18, True, 3.2),
            TrialRecord("hts", 70.0, 1, 43, 127, 127, 0, 17, False, 3.3),
        ]
        bounds = [BoundsRow("toy", 70.0, 16.4, float("inf"), 369.3)]
        return rows, records, bounds

    def test_headers_and_round_trip(self, tmp_path):
        rows, records, bounds = self.sample_rows()
        write_reports(rows, records, tmp_path, bounds=bounds, meta={"k": "v"})
        with open(tmp_path / "summary.csv") as fh:
            header = fh.readline().strip()
        assert header == "algorithm,snr_db,trials,mean_tau,std_tau,error_rate,mean_ear"
        with open(tmp_path / "trials.csv") as fh:
            header = fh.readline().strip()
        assert header == ("algorithm,snr_db,trial,seed,tau,tau_phase1,tau_phase2,"
                          "chosen_arm,correct")
        with open(tmp_path / "bounds.csv") as fh:
            header = fh.readline().strip()
        assert header == "scenario,snr_db,lower_bound,c_star_u_total,t_star_u"
        again = read_summary(tmp_path / "summary.csv")
        assert again[0].mean_tau == pytest.approx(rows[0].mean_tau, abs=1e-9)
        assert again[0].mean_ear == pytest.approx(rows[0].mean_ear, abs=1e-9)

    def test_empty_inputs_write_headers_only(self, tmp_path):
        write_reports([], [], tmp_path)
        for name in ("summary.csv", "trials.csv", "bounds.csv"):
            lines = (tmp_path / name).read_text().strip().splitlines()
            assert len(lines) == 1

    def test_meta_contains_version_and_echo(self, tmp_path):
        rows, records, bounds = self.sample_rows()
        write_reports(rows, records, tmp_path, bounds=bounds,
                      meta={"set:trials": "10"})
        text = (tmp_path / "meta").read_text()
        assert "library_version" in text
        assert "set:trials = 10" in text

    def test_io_error_has_path_context(self, tmp_path):
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        with pytest.raises((OSError, FileExistsError)):
            write_reports(*self.sample_rows()[:2], out_dir=target)
