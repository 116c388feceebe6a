from __future__ import annotations

import json

import pytest

from mmdim.cli import main
from mmdim.config import load_config_text, parse_number
from mmdim.errors import ConfigurationError

BASE_CONFIG = """\
[system]
kind = full-shift
alphabet_size = 2
sidedness = one-sided
window = 14

[potential.phi]
kind = constant
value = 0

[potential.psi]
kind = constant
value = 1

[schedules]
eps = 0.6 0.3 0.15
n = 2 3 4
T = 2.5 3.5 4.5

[caps]
enumeration = 2000000
exact_search = 24

[run]
seed = 1234
"""

GRID_CONFIG = """\
[system]
kind = grid-shift
alphabet_size = per-scale
sidedness = one-sided
window = 16

[potential.phi]
kind = constant
value = 0

[schedules]
eps = 2^-3 2^-4 2^-5 2^-6
n = 2 3 4 5

[run]
seed = 77
"""


class TestNumberParsing:
    def test_decimal(self):
        assert parse_number("0.5") == 0.5
        assert parse_number("3") == 3.0

    def test_power_notation(self):
        assert parse_number("2^-5") == 2.0 ** -5
        assert parse_number("2^3") == 8.0

    def test_rejects_garbage(self):
        with pytest.raises(ConfigurationError):
            parse_number("five")


class TestConfig:
    def test_roundtrip(self):
        cfg = load_config_text(BASE_CONFIG)
        assert cfg.seed == 1234
        assert cfg.eps_schedule == (0.6, 0.3, 0.15)
        assert cfg.potential("psi").at(cfg.build_system().point([0])) == 1.0

    def test_missing_seed_names_key(self):
        bad = BASE_CONFIG.replace("[run]\nseed = 1234\n", "")
        with pytest.raises(ConfigurationError, match="seed"):
            load_config_text(bad)

    def test_bad_eps_order(self):
        bad = BASE_CONFIG.replace("eps = 0.6 0.3 0.15", "eps = 0.3 0.6")
        with pytest.raises(ConfigurationError, match="eps"):
            load_config_text(bad)

    def test_unknown_potential_referenced(self):
        cfg = load_config_text(BASE_CONFIG)
        with pytest.raises(ConfigurationError, match="chi"):
            cfg.potential("chi")

    def test_per_scale_alphabet(self):
        cfg = load_config_text(GRID_CONFIG)
        assert cfg.alphabet_for(2.0 ** -5) == 32


class TestCli:
    def _write(self, tmp_path, text, name="exp.cfg"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    def test_missing_seed_exit_1(self, tmp_path, capsys):
        path = self._write(tmp_path, BASE_CONFIG.replace(
            "[run]\nseed = 1234\n", ""))
        code = main(["estimate-mdim", "--config", path])
        captured = capsys.readouterr()
        assert code == 1
        assert "seed" in captured.err

    def test_estimate_mdim_summary(self, tmp_path, capsys):
        path = self._write(tmp_path, GRID_CONFIG)
        out = tmp_path / "records.jsonl"
        code = main(["estimate-mdim", "--config", path, "--out", str(out)])
        captured = capsys.readouterr()
        assert code == 0
        assert "mdim-slope" in captured.out
        lines = out.read_text().splitlines()
        payloads = [json.loads(line) for line in lines]
        slope_rows = [p for p in payloads if p["quantity"] == "mdim-slope"]
        assert len(slope_rows) == 1
        assert abs(slope_rows[0]["value"] - 1.0) < 0.15

    def test_determinism_byte_identical(self, tmp_path):
        path = self._write(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert main(["estimate-mdim", "--config", path, "--out",
                     str(out1)]) == 0
        assert main(["estimate-mdim", "--config", path, "--out",
                     str(out2)]) == 0

        def strip(path):
            rows = []
            for line in path.read_text().splitlines():
                d = json.loads(line)
                d.pop("timestamp", None)
                rows.append(json.dumps(d, sort_keys=True))
            return rows

        assert strip(out1) == strip(out2)

    def test_seed_override_changes_hash(self, tmp_path):
        path = self._write(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["estimate-mdim", "--config", path, "--out", str(out1)])
        main(["estimate-mdim", "--config", path, "--seed", "999", "--out",
              str(out2)])
        h1 = json.loads(out1.read_text().splitlines()[0])["config"]
        h2 = json.loads(out2.read_text().splitlines()[0])["config"]
        assert h1 != h2

    def test_solve_root_command(self, tmp_path, capsys):
        cfg = GRID_CONFIG.replace(
            "[potential.phi]\nkind = constant\nvalue = 0",
            "[potential.phi]\nkind = constant\nvalue = 0.5")
        cfg += "\n[potential.psi]\nkind = constant\nvalue = 1\n"
        path = self._write(tmp_path, cfg)
        out = tmp_path / "root.jsonl"
        code = main(["solve-root", "--config", path, "--phi", "phi",
                     "--psi", "psi", "--tol", "1e-3", "--out", str(out)])
        assert code == 0
        payloads = [json.loads(l) for l in out.read_text().splitlines()]
        root = [p for p in payloads if p["quantity"] == "root"][0]
        assert abs(root["value"] - 1.5) < 0.1

    def test_induced_mdim_command(self, tmp_path, capsys):
        path = self._write(tmp_path, BASE_CONFIG)
        code = main(["induced-mdim", "--config", path])
        captured = capsys.readouterr()
        assert code == 0
        # records stream on stdout, summary on stderr
        assert "induced-mdim-slope" in captured.err
        assert '"quantity": "induced-log-sum"' in captured.out

    def test_subset_dim_command(self, tmp_path, capsys):
        cfg = BASE_CONFIG + "\n[subset-dim]\ndepth = 2\nn_max = 3\n"
        path = self._write(tmp_path, cfg)
        for structure in ("bowen", "packing"):
            code = main(["subset-dim", "--config", path, "--structure",
                         structure])
            assert code == 0

    def test_subset_dim_bs_needs_positive_phi(self, tmp_path):
        cfg = BASE_CONFIG.replace("value = 0\n", "value = 1\n", 1)
        cfg += "\n[subset-dim]\ndepth = 2\nn_max = 3\n"
        path = self._write(tmp_path, cfg)
        assert main(["subset-dim", "--config", path, "--structure",
                     "bs"]) == 0

    def test_entropy_command(self, tmp_path, capsys):
        cfg = BASE_CONFIG + "\n[measure]\nkind = bernoulli\np = 0.5 0.5\n"
        path = self._write(tmp_path, cfg)
        code = main(["entropy", "--config", path, "--quantity", "bk"])
        captured = capsys.readouterr()
        assert code == 0
        assert "bk-lower" in captured.err
        assert '"quantity": "bk-lower"' in captured.out

    def test_entropy_determinism_and_ci(self, tmp_path):
        # a stochastic command must rerun byte-identically (same seed) and
        # every stochastic record must carry a confidence interval
        cfg = BASE_CONFIG + "\n[measure]\nkind = bernoulli\np = 0.5 0.5\n"
        path = self._write(tmp_path, cfg)
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            assert main(["entropy", "--config", path, "--quantity", "katok",
                         "--out", str(out)]) == 0
            rows = []
            for line in out.read_text().splitlines():
                d = json.loads(line)
                d.pop("timestamp", None)
                rows.append(d)
            outs.append(rows)
        assert outs[0] == outs[1]
        for row in outs[0]:
            assert "ci_lo" in row and "ci_hi" in row

    def test_verify_counting_suite_exit_0(self, capsys):
        code = main(["verify", "--suite", "counting"])
        captured = capsys.readouterr()
        assert code == 0
        assert "pass" in captured.out
        assert "FAIL" not in captured.out

    def test_verify_failure_exits_2(self, monkeypatch, capsys):
        from mmdim import cli
        from mmdim.verify import AssertionResult

        def failing_suite(name):
            return [AssertionResult("demo", "forced failure", False, -1.0)]

        monkeypatch.setattr(cli, "run_suite", failing_suite)
        code = main(["verify", "--suite", "counting"])
        captured = capsys.readouterr()
        assert code == 2
        assert "FAIL" in captured.out

    def test_worker_count_does_not_change_records(self, tmp_path,
                                                  monkeypatch):
        path = self._write(tmp_path, GRID_CONFIG)
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        main(["estimate-mdim", "--config", path, "--out", str(out1)])
        monkeypatch.setenv("MMDIM_WORKERS", "4")
        main(["estimate-mdim", "--config", path, "--out", str(out2)])

        def strip(p):
            rows = []
            for line in p.read_text().splitlines():
                d = json.loads(line)
                d.pop("timestamp", None)
                rows.append(json.dumps(d, sort_keys=True))
            return rows

        assert strip(out1) == strip(out2)
