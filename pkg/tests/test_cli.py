"""Command-line interface: exit codes, file formats, determinism."""

import json

import numpy as np
import pytest

from adpkit.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def single_state_doc():
    return {"type": "mdp", "states": 1, "actions": 1, "feasible": [[True]],
            "reward": [[1.0]], "beta": 0.5, "P": [[[1.0]]]}


def mkp_doc():
    return {"type": "mkp", "states": 2, "actions": 2, "nu": -1.5, "beta": 0.9,
            "reward": [[1.0, 2.0], [0.5, 1.5]],
            "P": [[[0.7, 0.3], [0.2, 0.8]], [[0.5, 0.5], [0.9, 0.1]]]}


def ez_doc(beta, gamma=1.0):
    return {"type": "epstein_zin", "states": 2, "actions": 1, "alpha": 1.0,
            "gamma": gamma, "beta": beta,
            "reward": [[1.0], [1.0]],
            "P": [[[0.5, 0.5]], [[0.5, 0.5]]],
            "exogenous": {"Q": [[0.5, 0.5], [0.5, 0.5]], "beta_z": [beta, beta]}}


class TestSolve:
    def test_single_state_howard(self, tmp_path, capsys):
        model = write_json(tmp_path / "m.json", single_state_doc())
        out = tmp_path / "result.json"
        code = main(["solve", "--model", model, "--method", "howard",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["value"][0] == pytest.approx(2.0, abs=1e-8)
        assert doc["converged"] is True
        assert doc["method"] == "howard"

    def test_bad_probability_row_exits_2(self, tmp_path):
        doc = single_state_doc()
        doc["P"] = [[[0.9]]]
        model = write_json(tmp_path / "bad.json", doc)
        assert main(["solve", "--model", model]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["solve", "--model", str(tmp_path / "nope.json")]) == 2

    def test_unstable_ez_exits_4(self, tmp_path):
        model = write_json(tmp_path / "ez.json", ez_doc(beta=1.05))
        assert main(["solve", "--model", model]) == 4

    def test_unstable_ez_without_block_diverges_to_4(self, tmp_path):
        doc = ez_doc(beta=1.05)
        del doc["exogenous"]
        model = write_json(tmp_path / "ez.json", doc)
        assert main(["solve", "--model", model]) == 4

    def test_vfi_method_and_min_mode(self, tmp_path):
        doc = {"type": "mdp", "states": 2, "actions": 2,
               "reward": [[1.0, 2.0], [0.5, 1.5]], "beta": 0.9,
               "P": [[[0.7, 0.3], [0.2, 0.8]], [[0.5, 0.5], [0.9, 0.1]]]}
        model = write_json(tmp_path / "m.json", doc)
        out_max = tmp_path / "max.json"
        out_min = tmp_path / "min.json"
        assert main(["solve", "--model", model, "--method", "vfi",
                     "--out", str(out_max)]) == 0
        assert main(["solve", "--model", model, "--method", "vfi", "--mode", "min",
                     "--out", str(out_min)]) == 0
        vmax = json.loads(out_max.read_text())["value"]
        vmin = json.loads(out_min.read_text())["value"]
        assert all(lo <= hi for lo, hi in zip(vmin, vmax))

    def test_byte_identical_reruns(self, tmp_path):
        model = write_json(tmp_path / "m.json", mkp_doc())
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["solve", "--model", model, "--out", str(out1)]) == 0
        assert main(["solve", "--model", model, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestEzStability:
    def test_stable_constant(self, tmp_path):
        model = write_json(tmp_path / "ez.json", ez_doc(beta=0.95))
        out = tmp_path / "diag.json"
        assert main(["ez-stability", "--model", model, "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["root"] == pytest.approx(0.95, rel=1e-10)
        assert doc["verdict"] == "max_stable"

    def test_unstable_constant(self, tmp_path):
        model = write_json(tmp_path / "ez.json", ez_doc(beta=1.05))
        assert main(["ez-stability", "--model", model]) == 4

    def test_two_state_matches_closed_form(self, tmp_path):
        # analytic eigenvalue of diag(beta_z) Q via the quadratic formula
        Q = [[0.8, 0.2], [0.3, 0.7]]
        beta_z = [0.9, 1.1]
        doc = {"type": "epstein_zin", "states": 2, "actions": 1,
               "alpha": 1.0, "gamma": 1.0, "beta": beta_z,
               "reward": [[1.0], [1.0]], "P": [[Q[0]], [Q[1]]],
               "exogenous": {"Q": Q, "beta_z": beta_z}}
        model = write_json(tmp_path / "ez2.json", doc)
        out = tmp_path / "diag.json"
        main(["ez-stability", "--model", model, "--out", str(out)])
        got = json.loads(out.read_text())
        A = np.array(beta_z)[:, None] * np.array(Q)
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        rho = (tr + np.sqrt(tr * tr - 4 * det)) / 2
        assert got["E"] == pytest.approx(rho, abs=1e-10)

    def test_missing_block_exits_2(self, tmp_path):
        doc = ez_doc(beta=0.95)
        del doc["exogenous"]
        model = write_json(tmp_path / "ez.json", doc)
        assert main(["ez-stability", "--model", model]) == 2


class TestVerifyConjugacy:
    def test_mkp_pair_passes(self, tmp_path):
        model = write_json(tmp_path / "mkp.json", mkp_doc())
        out = tmp_path / "report.json"
        code = main(["verify-conjugacy", "--model", model, "--samples", "100",
                     "--seed", "42", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["max_deviation"] <= 1e-9
        assert doc["classification"] == "isomorphic"
        assert doc["transform"] == {"kind": "log"}

    def test_ez_negative_gamma_is_anti_isomorphic(self, tmp_path):
        doc = ez_doc(beta=0.9, gamma=-2.0)
        model = write_json(tmp_path / "ez.json", doc)
        out = tmp_path / "report.json"
        assert main(["verify-conjugacy", "--model", model, "--out", str(out)]) == 0
        assert json.loads(out.read_text())["classification"] == "anti_isomorphic"

    def test_mismatched_transform_fails(self, tmp_path):
        model = write_json(tmp_path / "mkp.json", mkp_doc())
        code = main(["verify-conjugacy", "--model", model, "--transform",
                     '{"kind": "exp_scale", "theta": 1.0}',
                     "--out", str(tmp_path / "r.json")])
        assert code != 0

    def test_unknown_pairing_exits_2(self, tmp_path):
        model = write_json(tmp_path / "m.json", single_state_doc())
        assert main(["verify-conjugacy", "--model", model]) == 2


class TestRbcBench:
    def _config(self):
        return {"n": 1, "A": [[0.3]], "theta": [1.0], "beta": 0.95,
                "grid": {"min": 1e-7, "max": 20.0, "points": 25, "spacing": "log"},
                "iters": 10, "transform": "auto",
                "shocks": {"kind": "deterministic"}}

    def test_writes_csv_schema(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", self._config())
        out = tmp_path / "report.csv"
        assert main(["rbc-bench", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "param_id,e_orig,e_trans,gain,runtime_s,grid_points,iters"
        fields = lines[1].split(",")
        assert fields[0] == "0"
        assert float(fields[3]) > 0
        assert fields[4] == "0"  # runtime suppressed for determinism
        assert fields[5] == "25"
        assert fields[6] == "10"

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", self._config())
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["rbc-bench", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["rbc-bench", "--config", cfg, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_auto_transform_echoed(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "cfg.json", self._config())
        out = tmp_path / "report.csv"
        assert main(["rbc-bench", "--config", cfg, "--out", str(out)]) == 0
        err = capsys.readouterr().err
        gamma1 = 1.0 / (1.0 - 0.95 * 0.3)
        m_echoed = float(err.split("m=")[1].split()[0])
        assert m_echoed == pytest.approx(1.0 / gamma1, rel=1e-12)

    def test_multiple_runs_config(self, tmp_path):
        doc = {"runs": [self._config(), dict(self._config(), iters=5)]}
        cfg = write_json(tmp_path / "cfg.json", doc)
        out = tmp_path / "report.csv"
        assert main(["rbc-bench", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "0"
        assert lines[2].split(",")[0] == "1"

    def test_bad_config_exits_2(self, tmp_path):
        cfg = write_json(tmp_path / "cfg.json", {"n": 1, "theta": [1.0]})
        assert main(["rbc-bench", "--config", cfg]) == 2


class TestFloatFormatting:
    def test_seventeen_digit_roundtrip(self, tmp_path):
        model = write_json(tmp_path / "m.json", mkp_doc())
        out = tmp_path / "r.json"
        main(["solve", "--model", model, "--out", str(out)])
        doc = json.loads(out.read_text())
        # 17 significant digits round-trip float64 exactly
        for x in doc["value"]:
            assert float(format(x, ".17g")) == x
