import json

import pytest

from fuplab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestWords:
    def test_count_json(self, capsys):
        code, out, _ = run(capsys, "words", "count", "--n0", "12", "--alpha", "0.25", "--json")
        assert code == 0
        data = json.loads(out)
        assert data["n_uncontrolled"] == 79 and data["n_X"] == 79**8

    def test_count_csv_verified(self, capsys):
        code, out, _ = run(capsys, "words", "count", "--n0", "12", "--alpha", "0.25", "--verify-exhaustive", "--csv")
        assert code == 0
        assert out.splitlines() == ["N0,alpha,n_uncontrolled,n_X,stirling_bound,exhaustive", "12,0.25,79,1517108809906561,1760,True"]

    def test_derived_params(self, capsys):
        code, out, _ = run(capsys, "words", "count", "--h", "1e-6", "--rho", "0.9", "--beta", "0.1")
        assert code == 0 and json.loads(out)["params"]["N1"] == 4 * json.loads(out)["params"]["N0"]

    def test_classify(self, capsys):
        code, out, _ = run(capsys, "words", "classify", "--word", "2222222222222211", "--alpha", "0.5")
        assert code == 0 and json.loads(out)["block"] == 8

    def test_bad_alpha(self, capsys):
        code, _, err = run(capsys, "words", "count", "--n0", "12", "--alpha", "1.5")
        assert code == 2 and "alpha" in err


class TestConfig:
    def test_malformed(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"params": {"nu": 0.4,\n')
        code, _, err = run(capsys, "porosity", "--cantor", "3", "--config", str(cfg))
        assert code == 2 and "line 2" in err

    def test_unknown_keys(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"params": {"nu": 0.4}, "colour": "red"}))
        assert run(capsys, "porosity", "--cantor", "3", "--config", str(cfg))[0] == 2
        cfg.write_text(json.dumps({"params": {"bogus": 1}}))
        assert run(capsys, "porosity", "--cantor", "3", "--config", str(cfg))[0] == 2

    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"command": "porosity", "params": {"nu": 0.4, "alpha0": 0.05, "cantor": 6}}))
        _, out, _ = run(capsys, "porosity", "--config", str(cfg))
        assert json.loads(out)["report"]["nu_nominal"] == 0.4
        _, out, _ = run(capsys, "porosity", "--config", str(cfg), "--nu", "0.05")
        assert json.loads(out)["report"]["nu_nominal"] == 0.05

    def test_bad_flag(self, capsys):
        assert run(capsys, "porosity", "--no-such-flag")[0] == 2


class TestPorosityEmbed:
    def test_set_file(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(json.dumps({"window": [0, 1], "parts": [[0, 0.1], [0.9, 1]]}))
        code, out, _ = run(capsys, "porosity", "--set", str(f), "--nu", "0.4", "--alpha0", "0.5")
        assert code == 0 and json.loads(out)["report"]["certified"] is True

    def test_non_porous_embed(self, capsys, tmp_path):
        f = tmp_path / "s.json"
        f.write_text(json.dumps({"window": [0, 1], "parts": [[0, 1]]}))
        code, _, err = run(capsys, "embed", "--set", str(f), "--nu", "0.5", "--alpha0", "0.01")
        assert code == 3 and "embed_porous" in err

    def test_random_needs_seed(self, capsys):
        code, _, err = run(capsys, "embed", "--random", "--nu", "0.25", "--alpha0", "0.001")
        assert code == 2 and "--seed" in err

    def test_output_and_manifest(self, capsys, tmp_path):
        out = tmp_path / "tree.csv"
        args = ["embed", "--random", "--nu", "0.25", "--alpha0", "0.000244140625", "--seed", "3", "--regularity", "500", "--csv", "--output", str(out)]
        assert run(capsys, *args)[0] == 0
        first = out.read_bytes()
        manifest = json.loads((tmp_path / "tree.csv.manifest.json").read_text())
        assert manifest["tool_version"] and "wall_time" in manifest and manifest["config_echo"]["seed"] == 3
        assert run(capsys, *args)[0] == 0
        assert out.read_bytes() == first
        assert first.decode().splitlines()[0] == "scale,ratio_upper,ratio_lower"

    def test_json_round_trip(self, capsys):
        from fuplab.interval_sets import IntervalSet
        from fuplab.regular_sets import CantorTree

        code, out, _ = run(capsys, "embed", "--random", "--nu", "0.5", "--alpha0", "0.001", "--seed", "1")
        data = json.loads(out)
        assert code == 0 and data["containment"] is True
        tree = CantorTree.from_json(data["tree"])
        assert tree.to_json() == data["tree"]
        assert IntervalSet.from_json(data["set"]).to_json() == data["set"]


class TestFupFlow:
    def test_fup_csv(self, capsys):
        code, out, _ = run(capsys, "fup", "--h-max-exp", "6", "--h-min-exp", "8", "--csv")
        lines = out.splitlines()
        assert code == 0 and lines[0] == "h,rho,dim,norm_masked,norm_unmasked,oversample" and len(lines) == 4

    def test_fup_invalid_spec(self, capsys):
        code, _, err = run(capsys, "fup", "--kernel", "hyperbolic", "--h-min-exp", "8")
        assert code == 2 and "d_min" in err

    def test_fup_hyperbolic(self, capsys):
        code, out, _ = run(capsys, "fup", "--kernel", "hyperbolic", "--dmin", "0.05", "--h-min-exp", "8")
        assert code == 0 and len(json.loads(out)["rows"]) == 3

    def test_flow_needs_seed(self, capsys):
        assert run(capsys, "flow", "avg", "--T", "5")[0] == 2

    def test_flow_commands(self, capsys):
        code, out, _ = run(capsys, "flow", "avg", "--T", "5", "--n", "2", "--mc-samples", "500", "--seed", "1", "--csv")
        assert code == 0 and out.splitlines()[0] == "point,T,average,abs_error"
        code, out, _ = run(capsys, "flow", "hit", "--n", "3", "--seed", "2")
        assert code == 0 and json.loads(out)["hit"] == 3
        code, out, _ = run(capsys, "flow", "witness", "--n", "2", "--tau-grid", "1", "--seed", "3")
        assert code == 0 and json.loads(out)["cases"] == 2

    def test_group_file(self, capsys, tmp_path):
        g = tmp_path / "g.json"
        g.write_text('{"preset": "bolza"}')
        assert run(capsys, "flow", "hit", "--n", "2", "--seed", "2", "--group", str(g))[0] == 0
        g.write_text('{"preset": "nope"}')
        assert run(capsys, "flow", "hit", "--n", "2", "--seed", "2", "--group", str(g))[0] == 2
