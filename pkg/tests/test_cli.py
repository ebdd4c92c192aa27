import json
import os

import numpy as np
import pytest

from ttolab.cli import (
    ConfigError,
    main,
    parse_complex,
    parse_config,
    parse_function,
    parse_symbol,
    parse_zeros,
)

MINIMAL = """
[sequence]
kind = uniform_zero

[symbol]
kind = preset
preset = cos

[function]
kind = preset
preset = square

[sweep]
n_values = 8,16,32,64
"""


@pytest.fixture
def minimal_cfg(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(MINIMAL)
    return str(path)


class TestValueParsers:
    def test_complex_with_i_suffix(self):
        assert parse_complex("0.3i") == 0.3j
        assert parse_complex("1+2i") == 1 + 2j
        assert parse_complex("-0.5") == -0.5

    def test_zeros(self):
        assert parse_zeros("0,0.5,0.3i") == [0, 0.5, 0.3j]
        with pytest.raises(ConfigError):
            parse_zeros("")

    def test_symbol_coeffs(self):
        sym = parse_symbol("c1=1,c-1=1")
        assert sym.coeff_dict == {1: 1, -1: 1}
        assert parse_symbol("cos").coeff_dict == {1: 1.0, -1: 1.0}
        with pytest.raises(ConfigError):
            parse_symbol("q1=1")
        with pytest.raises(ConfigError):
            parse_symbol("unknown_preset")

    def test_function(self):
        f = parse_function("poly:0,-1,0,1")
        assert f.poly_coeffs == (0, -1, 0, 1)
        assert parse_function("square").eval_scalar(3.0) == 9.0
        with pytest.raises(ConfigError):
            parse_function("nope")


class TestParseConfig:
    def test_minimal_roundtrip(self, minimal_cfg, tmp_path):
        parsed = parse_config(minimal_cfg)
        assert parsed.experiment.n_values == (8, 16, 32, 64)
        assert parsed.experiment.symbol.coeff_dict == {1: 1.0, -1: 1.0}
        # canonical form re-parses to the same canonical form
        again = tmp_path / "canon.cfg"
        again.write_text(parsed.canonical)
        assert parse_config(str(again)).canonical == parsed.canonical
        assert parse_config(str(again)).digest == parsed.digest

    def test_modulus_bound_rejected_with_key_path(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[sequence]\nkind = constant_modulus\nr = 1.0\n")
        with pytest.raises(ConfigError, match="sequence.r"):
            parse_config(str(path))

    def test_unknown_generator_lists_tags(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[sequence]\nkind = parabolic\n")
        with pytest.raises(ConfigError, match="uniform_zero"):
            parse_config(str(path))

    def test_unknown_key_has_path(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[sequence]\nkind = uniform_zero\nradius = 2\n")
        with pytest.raises(ConfigError, match="sequence.radius"):
            parse_config(str(path))

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[mystery]\nx = 1\n")
        with pytest.raises(ConfigError, match="mystery"):
            parse_config(str(path))

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            parse_config("/does/not/exist.cfg")


class TestSubcommands:
    def test_szego_minimal(self, minimal_cfg, tmp_path):
        out = tmp_path / "results"
        assert main(["szego", "--config", minimal_cfg, "--out", str(out)]) == 0
        raw = (out / "szego.csv").read_bytes().decode()
        assert "\r\n" in raw  # RFC-4180 line endings
        rows = raw.strip().split("\r\n")
        assert len(rows) == 5  # header + 4 records
        header = rows[0].split(",")
        gap_idx = header.index("gap")
        n_idx = header.index("N")
        for row in rows[1:]:
            cells = row.split(",")
            assert float(cells[gap_idx]) == pytest.approx(2 / int(cells[n_idx]), abs=1e-9)

    def test_clark_subcommand(self, tmp_path, capsys):
        assert main(["clark", "--zeros", "0,0.5", "--alpha-angle", "0"]) == 0
        lines = capsys.readouterr().out.strip().split("\r\n")
        assert lines[0] == "alpha_angle,zeta_angle,weight"
        weights = [float(line.split(",")[2]) for line in lines[1:]]
        assert len(weights) == 2
        assert sum(weights) == pytest.approx(1.0, abs=1e-8)

    def test_operator_subcommand(self, capsys):
        assert main(["operator", "--zeros", "0,0,0", "--symbol", "c1=1,c-1=1"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["dim"] == 3
        entries = np.array(data["entries_row_major"])
        M = entries[..., 0] + 1j * entries[..., 1]
        assert np.allclose(M, np.diag([1, 1], 1) + np.diag([1, 1], -1))

    def test_angular_subcommand(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("""
[sequence]
kind = dense_nonblaschke

[symbol]
kind = preset
preset = cos

[sweep]
n_values = 4,8
alpha_count = 8

[angular]
j_terms = 2000
grid_size = 16
""")
        out = tmp_path / "res"
        assert main(["angular", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "angular_a.csv").exists()
        summary = json.loads((out / "angular_b.json").read_text())
        assert summary["grid_size"] == 16.0

    def test_lemmas_subcommand(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("""
[sequence]
kind = dense_nonblaschke

[symbol]
kind = trig
coeffs = c1=1,c-1=1

[function]
kind = preset
preset = square

[sweep]
n_values = 4,8
alpha_count = 8
""")
        out = tmp_path / "res"
        assert main(["lemmas", "--config", str(path), "--out", str(out)]) == 0
        report = json.loads((out / "fejer.json").read_text())
        assert all(row["contraction_max"] <= 1 + 1e-6 for row in report["per_n"])

    def test_exit_code_on_config_error(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("[sequence]\nkind = constant_modulus\nr = 1.5\n")
        assert main(["szego", "--config", str(path), "--out", str(tmp_path / "x")]) == 2
        assert "sequence.r" in capsys.readouterr().err

    def test_missing_config_flag(self, capsys):
        assert main(["szego"]) == 2


class TestDeterminismAndManifest:
    def test_byte_identical_runs(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("""
[sequence]
kind = constant_modulus
r = 0.5
phase_rule = random
seed = 7

[symbol]
kind = trig
coeffs = c1=1,c-1=1

[function]
kind = preset
preset = square

[sweep]
n_values = 4,8,16
""")
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(["szego", "--config", str(path), "--out", str(out1)]) == 0
        assert main(["szego", "--config", str(path), "--out", str(out2)]) == 0
        for name in ("szego.csv", "szego.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_manifest_covers_outputs(self, minimal_cfg, tmp_path):
        out = tmp_path / "results"
        main(["szego", "--config", minimal_cfg, "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        files = {f for f in os.listdir(out) if f != "manifest.json"}
        assert files == set(manifest["outputs"])
        assert manifest["config_hash"]
        assert manifest["seed"] == 0

    def test_seed_override_changes_hash(self, minimal_cfg):
        a = parse_config(minimal_cfg)
        b = parse_config(minimal_cfg, {"sequence": {"seed": "3"}})
        assert a.digest != b.digest
