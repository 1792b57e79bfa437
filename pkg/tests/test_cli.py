import json
import os

import numpy as np

from fracvolt.cli import (CSV_COLUMNS, EXIT_DIVERGENCE, EXIT_INVARIANT,
                          EXIT_OK, ExperimentConfig, default_corpus, main,
                          parse_symbol, run_config)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestSymbols:
    def test_monomial(self):
        f = parse_symbol("mono:3")
        assert f.degree == 3 and f.coeffs[3] == 1.0

    def test_log_branch(self):
        f = parse_symbol("log:8")
        np.testing.assert_allclose(f.coeffs[1:].real,
                                   1.0 / np.arange(1.0, 9.0))

    def test_random_seeded(self):
        a = parse_symbol("random:5:42")
        b = parse_symbol("random:5:42")
        np.testing.assert_array_equal(a.coeffs, b.coeffs)

    def test_json(self):
        f = parse_symbol("json:[[1.0,0.0],[0.0,2.0]]")
        assert f.coeffs[1] == 2j

    def test_corpus_deterministic(self):
        a = default_corpus(10, 3)
        b = default_corpus(10, 3)
        assert [x[0] for x in a] == [x[0] for x in b]
        for (_, fa), (_, fb) in zip(a, b):
            np.testing.assert_array_equal(fa.coeffs, fb.coeffs)


class TestCommands:
    def test_moments_table(self, capsys):
        code, out = run_cli(capsys, "moments", "--weight", "std:1",
                            "--x", "3,201")
        assert code == EXIT_OK
        lines = out.strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        row = lines[1].split(",")
        np.testing.assert_allclose(float(row[4]), 0.25, rtol=1e-12)
        row = lines[2].split(",")
        np.testing.assert_allclose(float(row[4]), 1.0 / 202.0, rtol=1e-12)

    def test_moments_std2(self, capsys):
        code, out = run_cli(capsys, "moments", "--weight", "std:2", "--x", "3")
        np.testing.assert_allclose(float(out.strip().split("\n")[1].split(",")[4]),
                                   1.0 / 6.0, rtol=1e-12)

    def test_classify_json_verdicts(self, capsys):
        code, out = run_cli(capsys, "classify", "--weight", "exp:1:1",
                            "--format", "json")
        assert code == EXIT_OK
        rep = json.loads(out)
        assert rep["verdicts"]["dhat"] == "evidence-against"

    def test_frac_multipliers(self, capsys):
        code, out = run_cli(capsys, "frac", "--weight", "std:1",
                            "--symbol", "mono:2", "--op", "D")
        line = out.strip().split("\n")[-1].split(",")
        np.testing.assert_allclose(float(line[6]), 6.0, rtol=1e-12)

    def test_norm_command(self, capsys):
        code, out = run_cli(capsys, "norm", "--weight", "std:1",
                            "--symbol", "mono:1", "--name", "hardy2-lp")
        val = float(out.strip().split("\n")[1].split(",")[4])
        np.testing.assert_allclose(val, 1.6, rtol=1e-10)

    def test_norm_divergence_exit(self, capsys):
        code, _ = run_cli(capsys, "norm", "--weight", "std:1",
                          "--symbol", "mono:1", "--name", "besov", "--p", "1")
        assert code == EXIT_DIVERGENCE

    def test_volterra_spectrum_and_flag(self, capsys):
        code, out = run_cli(capsys, "volterra", "--weight", "std:1",
                            "--symbol", "mono:1", "--trunc", "128",
                            "--p-list", "1,2", "--spectrum-head", "3")
        assert code == EXIT_DIVERGENCE    # the p = 1 ladder keeps growing
        lines = out.strip().split("\n")
        np.testing.assert_allclose(float(lines[1].split(",")[4]), 1.0,
                                   rtol=1e-12)

    def test_equivalence_h2lp_ratio_column(self, capsys):
        code, out = run_cli(capsys, "equivalence", "--name", "h2-lp",
                            "--weight", "std:1", "--trunc", "8")
        assert code == EXIT_OK
        lines = [l.split(",") for l in out.strip().split("\n")[1:]]
        for row in lines[:-1]:
            n = int(row[3])
            np.testing.assert_allclose(float(row[6]),
                                       (2.0 * n + 2) / (2.0 * n + 3), rtol=1e-9)

    def test_equivalence_exponential_flagged(self, capsys):
        code, out = run_cli(capsys, "equivalence", "--name", "h2-lp",
                            "--weight", "exp:1:1", "--trunc", "64")
        assert code == EXIT_DIVERGENCE
        summary = out.strip().split("\n")[-1].split(",")
        assert float(summary[6]) > 0.0    # positive trend slope

    def test_bad_weight_is_invariant_violation(self, capsys):
        code, _ = run_cli(capsys, "moments", "--weight", "expr:r-1")
        assert code == EXIT_INVARIANT


class TestReproducibility:
    def test_byte_identical_csv(self, tmp_path):
        args = ["equivalence", "--name", "besov", "--weight", "std:1",
                "--corpus", "5", "--seed", "11"]
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        args = ["equivalence", "--name", "besov", "--weight", "std:2",
                "--corpus", "4", "--seed", "2"]
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        main(args + ["--out", str(out1)])
        os.environ["FRACVOLT_THREADS"] = "4"
        try:
            main(args + ["--out", str(out2)])
        finally:
            del os.environ["FRACVOLT_THREADS"]
        assert out1.read_bytes() == out2.read_bytes()

    def test_every_row_has_truncation(self, capsys):
        for argv in (["equivalence", "--name", "besov", "--weight", "std:1",
                      "--corpus", "4"],
                     ["moments", "--weight", "std:2", "--x", "1,3"],
                     ["volterra", "--weight", "std:1", "--symbol", "mono:1",
                      "--trunc", "32", "--p-list", "2"]):
            _, out = run_cli(capsys, *argv)
            for line in out.strip().split("\n")[1:]:
                assert line.split(",")[7] != ""

    def test_json_mirror(self, capsys):
        _, out = run_cli(capsys, "moments", "--weight", "std:1", "--x", "3",
                         "--format", "json")
        rec = json.loads(out)[0]
        assert set(rec.keys()) == set(CSV_COLUMNS)

    def test_config_roundtrip_reproduces(self, tmp_path):
        cfg = ExperimentConfig(command="equivalence", name="besov",
                               weight="std:1", corpus=4, seed=9)
        cfg2 = ExperimentConfig.from_json(cfg.to_json())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_config(cfg, str(a)) == EXIT_OK
        assert run_config(cfg2, str(b)) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
