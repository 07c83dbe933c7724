import pytest

from adl import cli, reports


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return cli.main([*argv, "--out", str(out)]), out


def test_verify_sumset_exhaustive(tmp_path):
    code, out = run(tmp_path, "verify-sumset", "--q", "2,3,5,6,7,10", "--mode", "exhaustive")
    assert code == 0
    doc = reports.read_json(out / "verify_sumset.json")
    assert doc["schema"] == 1
    assert doc["total_counterexamples"] == 0
    assert len(doc["records"]) == 6
    assert all("elapsed_ms" not in r for r in doc["records"])
    assert (out / "verify_sumset.png").exists()


def test_verify_sumset_rejects_non_square_free(tmp_path):
    code, _ = run(tmp_path, "verify-sumset", "--q", "4")
    assert code == 2


def test_verify_sumset_sampled_210(tmp_path):
    code, out = run(tmp_path, "verify-sumset", "--q", "210", "--mode", "sampled",
                    "--count", "10000", "--seed", "7", "--no-figures")
    assert code == 0
    doc = reports.read_json(out / "verify_sumset.json")
    assert doc["records"][0]["sets_tested"] == 10000
    assert doc["records"][0]["counterexample_count"] == 0


def test_verify_sumset_deterministic_and_thread_invariant(tmp_path):
    _, out1 = run(tmp_path / "a", "verify-sumset", "--q", "105", "--mode", "sampled",
                  "--count", "2000", "--seed", "11", "--no-figures")
    _, out2 = run(tmp_path / "b", "verify-sumset", "--q", "105", "--mode", "sampled",
                  "--count", "2000", "--seed", "11", "--threads", "3", "--no-figures")
    assert (out1 / "verify_sumset.json").read_bytes() == (out2 / "verify_sumset.json").read_bytes()


def test_verify_sumset_witness_flag(tmp_path):
    code, out = run(tmp_path, "verify-sumset", "--q", "3", "--witness", "--no-figures")
    assert code == 0
    doc = reports.read_json(out / "verify_sumset.json")
    assert doc["threshold_witnesses"]["3"] == {"members": [1], "missed": [0, 2]}


def test_scan_spectrum_small(tmp_path):
    code, out = run(tmp_path, "scan-spectrum", "--w", "3", "--N", "1024", "--spec", "all")
    assert code == 0
    summary = (out / "spectrum_summary.csv").read_text().strip().splitlines()
    assert len(summary) == 1 + 2  # header plus one row per unit mod 6
    doc = reports.read_json(out / "spectrum_summary.json")
    assert {d["b"] for d in doc["discrepancies"]} == {1, 5}
    assert (out / "arc_errors_b1.csv").exists()
    assert (out / "spectrum_b1.png").exists()
    assert (out / "per_q_b5.png").exists()


def test_scan_spectrum_requires_scale(tmp_path):
    code, _ = run(tmp_path, "scan-spectrum", "--w", "3", "--spec", "all")
    assert code == 2
    code2, _ = run(tmp_path, "scan-spectrum", "--w", "3", "--N", "64", "--n0", "10000")
    assert code2 == 2


def test_scan_spectrum_json_spec(tmp_path):
    code, out = run(tmp_path, "scan-spectrum", "--w", "3", "--N", "512",
                    "--spec", '{"kind":"residue_classes","m":3,"allowed":[1]}',
                    "--no-figures")
    assert code == 0
    doc = reports.read_json(out / "spectrum_summary.json")
    assert doc["config"]["spec"] == {"kind": "residue_classes", "m": 3, "allowed": [1]}


def test_scan_spectrum_deterministic(tmp_path):
    _, out1 = run(tmp_path / "a", "scan-spectrum", "--w", "3", "--N", "512",
                  "--spec", "all", "--no-figures")
    _, out2 = run(tmp_path / "b", "scan-spectrum", "--w", "3", "--N", "512",
                  "--spec", "all", "--no-figures")
    for name in ("spectrum_summary.json", "spectrum_summary.csv", "arc_errors_b1.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_restriction_command(tmp_path):
    code, out = run(tmp_path, "restriction", "--rho", "2,5", "--w", "3", "--N", "1024",
                    "--spec", "all")
    assert code == 0
    lines = (out / "restriction_norms.csv").read_text().strip().splitlines()
    assert lines[0] == "rho,lp_norm,normalized"
    assert len(lines) == 3
    doc = reports.read_json(out / "restriction.json")
    # the rho = 2 row equals the Parseval value of f
    import adl

    table = adl.sieve_primes(6 * 1024 + 6)
    p = adl.WTrickParams.from_length(3, 1024)
    f = adl.build_weight(p, 1, adl.PrimeSubsetSpec.all_primes(), table)
    parseval = float((f.values ** 2).sum())
    rho2 = [r for r in doc["norms"] if r["rho"] == 2][0]
    assert rho2["lp"] == pytest.approx(parseval, rel=1e-9)
    assert 0.75 <= doc["agreement"] <= 1.25
    measures = [r["measure"] for r in doc["levels"]]
    assert measures == sorted(measures)  # deltas descend, so measures ascend
    assert (out / "restriction.png").exists()


def test_restriction_rejects_bad_b(tmp_path):
    code, _ = run(tmp_path, "restriction", "--w", "3", "--N", "256", "--spec", "all",
                  "--b", "2")
    assert code == 2


def test_represent_all(tmp_path):
    code, out = run(tmp_path, "represent", "--spec", "all", "--max", "4000",
                    "--window", "100:4000")
    assert code == 0
    doc = reports.read_json(out / "represent.json")
    assert doc["exception_count"] == 0
    assert (out / "represent_exceptions.csv").read_text().strip().splitlines()[0].startswith("n,")
    assert (out / "represent.png").exists()


def test_represent_mod3_exceptions(tmp_path):
    code, out = run(tmp_path, "represent", "--spec", "mod3-1", "--window", "1000:4000",
                    "--no-figures")
    assert code == 0  # exceptions are findings, not violations
    doc = reports.read_json(out / "represent.json")
    assert doc["exception_count"] > 0
    assert all(e["n"] % 3 != 2 for e in doc["exceptions"])


def test_represent_window_validation(tmp_path):
    code, _ = run(tmp_path, "represent", "--spec", "all", "--max", "100",
                  "--window", "100:4000")
    assert code == 2
    code2, _ = run(tmp_path, "represent", "--spec", "all", "--window", "10:esc")
    assert code2 == 2


def test_demo_transference_cli(tmp_path, capsys):
    code, out = run(tmp_path, "demo-transference", "--n0", "100000", "--w", "3",
                    "--spec", "all", "--epsilon", "0.05", "--no-figures")
    assert code == 0
    printed = capsys.readouterr().out
    assert "witness primes" in printed
    doc = reports.read_json(out / "demo_transference.json")
    assert doc["success"] is True
    assert sum(doc["witness_primes"]) == 100000


def test_demo_transference_failure_exit(tmp_path, capsys):
    code, out = run(tmp_path, "demo-transference", "--n0", "99994", "--w", "3",
                    "--spec", "mod3-1", "--epsilon", "0.01", "--no-figures")
    assert code == 1
    assert "residue_selection" in capsys.readouterr().out
    doc = reports.read_json(out / "demo_transference.json")
    assert doc["failed_stage"] == "residue_selection"


def test_report_merges(tmp_path):
    _, out1 = run(tmp_path / "a", "verify-sumset", "--q", "3,5", "--no-figures")
    _, out2 = run(tmp_path / "b", "scan-spectrum", "--w", "3", "--N", "256",
                  "--spec", "all", "--no-figures")
    code, out = run(tmp_path, "report", "--inputs",
                    str(out1 / "verify_sumset.json"),
                    str(out2 / "spectrum_summary.json"))
    assert code == 0
    merged = reports.read_json(out / "merged.json")
    assert merged["kind"] == "merged"
    assert len(merged["reports"]) == 2
    assert (out / "merged.png").exists()
    assert (out / "discrepancy_trend.png").exists()


def test_experiment_config_roundtrip():
    cfg = cli.ExperimentConfig(
        w=3, N=4096, spec={"kind": "all"}, epsilon=0.05, sigma=2.0,
        sigma0=1.5, grid_factor=16, seed=9, extra={"rho": "5"},
    )
    doc = cfg.to_json()
    back = cli.ExperimentConfig.from_json(doc)
    assert back.to_json() == doc
    assert back.params().W == 6 and back.params().N == 4096
    bad = cli.ExperimentConfig(w=3)
    with pytest.raises(cli.UsageError):
        bad.params()


def test_cache_env_var(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv("ADL_CACHE_DIR", str(cache))
    code, _ = run(tmp_path, "represent", "--spec", "all", "--max", "2000",
                  "--window", "100:2000", "--no-figures")
    assert code == 0
    assert (cache / "primes.bin").exists()
