import json

import numpy as np
import pytest

from isingmarket.cli import main

PRICES = {
    "aaa": [10.0, 10.5, 10.2, 10.8, 11.0, 10.4, 10.9, 11.2, 10.7, 11.5],
    "bbb": [20.0, 19.5, 19.8, 19.2, 19.9, 20.3, 19.7, 20.1, 20.6, 20.2],
    "ccc": [5.0, 5.2, 5.1, 5.4, 5.3, 5.6, 5.2, 5.5, 5.8, 5.4],
}


def write_ohlc(tmp_path):
    paths = []
    for ticker, closes in PRICES.items():
        lines = ["Date,Open,High,Low,Close,Volume"]
        open_price = closes[0]
        for day, close in enumerate(closes, start=1):
            lines.append(f"2021-03-{day:02d},{open_price},{max(open_price, close)},"
                         f"{min(open_price, close)},{close},100")
            open_price = close
        path = tmp_path / f"{ticker}.csv"
        path.write_text("\n".join(lines) + "\n")
        paths.append(str(path))
    return paths


def model_json(tmp_path, n=3, scale=0.5, seed=0, name="model.json"):
    rng = np.random.default_rng(seed)
    coupling = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    coupling[iu] = rng.normal(0.0, scale, len(iu[0]))
    coupling = coupling + coupling.T
    payload = {"N": n, "h": rng.normal(0, 0.2, n).tolist(), "J": coupling.ravel().tolist()}
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_ingest_moments_spectrum_fit_tap_bias(tmp_path):
    files = write_ohlc(tmp_path)
    out = tmp_path / "run"
    assert main(["ingest", *files, "-o", str(out)]) == 0
    spins = out / "spins.csv"
    report = json.loads((out / "ingest.json").read_text())
    assert report["tickers"] == ["aaa", "bbb", "ccc"]
    assert report["rows"] == 10

    assert main(["moments", "--spins", str(spins), "-o", str(out)]) == 0
    moments = json.loads((out / "moments.json").read_text())
    assert moments["N"] == 3 and moments["sample_size"] == 10

    assert main(["spectrum", "--spins", str(spins), "--bins", "10", "-o", str(out)]) == 0
    spectrum = json.loads((out / "spectrum.json").read_text())
    assert len(spectrum["eigenvalues"]) == 3
    assert (out / "spectrum_hist.csv").read_text().startswith("bin_left,bin_right,density")

    assert main(["fit", "--method", "exact", "--moments", str(out / "moments.json"),
                 "-o", str(out)]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["method"] == "exact"
    assert fit["residual"] <= 1e-8
    assert (out / "coupling.csv").exists()

    assert main(["tap", "--model", str(out / "fit.json"), "--spins", str(spins),
                 "-o", str(out)]) == 0
    pairs = (out / "tap_pairs.csv").read_text().splitlines()
    assert pairs[0] == "ticker,empirical_mean,tap_mean"
    assert len(pairs) == 4

    assert main(["bias", "--model", str(out / "fit.json"), "--spins", str(spins),
                 "-o", str(out)]) == 0
    assert (out / "bias.csv").read_text().splitlines()[0] == "ticker,h,h_int_mean,h_int_std"

    manifest = json.loads((out / "fit.manifest.json").read_text())
    assert manifest["command"] == "fit"
    assert "outdir" not in manifest["config"]
    assert str(out / "moments.json") in manifest["inputs"]
    assert all(len(v) == 64 for v in manifest["inputs"].values())


def test_sample_multiinfo_noise(tmp_path):
    model = model_json(tmp_path, n=3, scale=0.5, seed=1)
    out = tmp_path / "run"
    assert main(["sample", "--model", model, "--rows", "3000", "--burn-in", "200",
                 "--seed", "7", "-o", str(out)]) == 0
    spins = out / "spins.csv"

    assert main(["multiinfo", "--spins", str(spins), "-o", str(out)]) == 0
    info = json.loads((out / "multiinfo.json").read_text())
    assert 0.0 <= info["ratio"] <= 1.2
    assert info["units"] == "nats"

    assert main(["fit", "--method", "nmf", "--spins", str(spins), "-o", str(out)]) == 0
    assert main(["noise", "--fit", str(out / "fit.json"), "--t", "500",
                 "--method", "nmf", "--seed", "3", "-o", str(out)]) == 0
    noise = json.loads((out / "noise.json").read_text())
    assert noise["sigma_J"] > 0 and noise["ratio"] > 0


def test_normality_and_scaling_and_demo(tmp_path):
    big = model_json(tmp_path, n=50, scale=0.1, seed=2, name="big.json")
    out = tmp_path / "run"
    assert main(["normality", "--model", big, "--quantiles", "500", "-o", str(out)]) == 0
    report = json.loads((out / "normality.json").read_text())
    assert report["jb_p"] >= 0.0 and report["trimmed"] == 49  # 4% of 1225
    qq = (out / "qq.csv").read_text().splitlines()
    assert qq[0] == "empirical,theoretical" and len(qq) == 500

    points = tmp_path / "points.csv"
    points.write_text("N,mean\n20,0.1\n40,0.05\n80,0.025\n")
    assert main(["scaling", "--points", str(points), "-o", str(out)]) == 0
    scaling = json.loads((out / "scaling.json").read_text())
    assert scaling["alpha_hat"] == pytest.approx(1.0, abs=1e-9)

    models = [model_json(tmp_path, n=n, scale=2.0 / n, seed=3 + n, name=f"m{n}.json")
              for n in (20, 30, 40)]
    code = main(["scaling", "--models", *models, "--use-abs", "-o", str(out)])
    assert code == 0

    assert main(["critical-demo", "--n", "20", "--t", "200", "--coupling", "0.0",
                 "--seed", "1", "--burn-in", "100", "-o", str(out)]) == 0
    demo = json.loads((out / "critical_spectrum.json").read_text())
    assert demo["matrix_kind"] == "covariance"
    assert len(demo["eigenvalues"]) == 20


def test_usage_errors_exit_2_and_write_nothing(tmp_path):
    model = model_json(tmp_path)
    out = tmp_path / "empty"
    # invalid flag value: damping outside (0, 1]
    assert main(["tap", "--model", model, "--damping", "2.0", "-o", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())
    # missing required input
    assert main(["moments", "-o", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_unknown_subcommand_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_unknown_flag_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["moments", "--bogus", "1"])
    assert exc.value.code == 2


def test_domain_error_exit_1(tmp_path):
    spins = tmp_path / "one_row.csv"
    spins.write_text("date,a,b\nd1,1,-1\n")
    assert main(["moments", "--spins", str(spins), "-o", str(tmp_path / "out")]) == 1


def test_config_file_merging(tmp_path):
    model = model_json(tmp_path)
    config = tmp_path / "run.cfg"
    config.write_text("# sampler settings\nrows=100\nburn-in=20\nseed=5\n")
    out = tmp_path / "out"
    assert main(["sample", "--model", model, "--config", str(config),
                 "--seed", "9", "-o", str(out)]) == 0
    manifest = json.loads((out / "sample.manifest.json").read_text())
    assert manifest["config"]["rows"] == 100      # from config file
    assert manifest["config"]["seed"] == 9        # flag overrides config
    assert manifest["seed"] == 9

    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key=1\n")
    assert main(["sample", "--model", model, "--config", str(bad), "-o", str(out)]) == 2


def test_repeat_runs_byte_identical(tmp_path):
    model = model_json(tmp_path, n=4, scale=0.4, seed=6)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["sample", "--model", model, "--rows", "500", "--seed", "11",
                     "-o", str(out)]) == 0
    # identical config + inputs + seed, only the output directory differs
    shared = tmp_path / "spins.csv"
    shared.write_bytes((out_a / "spins.csv").read_bytes())
    for out in (out_a, out_b):
        assert main(["fit", "--method", "tap-inv", "--spins", str(shared),
                     "-o", str(out)]) == 0
    for name in ("spins.csv", "fit.json", "coupling.csv",
                 "sample.manifest.json", "fit.manifest.json"):
        a = (out_a / name).read_bytes()
        b = (out_b / name).read_bytes()
        assert a == b, name
