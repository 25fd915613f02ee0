import json

import pytest

from wdepth import io
from wdepth.cli import main
from wdepth.data import AodKind

GOOD_TRIPLES = "0.369 0.889 0.268 9 9\n"
BAD_TRIPLES = "0, 0, 0, 9, 9\n"

CONFIG = """\
# tiny deterministic campaign
seed = 77
n_modes = 4
lam = 0.05
eta_mean = 0.2
memory_loss = 0.15
trials = 1000000
three_photon_factor = 500
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_validate_witness_pass(tmp_path, capsys):
    path = write(tmp_path, "params.txt", GOOD_TRIPLES)
    assert main(["validate-witness", path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS")
    assert "f_min=" in out


def test_validate_witness_fail_exit_1(tmp_path):
    path = write(tmp_path, "params.txt", GOOD_TRIPLES + BAD_TRIPLES)
    assert main(["validate-witness", path]) == 1


def test_validate_witness_empty_exit_2(tmp_path):
    path = write(tmp_path, "params.txt", "# nothing here\n")
    assert main(["validate-witness", path]) == 2


def test_validate_witness_malformed_exit_2(tmp_path):
    path = write(tmp_path, "params.txt", "0.1 0.2 0.3\n")
    assert main(["validate-witness", path]) == 2


def test_config_parsing_round_trip(tmp_path):
    cfg = io.parse_config(CONFIG)
    assert cfg.seed == 77
    assert cfg.n_modes == 4
    assert cfg.eta == ()
    with pytest.raises(io.ConfigError):
        io.parse_config("n_modes = 4\n")  # missing seed
    with pytest.raises(io.ConfigError):
        io.parse_config("seed = 1\nwhat = 3\n")
    with pytest.raises(io.ConfigError):
        io.parse_config("seed = banana\n")


def test_simulate_writes_dataset_and_sidecar(tmp_path):
    cfg = write(tmp_path, "run.cfg", CONFIG)
    out = str(tmp_path / "ds.jsonl")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    ds = io.read_dataset(out)
    assert ds.n_modes == 4
    assert len(ds.records) == 2 * 4 + 2
    truth = io.read_json(out + ".truth.json")
    gt = truth["ground_truth"]
    # memory loss thins the conditioned Poisson: p2/p1 ~ (lam/2)(1 - m)
    assert gt["p2"] / gt["p1"] == pytest.approx(0.05 / 2 * (1 - 0.15), rel=1e-2)


def test_simulate_bad_config_exit_2(tmp_path):
    cfg = write(tmp_path, "run.cfg", "seed = 1\nlam = 2.0\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_simulate_determinism(tmp_path):
    cfg = write(tmp_path, "run.cfg", CONFIG)
    a, b = str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl")
    assert main(["simulate", "--config", cfg, "--out", a]) == 0
    assert main(["simulate", "--config", cfg, "--out", b]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()


@pytest.fixture()
def dataset_file(tmp_path):
    cfg = write(tmp_path, "run.cfg", CONFIG)
    out = str(tmp_path / "ds.jsonl")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    return out


def test_infer_reports_estimates(dataset_file, tmp_path, capsys):
    report = str(tmp_path / "report.kv")
    assert main(["infer", dataset_file, "--out", report]) == 0
    text = open(report).read()
    assert "p1 = " in text and "eta = " in text and "alpha3 = " in text


def test_infer_incomplete_dataset_exit_1(dataset_file, tmp_path):
    ds = io.read_dataset(dataset_file)
    broken = type(ds)(
        n_modes=ds.n_modes,
        records=[r for r in ds.records if r.config.kind is not AodKind.FIDELITY],
    )
    path = str(tmp_path / "broken.jsonl")
    io.write_dataset(broken, path)
    assert main(["infer", path]) == 1


def test_infer_unreadable_exit_2(tmp_path):
    assert main(["infer", str(tmp_path / "nope.jsonl")]) == 2


def test_certify_and_report_round_trip(dataset_file, tmp_path, capsys):
    cert = str(tmp_path / "cert.json")
    assert main(["certify", dataset_file, "--out", cert, "--seed", "5", "--samples", "150"]) == 0
    record = json.loads(open(cert).read())
    assert record["certified"] in (True, False)
    assert record["n"] == 4
    if record["certified"]:
        assert record["witness_value"] < 0
        assert 0.0 <= record["confidence_negative"] <= 1.0
    # distribution dump exists and has one value per retained sample
    lines = open(cert + ".dist").read().splitlines()
    assert len(lines) == 150 - record["n_failed_resamples"]

    capsys.readouterr()
    table = str(tmp_path / "table.csv")
    assert main(["report", cert, "--out", table, "--dist", cert + ".dist"]) == 0
    text = open(table).read()
    assert text.splitlines()[0].startswith("quantity,")
    hist = open(table + ".hist.csv").read().splitlines()
    assert hist[0] == "bin_left,bin_right,count"
    assert len(hist) == 101  # fixed 100-bin rule


def test_certify_determinism(dataset_file, tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    for out in (a, b):
        assert main(["certify", dataset_file, "--out", out, "--seed", "5", "--samples", "150"]) == 0
    assert open(a, "rb").read() == open(b, "rb").read()
    assert open(a + ".dist", "rb").read() == open(b + ".dist", "rb").read()


def test_report_missing_input_exit_2(tmp_path):
    assert main(["report", str(tmp_path / "missing.json")]) == 2
