import json
import math
import os
import pathlib
import subprocess

import jsonschema
import pytest

import melcond

SCHEMA_DIR = pathlib.Path(os.environ.get("MELCOND_SCHEMA_DIR", pathlib.Path(__file__).parents[2] / "schemas"))

TINY = {
    "name": "py-smoke",
    "seed": 4,
    "plan": {"window_len": 16, "hop": 8, "batch_size": 16, "epochs": 1, "hidden": 8, "augment": False},
    "configs": ["No-Cond", "B"],
    "generation": {"seed_len": 8},
}


def test_version_and_configurations():
    assert melcond.__version__ == "0.1.0"
    names = melcond.valid_configurations()
    assert len(names) == 13
    assert names[0] == "No-Cond" and names[-1] == "CNIB"


def test_token_round_trip():
    for doc in melcond.synthetic_corpus(seed=1, songs=5):
        song = melcond.tokenize_canonical(doc)
        assert len(song) > 0
        again = melcond.tokenize_canonical(melcond.detokenize_canonical(song))
        assert again.pitch == song.pitch
        assert again.duration == song.duration
        assert melcond.parse_tokens(song.to_json()).pitch == song.pitch


def test_metrics():
    assert melcond.kl_divergence([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)
    assert melcond.kl_divergence([1.0, 0.0], [0.5, 0.5]) > 0.6
    seq = [[1, 2, 3, 4, 5, 6]]
    assert melcond.corpus_bleu(seq, seq)["bleu"] == pytest.approx(1.0)
    f = melcond.features(melcond.tokenize_canonical(melcond.synthetic_corpus(2, 1)[0]))
    assert f["NC"] > 0 and math.isfinite(f["PI"])
    with pytest.raises(melcond.MelcondError):
        melcond.kl_divergence([1.0], [0.5, 0.5])


def test_pipeline_report_matches_schema(tmp_path):
    out = str(tmp_path / "exp")
    code, log = melcond.ingest_synthetic(out, seed=9, songs=8)
    assert code == 0, log
    cfg = tmp_path / "tiny.json"
    cfg.write_text(json.dumps(TINY))
    code, log = melcond.train(str(cfg), out)
    assert code == 0, log
    code, log = melcond.generate(out)
    assert code == 0, log
    code, log = melcond.evaluate(out)
    assert code == 1  # 2 of 13 configurations present

    report = json.loads((tmp_path / "exp" / "report" / "report.json").read_text())
    schema = json.loads((SCHEMA_DIR / "report.schema.json").read_text())
    jsonschema.validate(report, schema)
    rows = {r["config"]: r for r in report["divergence"]["rows"]}
    assert rows["B"]["kl"]["PCH"] is not None
    assert rows["CN"]["kl"]["PCH"] is None


@pytest.mark.skipif("MELCOND_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_rejects_unknown_configuration(tmp_path):
    proc = subprocess.run(
        [os.environ["MELCOND_CLI"], "generate", "--out", str(tmp_path), "--subset", "ZZ"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert "CNIB" in proc.stderr
