import json
import subprocess
import sys

import pytest

from mrleval.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, run
from mrleval.corpus import load_dataset


def _dataset(n_articles=4):
    data = []
    for a in range(n_articles):
        data.append({
            "title": f"article {a}",
            "paragraphs": [{
                "context": "היינו בבית אתמול",
                "qas": [
                    {"id": f"a{a}q1", "question": "איפה היינו?", "is_impossible": False,
                     "answers": [{"text": "בבית", "answer_start": 6}, {"text": "בית", "answer_start": 7}],
                     "quality_label": "good"},
                    {"id": f"a{a}q2", "question": "מתי?", "is_impossible": True, "answers": []},
                ],
            }],
        })
    return {"version": "v2.0", "data": data}


@pytest.fixture
def files(tmp_path):
    d = tmp_path / "d.json"
    d.write_text(json.dumps(_dataset(), ensure_ascii=False), encoding="utf-8")
    p = tmp_path / "p.json"
    preds = {f"a{a}q1": "בית" for a in range(4)} | {f"a{a}q2": "" for a in range(4)}
    preds["a0q1"] = "אתמול"
    p.write_text(json.dumps(preds, ensure_ascii=False), encoding="utf-8")
    return tmp_path, d, p


def test_evaluate(files, capsys):
    tmp, d, p = files
    out = tmp / "r.json"
    assert run(["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(out)]) == EXIT_OK
    body = json.loads(out.read_text(encoding="utf-8"))
    assert body["aggregates"] == {"EM": 87.5, "F1": 87.5, "TLNLS": 87.5}
    assert body["counts"] == {"n_samples": 8, "n_unanswerable": 4}
    assert "EM=87.50" in capsys.readouterr().out


def test_evaluate_is_byte_identical_and_job_independent(files):
    tmp, d, p = files
    a, b = tmp / "a.json", tmp / "b.json"
    run(["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(a)])
    run(["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(b), "--jobs", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_evaluate_modes(files):
    tmp, d, p = files
    out = tmp / "r.json"
    args = ["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(out)]
    assert run(args + ["--f1-mode", "squad-compat", "--norm-profile", "english-squad"]) == EXIT_OK
    assert run(args + ["--norm-profile", "none"]) == EXIT_OK


def test_missing_flag_is_usage_error(files, capsys):
    assert run(["evaluate", "--predictions", str(files[2])]) == EXIT_INVALID
    assert "usage:" in capsys.readouterr().err


def test_unknown_flag_and_command(capsys):
    assert run(["evaluate", "--bogus"]) == EXIT_INVALID
    assert run(["explode"]) == EXIT_INVALID
    assert run([]) == EXIT_INVALID
    assert "usage:" in capsys.readouterr().err


def test_missing_file_is_io_error(tmp_path, files):
    assert run(["evaluate", "--dataset", str(tmp_path / "nope.json"), "--predictions", str(files[2])]) == EXIT_IO


def test_unwritable_output_is_io_error(files):
    tmp, d, p = files
    assert run(["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(tmp / "x" / "r.json")]) == EXIT_IO


def test_coverage_error_is_validation_error(files, capsys):
    tmp, d, p = files
    p.write_text('{"a0q1": "x"}', encoding="utf-8")
    assert run(["evaluate", "--dataset", str(d), "--predictions", str(p)]) == EXIT_INVALID
    assert "missing predictions" in capsys.readouterr().err


def test_bad_prediction_type(files):
    tmp, d, p = files
    p.write_text('{"a0q1": 5}', encoding="utf-8")
    assert run(["evaluate", "--dataset", str(d), "--predictions", str(p)]) == EXIT_INVALID


def test_inputs_are_not_mutated(files):
    tmp, d, p = files
    before = d.read_bytes(), p.read_bytes()
    run(["evaluate", "--dataset", str(d), "--predictions", str(p), "--out", str(tmp / "r.json")])
    run(["split", "--dataset", str(d), "--seed", "3", "--out-prefix", str(tmp / "s")])
    assert (d.read_bytes(), p.read_bytes()) == before


def test_meta_eval_positive(files, capsys):
    tmp, d, _ = files
    out = tmp / "pos.json"
    assert run(["meta-eval", "positive", "--dataset", str(d), "--out", str(out)]) == EXIT_OK
    body = json.loads(out.read_text(encoding="utf-8"))
    assert body["n_samples"] == 4
    assert body["means"] == {"edit": 0.75, "f1": 0.0, "tlnls": 0.75}
    assert "positive tlnls: 0.750" in capsys.readouterr().out


def test_meta_eval_collect_then_negative(files):
    tmp, d, p = files
    neg = tmp / "neg.json"
    assert run(["meta-eval", "collect", "--dataset", str(d), "--predictions", str(p), "--threshold", "0.1", "--out", str(neg)]) == EXIT_OK
    pairs = json.loads(neg.read_text(encoding="utf-8"))
    assert [x["id"] for x in pairs] == ["a0q1"]
    # nothing verified yet
    assert run(["meta-eval", "negative", "--pairs", str(neg)]) == EXIT_INVALID
    pairs[0]["verified"] = True
    neg.write_text(json.dumps(pairs, ensure_ascii=False), encoding="utf-8")
    out = tmp / "negr.json"
    assert run(["meta-eval", "negative", "--pairs", str(neg), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["means"]["f1"] == 0.0


def test_meta_eval_gaps(files, capsys):
    tmp, d, _ = files
    out = tmp / "gaps.json"
    assert run(["meta-eval", "gaps", "--dataset", str(d), "--top", "2", "--out", str(out)]) == EXIT_OK
    body = json.loads(out.read_text(encoding="utf-8"))
    assert len(body["pairs"]) == 2
    assert body["pairs"][0]["gap"] == 0.75


def test_qc_commands(files):
    tmp, d, _ = files
    out, csv_path = tmp / "o.json", tmp / "o.csv"
    assert run(["qc", "overlap", "--dataset", str(d), "--target", "answer", "--out", str(out), "--csv", str(csv_path)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["mean"] == 0.0
    assert csv_path.read_text(encoding="utf-8").startswith("bin_start,bin_end,count,mass")
    assert run(["qc", "overlap", "--dataset", str(d), "--target", "context"]) == EXIT_OK
    assert run(["qc", "positions", "--dataset", str(d), "--bins", "10", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["histogram"]["counts"][4] == 4
    assert run(["qc", "quality", "--dataset", str(d), "--out", str(out)]) == EXIT_OK
    body = json.loads(out.read_text(encoding="utf-8"))
    assert body["counts"]["good"] == 4 and body["unlabeled"] == 4


def test_split_command(files):
    tmp, d, _ = files
    prefix = tmp / "heq"
    assert run(["split", "--dataset", str(d), "--ratios", "0.5,0.25,0.25", "--seed", "17", "--out-prefix", str(prefix)]) == EXIT_OK
    parts = [load_dataset(f"{prefix}-{name}.json") for name in ("train", "dev", "test")]
    assert sorted(i for ds in parts for i in ds.ids) == sorted(load_dataset(d).ids)
    summary = json.loads((tmp / "heq-split.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 17 and summary["ratios"] == {"dev": 0.25, "test": 0.25, "train": 0.5}
    first = (tmp / "heq-split.json").read_bytes()
    run(["split", "--dataset", str(d), "--ratios", "0.5,0.25,0.25", "--seed", "17", "--out-prefix", str(prefix)])
    assert (tmp / "heq-split.json").read_bytes() == first


def test_split_too_few_articles(tmp_path):
    d = tmp_path / "d.json"
    d.write_text(json.dumps(_dataset(2), ensure_ascii=False), encoding="utf-8")
    assert run(["split", "--dataset", str(d), "--out-prefix", str(tmp_path / "s")]) == EXIT_INVALID


def test_split_bad_ratios(files):
    assert run(["split", "--dataset", str(files[1]), "--ratios", "a,b", "--out-prefix", "x"]) == EXIT_INVALID


def test_filter_pool(tmp_path):
    pool = tmp_path / "pool.jsonl"
    rows = [
        {"article_id": "a", "paragraph_id": "0", "text": "א" * 499},
        {"article_id": "a", "paragraph_id": "1", "text": "א" * 500},
    ]
    pool.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    out, rej = tmp_path / "acc.jsonl", tmp_path / "rej.jsonl"
    assert run(["filter-pool", "--source", "wikipedia", "--in", str(pool), "--out", str(out), "--rejected", str(rej)]) == EXIT_OK
    assert [json.loads(line)["paragraph_id"] for line in out.read_text(encoding="utf-8").splitlines()] == ["1"]
    assert len(rej.read_text(encoding="utf-8").splitlines()) == 1
    assert run(["filter-pool", "--source", "geektime", "--in", str(pool), "--out", str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8") == ""


def test_malformed_dataset(tmp_path, files):
    d = tmp_path / "bad.json"
    d.write_text("{", encoding="utf-8")
    assert run(["qc", "quality", "--dataset", str(d)]) == EXIT_INVALID


def test_jobs_env_var(files, monkeypatch):
    tmp, d, p = files
    monkeypatch.setenv("MRC_EVAL_JOBS", "2")
    assert run(["evaluate", "--dataset", str(d), "--predictions", str(p)]) == EXIT_OK


def test_module_entry_point(files):
    tmp, d, p = files
    proc = subprocess.run(
        [sys.executable, "-m", "mrleval", "evaluate", "--dataset", str(d), "--predictions", str(p)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "TLNLS=87.50" in proc.stdout
