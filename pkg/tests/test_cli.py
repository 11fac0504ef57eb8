import json
import subprocess
import sys

import pytest

from conftest import synthetic_corpus, synthetic_vocabulary
from ngdkit.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def words_file(tmp_path):
    def write(name, lines):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def independent_snapshot(tmp_path):
    path = tmp_path / "ind.json"
    path.write_text(
        json.dumps(
            {
                "version": 1,
                "provider_id": "fixture",
                "created_at": "2026-01-01T00:00:00+00:00",
                "m": 1_000_000,
                "terms": {"alpha": 1000, "beta": 1000, "gamma": 700, "delta": 5},
                "pairs": {"alpha\tbeta": 1, "alpha\tgamma": 0},
            }
        )
    )
    return path


class TestIndex:
    def test_fixture_corpus(self, capsys, toy_corpus_dir):
        code, out, _ = run(capsys, "index", toy_corpus_dir)
        assert code == 0
        assert "documents: 5" in out
        assert "skipped: 0" in out

    def test_empty_dir(self, capsys, tmp_path):
        code, _, err = run(capsys, "index", tmp_path)
        assert code == 2 and "error" in err

    def test_missing_path(self, capsys, tmp_path):
        code, _, _ = run(capsys, "index", tmp_path / "nope")
        assert code == 2

    def test_generated_corpus(self, capsys, tmp_path):
        docs = synthetic_corpus(200, synthetic_vocabulary(20), seed=9)
        path = tmp_path / "docs.txt"
        path.write_text("\n".join(docs) + "\n", encoding="utf-8")
        code, out, _ = run(capsys, "index", path)
        assert code == 0 and "documents: 200" in out


class TestNgd:
    def test_independent(self, capsys, independent_snapshot):
        code, out, _ = run(capsys, "ngd", "alpha", "beta", "--snapshot", independent_snapshot)
        assert code == 0 and out == "1.000000\n"

    def test_never_co_occur(self, capsys, independent_snapshot):
        code, out, _ = run(capsys, "ngd", "alpha", "gamma", "--snapshot", independent_snapshot)
        assert code == 0 and out == "inf\n"

    def test_calibrate(self, capsys, tmp_path):
        # log ratios 7:10 give a raw distance of exactly 0.7
        fx, m, fxy = 2 ** 10, 2 ** 20, 2 ** 3
        path = tmp_path / "s.json"
        path.write_text(json.dumps({
            "version": 1, "provider_id": "p", "created_at": "2026-01-01T00:00:00+00:00",
            "m": m, "terms": {"x": fx, "y": fx}, "pairs": {"x\ty": fxy},
        }))
        code, out, _ = run(capsys, "ngd", "x", "y", "--snapshot", path, "--calibrate")
        assert code == 0
        assert out.splitlines() == ["0.700000", "calibrated: 1.000000"]
        code, out, _ = run(capsys, "ngd", "x", "y", "--snapshot", path, "--calibrate", "0.35")
        assert out.splitlines()[1] == "calibrated: 2.000000"

    def test_unknown_term(self, capsys, toy_corpus_dir):
        code, out, _ = run(capsys, "ngd", "beatles", "zebra", "--corpus", toy_corpus_dir)
        assert code == 4 and "unknown term" in out

    def test_snapshot_miss(self, capsys, independent_snapshot):
        code, _, err = run(capsys, "ngd", "alpha", "zebra", "--snapshot", independent_snapshot)
        assert code == 5 and "zebra" in err

    def test_provider_error(self, capsys, tmp_path):
        config = tmp_path / "remote.json"
        config.write_text(json.dumps({
            "url_template": "http://127.0.0.1:9/?q={query}",
            "index_size": 10,
            "extract": {"json_pointer": "/n"},
            "max_retries": 0,
            "timeout": 1,
        }))
        code, _, err = run(capsys, "ngd", "a", "b", "--remote-config", config)
        assert code == 3 and "%22a%22" in err

    def test_remote_mock(self, capsys, tmp_path, mock_search):
        mock_search.counts.update({'"alpha"': 1000, '"beta"': 1000, '"alpha" "beta"': 1})
        config = tmp_path / "remote.json"
        config.write_text(json.dumps({
            "url_template": mock_search.url,
            "index_size": 1_000_000,
            "extract": {"json_pointer": "/result/total"},
            "requests_per_second": 100,
            "cache_path": "cache.json",
        }))
        code, out, _ = run(capsys, "ngd", "alpha", "beta", "--source", "remote", "--remote-config", config)
        assert code == 0 and out == "1.000000\n"
        assert (tmp_path / "cache.json").exists()

    def test_structured(self, capsys, independent_snapshot):
        code, out, _ = run(capsys, "ngd", "alpha", "beta", "--snapshot", independent_snapshot,
                           "--format", "structured", "--calibrate")
        doc = json.loads(out)
        assert doc["pairs"][0]["ngd"] == {"kind": "finite", "value": 1.0}
        assert doc["pairs"][0]["calibrated"]["value"] == pytest.approx(1 / 0.7)

    @pytest.mark.parametrize(
        "extra",
        [
            [],
            ["--corpus", "x", "--snapshot", "y"],
            ["--source", "snapshot"],
        ],
    )
    def test_source_selection_errors(self, capsys, extra):
        code, _, _ = run(capsys, "ngd", "a", "b", *extra)
        assert code == 2


class TestMatrix:
    def test_table_rows_and_rounding(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "matrix", fixtures_dir / "band_words.txt",
                           "--snapshot", fixtures_dir / "first_evaluation.json")
        assert code == 0
        rows = out.splitlines()[2:]
        assert len(rows) == 3
        assert [r.split()[-1] for r in rows] == ["0.23", "1.06", "0.81"]
        assert rows[1].startswith("rolling stones, salmonflies")

    def test_matches_per_pair_ngd(self, capsys, fixtures_dir):
        snap = fixtures_dir / "second_evaluation.json"
        code, out, _ = run(capsys, "matrix", fixtures_dir / "band_words.txt",
                           "--snapshot", snap, "--format", "structured")
        pairs = json.loads(out)["pairs"]
        for entry in pairs:
            _, single, _ = run(capsys, "ngd", entry["x"], entry["y"], "--snapshot", snap,
                               "--format", "structured")
            assert json.loads(single)["pairs"][0]["ngd"] == entry["ngd"]

    def test_too_few_words(self, capsys, words_file, fixtures_dir):
        path = words_file("one.txt", ["beatles"])
        code, _, _ = run(capsys, "matrix", path, "--snapshot", fixtures_dir / "first_evaluation.json")
        assert code == 2


class TestScan:
    def test_first_evaluation(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "scan", fixtures_dir / "band_words.txt",
                           "--snapshot", fixtures_dir / "first_evaluation.json")
        assert code == 0
        assert "violations: 1" in out
        row = out.splitlines()[2]
        assert row.split()[-1] == "-0.02"
        assert "beatles" in row

    def test_tolerance(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "scan", fixtures_dir / "band_words.txt",
                           "--snapshot", fixtures_dir / "first_evaluation.json", "--tolerance", "0.05")
        assert "violations: 0" in out


class TestSnapshotCompare:
    def test_capture_then_compare(self, capsys, tmp_path, toy_corpus_dir, words_file, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        pairs = words_file("pairs.txt", ["rolling stones\tbeatles", "beatles\tsalmonflies"])
        out_path = tmp_path / "snap.json"
        code, out, _ = run(capsys, "snapshot", pairs, "--corpus", toy_corpus_dir, "--out", out_path)
        assert code == 0 and "3 terms, 2 pairs" in out
        first = out_path.read_bytes()
        run(capsys, "snapshot", pairs, "--corpus", toy_corpus_dir, "--out", out_path)
        assert out_path.read_bytes() == first
        code, out, _ = run(capsys, "compare", out_path, out_path, pairs)
        assert code == 0 and "max relative change: 0.0%" in out

    def test_two_evaluations(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "compare", fixtures_dir / "first_evaluation.json",
                           fixtures_dir / "second_evaluation.json", fixtures_dir / "band_pairs.txt")
        assert code == 0
        assert "max relative change: 17.4% (rolling stones, beatles)" in out

    def test_coverage_gap(self, capsys, fixtures_dir, independent_snapshot):
        code, _, err = run(capsys, "compare", fixtures_dir / "first_evaluation.json",
                           independent_snapshot, fixtures_dir / "band_pairs.txt")
        assert code == 5 and "snapshot B" in err

    def test_bad_pairs_file(self, capsys, words_file, fixtures_dir):
        pairs = words_file("bad.txt", ["only one term"])
        code, _, _ = run(capsys, "compare", fixtures_dir / "first_evaluation.json",
                         fixtures_dir / "second_evaluation.json", pairs)
        assert code == 2

    def test_snapshot_miss_exit_code(self, capsys, words_file, fixtures_dir):
        pairs = words_file("pairs.txt", ["beatles\tzebra"])
        code, _, err = run(capsys, "snapshot", pairs, "--snapshot", fixtures_dir / "first_evaluation.json")
        assert code == 5 and "beatles, zebra" in err


class TestStats:
    def test_files(self, capsys, words_file, tmp_path):
        docs = synthetic_corpus(200, synthetic_vocabulary(20, seed=3), seed=3)
        corpus = tmp_path / "docs.txt"
        corpus.write_text("\n".join(docs) + "\n")
        vocab = synthetic_vocabulary(20, seed=3)
        a = words_file("first.txt", vocab[:5])
        b = words_file("second.txt", vocab[5:10])
        code, out, _ = run(capsys, "stats", a, b, "--corpus", corpus)
        assert code == 0
        assert out.splitlines()[2].startswith("first")
        assert "calibration constant:" in out
        assert "agree" in out

    def test_sample_is_deterministic(self, capsys, tmp_path):
        docs = synthetic_corpus(300, synthetic_vocabulary(30, seed=5), seed=5)
        corpus = tmp_path / "docs.txt"
        corpus.write_text("\n".join(docs) + "\n")
        args = ["stats", "--corpus", corpus, "--sample", "5,5,10", "--seed", "7", "--format", "structured"]
        code, first, _ = run(capsys, *args)
        _, second, _ = run(capsys, *args)
        assert code == 0 and first == second
        doc = json.loads(first)
        assert [s["n_words"] for s in doc["sets"]] == [5, 5, 10]
        assert doc["consistency"]["agrees"]

    def test_sample_needs_corpus(self, capsys, fixtures_dir):
        code, _, _ = run(capsys, "stats", "--snapshot", fixtures_dir / "first_evaluation.json", "--sample", "3")
        assert code == 2


def test_output_is_byte_identical_across_processes(fixtures_dir):
    cmd = [sys.executable, "-m", "ngdkit", "scan", str(fixtures_dir / "band_words.txt"),
           "--snapshot", str(fixtures_dir / "second_evaluation.json"), "--format", "structured"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["violations"][0]["td"] == pytest.approx(-0.05, abs=5e-4)


def test_help_documents_exit_codes(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    assert "5  coverage gap" in out
