"""End-to-end command tests driving main() on a synthetic corpus."""

import json

import numpy as np
import pytest

from pmct.attention import AttentionTensorSet, write_attention
from pmct.audio_io import load_wav, read_features
from pmct.cli import main

from conftest import build_corpus


def run_cli(*argv):
    return main(list(argv))


def augment_args(corpus, out, **overrides):
    args = {
        "manifest": str(corpus["manifest"]),
        "rir-list": str(corpus["rir_list"]),
        "noise-list": str(corpus["noise_list"]),
        "root": str(corpus["root"]),
        "out": str(out),
        "seed": "7",
    }
    args.update(overrides)
    flat = []
    for key, value in args.items():
        if value is not None:
            flat += [f"--{key}", value]
    return flat


def tree_bytes(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir()) if p.is_file()}


def test_augment_pmct_writes_wavs_and_sidecar(corpus, tmp_path):
    out = tmp_path / "run"
    assert run_cli("augment", *augment_args(corpus, out)) == 0
    for i in range(5):
        assert (out / f"u{i}.wav").is_file()

    records = [json.loads(line) for line in (out / "provenance.jsonl").read_text().splitlines()]
    assert [r["id"] for r in records] == [f"u{i}" for i in range(5)]
    for record in records:
        assert record["rir_id"].startswith("r")
        assert record["noise_id"].startswith("n")
        assert 0.0 <= record["snr_db"] <= 30.0
        assert record["pi_effective"] == 0.5
        assert record["patch_len"] == 16000
        assert set(record["sources"]) <= {"C", "D"}


def test_augment_clean_mode_copies_input(corpus, tmp_path):
    out = tmp_path / "run"
    assert run_cli("augment", *augment_args(corpus, out, mode="clean")) == 0
    original = load_wav(corpus["root"] / "audio" / "u0.wav")
    written = load_wav(out / "u0.wav")
    assert np.array_equal(original.samples, written.samples)
    record = json.loads((out / "provenance.jsonl").read_text().splitlines()[0])
    assert record["rir_id"] is None and record["snr_db"] is None


def test_augment_mct_records_taken_branches(corpus, tmp_path):
    out = tmp_path / "run"
    args = augment_args(corpus, out, mode="mct") + ["--p-reverb", "1.0", "--p-noise", "0.0"]
    assert run_cli("augment", *args) == 0
    for line in (out / "provenance.jsonl").read_text().splitlines():
        record = json.loads(line)
        assert record["rir_id"] is not None
        assert record["noise_id"] is None and record["snr_db"] is None


def test_augment_output_kinds(corpus, tmp_path):
    both = tmp_path / "both"
    assert run_cli("augment", *augment_args(corpus, both, **{"output-kind": "both"})) == 0
    assert (both / "u0.wav").is_file() and (both / "u0.feat").is_file()

    feats_only = tmp_path / "feats"
    assert run_cli("augment", *augment_args(corpus, feats_only,
                                            **{"output-kind": "features"})) == 0
    assert not (feats_only / "u0.wav").exists()
    m = read_features(feats_only / "u0.feat")
    assert m.shape[1] == 80


def test_worker_counts_agree_bytewise(corpus, tmp_path):
    trees = {}
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        args = augment_args(corpus, out, workers=workers, **{"output-kind": "both"})
        assert run_cli("augment", *args, "--specaugment", "mid") == 0
        trees[workers] = tree_bytes(out)
    assert trees["1"] == trees["2"]


def test_same_seed_same_tree_different_seed_differs(corpus, tmp_path):
    first = tmp_path / "a"
    again = tmp_path / "b"
    other = tmp_path / "c"
    assert run_cli("augment", *augment_args(corpus, first)) == 0
    assert run_cli("augment", *augment_args(corpus, again)) == 0
    assert run_cli("augment", *augment_args(corpus, other, seed="8")) == 0
    assert tree_bytes(first) == tree_bytes(again)
    assert tree_bytes(first) != tree_bytes(other)


def test_epoch_changes_draws(corpus, tmp_path):
    e0 = tmp_path / "e0"
    e1 = tmp_path / "e1"
    assert run_cli("augment", *augment_args(corpus, e0, epoch="0")) == 0
    assert run_cli("augment", *augment_args(corpus, e1, epoch="1")) == 0
    assert tree_bytes(e0) != tree_bytes(e1)


def test_env_seed_fallback(corpus, tmp_path, monkeypatch):
    flagged = tmp_path / "flagged"
    via_env = tmp_path / "env"
    assert run_cli("augment", *augment_args(corpus, flagged, seed="31")) == 0
    monkeypatch.setenv("PMCT_SEED", "31")
    assert run_cli("augment", *augment_args(corpus, via_env, seed=None)) == 0
    assert tree_bytes(flagged) == tree_bytes(via_env)


def test_verify_passes_then_catches_tampering(corpus, tmp_path):
    out = tmp_path / "run"
    args = augment_args(corpus, out)
    assert run_cli("augment", *args) == 0
    assert run_cli("verify", *args) == 0

    # flip one payload byte in one output
    target = out / "u2.wav"
    data = bytearray(target.read_bytes())
    data[100] ^= 0xFF
    target.write_bytes(bytes(data))
    assert run_cli("verify", *args) == 1


def test_verify_catches_sidecar_edits(corpus, tmp_path):
    out = tmp_path / "run"
    args = augment_args(corpus, out)
    assert run_cli("augment", *args) == 0
    sidecar = out / "provenance.jsonl"
    records = [json.loads(line) for line in sidecar.read_text().splitlines()]
    records[0]["snr_db"] += 0.5
    sidecar.write_text("".join(json.dumps(r) + "\n" for r in records))
    assert run_cli("verify", *args) == 1


def test_features_subcommand(corpus, tmp_path):
    out = tmp_path / "feat"
    assert run_cli("features", "--manifest", str(corpus["manifest"]),
                   "--root", str(corpus["root"]), "--out", str(out), "--seed", "7") == 0
    m = read_features(out / "u0.feat")
    assert m.shape == (98, 80)
    assert not (out / "provenance.jsonl").exists()


def test_features_with_specaugment_is_deterministic(corpus, tmp_path):
    outs = []
    for name in ("f1", "f2"):
        out = tmp_path / name
        assert run_cli("features", "--manifest", str(corpus["manifest"]),
                       "--root", str(corpus["root"]), "--out", str(out),
                       "--seed", "3", "--specaugment", "high") == 0
        outs.append(tree_bytes(out))
    assert outs[0] == outs[1]


def test_missing_audio_yields_partial_exit(corpus, tmp_path):
    manifest = corpus["root"] / "with_ghost.jsonl"
    lines = corpus["manifest"].read_text().splitlines()
    lines.insert(2, json.dumps({"id": "ghost", "audio_path": "audio/ghost.wav"}))
    manifest.write_text("".join(line + "\n" for line in lines))

    out = tmp_path / "run"
    args = augment_args(corpus, out, manifest=str(manifest))
    assert run_cli("augment", *args) == 1
    # everything else still processed, sidecar omits the failure
    records = [json.loads(line) for line in (out / "provenance.jsonl").read_text().splitlines()]
    assert [r["id"] for r in records] == [f"u{i}" for i in range(5)]


def test_fail_fast_stops_early(corpus, tmp_path):
    manifest = corpus["root"] / "ghost_first.jsonl"
    lines = corpus["manifest"].read_text().splitlines()
    lines.insert(0, json.dumps({"id": "ghost", "audio_path": "audio/ghost.wav"}))
    manifest.write_text("".join(line + "\n" for line in lines))

    out = tmp_path / "run"
    args = augment_args(corpus, out, manifest=str(manifest)) + ["--fail-fast"]
    assert run_cli("augment", *args) == 1
    records = (out / "provenance.jsonl").read_text().splitlines()
    assert records == []


def test_config_errors_exit_2(corpus, tmp_path):
    assert run_cli("augment", "--manifest", "/absent.jsonl",
                   "--out", str(tmp_path / "x")) == 2
    assert run_cli("augment", *augment_args(corpus, tmp_path / "y", mode="pmct",
                                            **{"rir-list": None})) == 2
    assert run_cli("augment", *augment_args(corpus, tmp_path / "z"),
                   "--config", "/absent.cfg") == 2


def test_config_file_driving_a_run(corpus, tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("mode = pmct\npi = 0.5\nencoding = pcm16\nseed = 7\n")
    out = tmp_path / "run"
    assert run_cli("augment", *augment_args(corpus, out, seed=None),
                   "--config", str(cfg_path)) == 0
    # pcm16 wavs have 2-byte samples
    header = (out / "u0.wav").read_bytes()[:44]
    assert header[34:36] == (16).to_bytes(2, "little")


def test_attn_skew_single_and_pair(tmp_path, capsys):
    def write_dir(name, alpha):
        d = tmp_path / name
        d.mkdir()
        rng = np.random.default_rng(0)
        for u in range(3):
            maps = np.empty((2, 2, 10, 10))
            for l in range(2):
                for h in range(2):
                    a = alpha * np.eye(10) + (1 - alpha) / 10 + rng.uniform(0, 0.02, (10, 10))
                    maps[l, h] = a / a.sum(axis=1, keepdims=True)
            write_attention(AttentionTensorSet(f"u{u}", maps), d / f"u{u}.attn")
        return d

    flat_rows = write_dir("baseline", 0.5)   # rank-collapsed: peaked spectrum
    peaked_rows = write_dir("patched", 0.9)  # diverse: flatter spectrum

    assert run_cli("attn-skew", str(flat_rows)) == 0
    single = capsys.readouterr().out
    assert "S = " in single

    report_path = tmp_path / "report.json"
    assert run_cli("attn-skew", str(flat_rows), str(peaked_rows),
                   "--json", str(report_path)) == 0
    paired = capsys.readouterr().out
    assert "relative drop" in paired
    payload = json.loads(report_path.read_text())
    assert payload["relative_drop"] > 0.0
    assert len(payload["models"]) == 2


def test_attn_skew_rejects_three_dirs(tmp_path):
    dirs = []
    for name in ("a", "b", "c"):
        d = tmp_path / name
        d.mkdir()
        maps = 0.5 * np.eye(4) + 0.5 / 4
        write_attention(AttentionTensorSet("u", maps[None, None]), d / "u.attn")
        dirs.append(str(d))
    assert run_cli("attn-skew", *dirs) == 2


def test_attn_skew_empty_dir(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run_cli("attn-skew", str(empty)) == 2


def test_empty_manifest_warns_and_succeeds(tmp_path):
    corpus_dir = tmp_path / "c"
    corpus = build_corpus(corpus_dir, n_utts=1)
    empty = corpus_dir / "none.jsonl"
    empty.write_text("")
    out = tmp_path / "out"
    with pytest.warns(UserWarning, match="empty"):
        code = run_cli("augment", *augment_args(corpus, out, manifest=str(empty)))
    assert code == 0
