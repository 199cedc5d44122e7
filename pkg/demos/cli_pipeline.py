"""Drive the command-line pipeline end to end on a generated mini corpus.

Builds five utterances, three rooms, and four noise clips in a temp
directory, then runs: augment (with provenance), verify (bit-exact replay),
and feature extraction. Everything the CLI needs is plain files, so this is
also the integration surface other languages can target.

Run: python3 demos/cli_pipeline.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from pmct import AudioBuffer, save_wav
from pmct.cli import main

rng = np.random.default_rng(4)

with tempfile.TemporaryDirectory(prefix="pmct-demo-") as tmp:
    root = Path(tmp)
    (root / "audio").mkdir()
    (root / "rirs").mkdir()
    (root / "noises").mkdir()

    with open(root / "manifest.jsonl", "w") as fh:
        for i in range(5):
            length = 16000 + 2000 * i
            tone = 0.2 * np.sin(2 * np.pi * (200 + 60 * i) * np.arange(length) / 16000)
            save_wav(AudioBuffer(tone, 16000, f"u{i}"), root / "audio" / f"u{i}.wav")
            fh.write(json.dumps({"id": f"u{i}", "audio_path": f"audio/u{i}.wav"}) + "\n")

    with open(root / "rirs.tsv", "w") as fh:
        for j in range(3):
            taps = np.zeros(800)
            taps[10 * j] = 1.0
            taps[10 * j + 1:] = 0.2 * rng.normal(size=799 - 10 * j)
            save_wav(AudioBuffer(taps, 16000, f"r{j}"), root / "rirs" / f"r{j}.wav")
            fh.write(f"r{j}\trirs/r{j}.wav\n")

    with open(root / "noises.tsv", "w") as fh:
        for j in range(4):
            clip = 0.05 * rng.normal(size=8000 + 4000 * j)
            save_wav(AudioBuffer(clip, 16000, f"n{j}"), root / "noises" / f"n{j}.wav")
            fh.write(f"n{j}\tnoises/n{j}.wav\n")

    base = ["--manifest", str(root / "manifest.jsonl"),
            "--rir-list", str(root / "rirs.tsv"),
            "--noise-list", str(root / "noises.tsv"),
            "--root", str(root), "--seed", "42"]

    print("== augment ==")
    code = main(["augment", *base, "--out", str(root / "out"), "--mode", "pmct"])
    print(f"exit {code}")

    print("\n== provenance ==")
    for line in (root / "out" / "provenance.jsonl").read_text().splitlines():
        record = json.loads(line)
        print(f"  {record['id']}: rir={record['rir_id']} noise={record['noise_id']} "
              f"snr={record['snr_db']:.2f} dB sources={''.join(record['sources'])}")

    print("\n== verify (recompute and compare bytes) ==")
    code = main(["verify", *base, "--out", str(root / "out"), "--mode", "pmct"])
    print(f"exit {code}")

    print("\n== features ==")
    code = main(["features", "--manifest", str(root / "manifest.jsonl"),
                 "--root", str(root), "--out", str(root / "feat"), "--seed", "42"])
    print(f"exit {code}, wrote {len(list((root / 'feat').glob('*.feat')))} feature files")
