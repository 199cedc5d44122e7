import * as fs from "node:fs";
import * as path from "node:path";

import { encodeWavFloat32 } from "../src/wav";

/** Small deterministic PRNG so fixtures are stable across runs. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function makeTone(freqHz: number, length: number, rate = 16000, amp = 0.25): Float32Array {
  const out = new Float32Array(length);
  for (let i = 0; i < length; i++) {
    out[i] = amp * Math.sin((2 * Math.PI * freqHz * i) / rate)
      + 0.3 * amp * Math.sin((2 * Math.PI * 2.7 * freqHz * i) / rate);
  }
  return out;
}

export function makeNoise(length: number, seed: number, amp = 0.05): Float32Array {
  const rand = mulberry32(seed);
  const out = new Float32Array(length);
  for (let i = 0; i < length; i++) {
    out[i] = amp * (2 * rand() - 1);
  }
  return out;
}

function makeRir(delay: number, length: number, seed: number): Float32Array {
  const rand = mulberry32(seed);
  const out = new Float32Array(length);
  out[delay] = 1.0; // direct path dominates every echo
  for (let i = delay + 1; i < length; i++) {
    out[i] = 0.4 * Math.exp(-(i - delay) / 40) * (2 * rand() - 1);
  }
  return out;
}

export interface Corpus {
  dir: string;
  configPath: string;
  manifestPath: string;
  ids: string[];
  /** Clean input samples by utterance id, as written to disk. */
  samples: Map<string, Float32Array>;
}

/**
 * Write a small self-contained corpus: utterance WAVs of varying length,
 * RIRs with different direct-path delays and tap counts (both convolution
 * paths), noises both shorter and longer than the utterances, the manifest
 * and pool lists, and a flat config file all of them hang off.
 */
export function buildCorpus(dir: string, nUtts = 20, rate = 16000): Corpus {
  const audioDir = path.join(dir, "audio");
  const rirDir = path.join(dir, "rirs");
  const noiseDir = path.join(dir, "noises");
  for (const d of [audioDir, rirDir, noiseDir]) {
    fs.mkdirSync(d, { recursive: true });
  }

  const ids: string[] = [];
  const samples = new Map<string, Float32Array>();
  const manifestLines: string[] = [];
  for (let i = 0; i < nUtts; i++) {
    const id = `utt${String(i).padStart(2, "0")}`;
    const wav = makeTone(180 + 37 * i, rate + 797 * i, rate);
    const wavPath = path.join(audioDir, `${id}.wav`);
    fs.writeFileSync(wavPath, encodeWavFloat32(wav, rate));
    ids.push(id);
    samples.set(id, wav);
    manifestLines.push(JSON.stringify({ id, audio_path: wavPath }));
  }
  const manifestPath = path.join(dir, "manifest.jsonl");
  fs.writeFileSync(manifestPath, manifestLines.join("\n") + "\n");

  const rirSpecs: [number, number][] = [[0, 200], [23, 512], [7, 64]];
  const rirLines = rirSpecs.map(([delay, length], j) => {
    const p = path.join(rirDir, `r${j}.wav`);
    fs.writeFileSync(p, encodeWavFloat32(makeRir(delay, length, 100 + j), rate));
    return `r${j}\t${p}`;
  });
  const rirListPath = path.join(dir, "rirs.tsv");
  fs.writeFileSync(rirListPath, rirLines.join("\n") + "\n");

  const noiseLengths = [8000, 20000, 48000, 12000];
  const noiseLines = noiseLengths.map((length, j) => {
    const p = path.join(noiseDir, `n${j}.wav`);
    fs.writeFileSync(p, encodeWavFloat32(makeNoise(length, 200 + j), rate));
    return `n${j}\t${p}`;
  });
  const noiseListPath = path.join(dir, "noises.tsv");
  fs.writeFileSync(noiseListPath, noiseLines.join("\n") + "\n");

  const configPath = path.join(dir, "run.cfg");
  fs.writeFileSync(configPath, [
    "seed = 41",
    `rir_list = ${rirListPath}`,
    `noise_list = ${noiseListPath}`,
    "patch_len = 0.5",
    "",
  ].join("\n"));

  return { dir, configPath, manifestPath, ids, samples };
}

/** Raw little-endian bytes of a float array, for bitwise comparisons. */
export function bytesOf(arr: Float32Array): Buffer {
  return Buffer.from(arr.buffer, arr.byteOffset, arr.byteLength);
}
