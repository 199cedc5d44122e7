import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { PmctDataError } from "./errors";
import { FeatureMatrix, decodeFeatures } from "./features";
import { ProvenanceRecord, parseProvenance } from "./provenance";
import { runPmct } from "./runner";
import { decodeWav, encodeWavFloat32 } from "./wav";

/** The sample rate the native pipeline operates at. */
export const OPERATING_RATE = 16000;

/** Flag-style overrides layered on top of the config file, as the CLI does. */
export interface AugmenterOptions {
  mode?: "pmct" | "mct" | "clean";
  seed?: number;
  epoch?: number;
  pi?: number | "rand";
  patchLen?: number;
  pReverb?: number;
  pNoise?: number;
  snrLo?: number;
  snrHi?: number;
  specaugment?: "off" | "high" | "mid" | "low";
  /** Rate stamped on utterances sent to the CLI; it rejects mismatches. */
  sampleRate?: number;
}

export interface AugmentResult {
  samples: Float32Array;
  sampleRate: number;
  provenance: ProvenanceRecord;
}

function optionFlags(options: AugmenterOptions): string[] {
  const flags: string[] = [];
  const push = (flag: string, value: number | string | undefined) => {
    if (value !== undefined) {
      flags.push(flag, String(value));
    }
  };
  push("--mode", options.mode);
  push("--seed", options.seed);
  push("--pi", options.pi);
  push("--patch-len", options.patchLen);
  push("--p-reverb", options.pReverb);
  push("--p-noise", options.pNoise);
  push("--snr-lo", options.snrLo);
  push("--snr-hi", options.snrHi);
  push("--specaugment", options.specaugment);
  return flags;
}

function checkSamples(samples: Float32Array): void {
  if (samples.length === 0) {
    throw new PmctDataError("samples must be nonempty");
  }
  for (let i = 0; i < samples.length; i++) {
    if (!Number.isFinite(samples[i])) {
      throw new PmctDataError(`sample ${i} is not finite`);
    }
  }
}

function checkId(id: string): void {
  if (!id || id !== path.basename(id) || id === "." || id === "..") {
    throw new PmctDataError(`utterance id ${JSON.stringify(id)} is not file-name safe`);
  }
}

function withWorkDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "pmct-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

/**
 * A validated, immutable handle over one run configuration. Construction
 * runs the CLI's own config validation; every call afterwards drives one
 * utterance through the same `augment`/`features` code paths the batch
 * tool uses, in an isolated scratch directory, so results are bit-identical
 * to a batch run with the same config, seed, utterance id and epoch.
 *
 * Calls share no mutable state and may be issued from concurrent workers.
 */
export class BoundAugmenter {
  readonly configPath: string;
  private readonly flags: readonly string[];
  private readonly sampleRate: number;
  private readonly epoch: number | undefined;

  constructor(configPath: string, options: AugmenterOptions = {}) {
    this.configPath = configPath;
    this.flags = Object.freeze(["--config", configPath, ...optionFlags(options)]);
    this.sampleRate = options.sampleRate ?? OPERATING_RATE;
    this.epoch = options.epoch;
    this.validate();
    Object.freeze(this);
  }

  /** Run the CLI against an empty manifest, surfacing any config error. */
  private validate(): void {
    withWorkDir((dir) => {
      const manifest = path.join(dir, "manifest.jsonl");
      fs.writeFileSync(manifest, "");
      runPmct([...this.commonArgs(undefined), "--manifest", manifest,
               "--out", path.join(dir, "out")]);
    });
  }

  private commonArgs(epoch: number | undefined): string[] {
    const args = ["augment", ...this.flags, "--workers", "1"];
    const effective = epoch ?? this.epoch;
    if (effective !== undefined) {
      args.push("--epoch", String(effective));
    }
    return args;
  }

  /**
   * Augment one utterance. The draws depend only on (config, seed, id,
   * epoch), so repeated calls return identical bits.
   */
  augmentUtterance(samples: Float32Array, id: string, epoch?: number): AugmentResult {
    checkSamples(samples);
    checkId(id);
    return withWorkDir((dir) => {
      const wavPath = path.join(dir, `${id}.wav`);
      fs.writeFileSync(wavPath, encodeWavFloat32(samples, this.sampleRate));
      const manifest = path.join(dir, "manifest.jsonl");
      fs.writeFileSync(manifest, JSON.stringify({ id, audio_path: wavPath }) + "\n");
      const outDir = path.join(dir, "out");
      runPmct([...this.commonArgs(epoch), "--manifest", manifest,
               "--out", outDir, "--output-kind", "wav", "--fail-fast"]);
      const decoded = decodeWav(fs.readFileSync(path.join(outDir, `${id}.wav`)));
      const records = parseProvenance(
        fs.readFileSync(path.join(outDir, "provenance.jsonl"), "utf8"));
      if (records.length !== 1 || records[0].id !== id) {
        throw new PmctDataError(`provenance sidecar does not match utterance ${id}`);
      }
      return { samples: decoded.samples, sampleRate: decoded.sampleRate,
               provenance: records[0] };
    });
  }

  /** Extract log-mel features for one utterance, without augmentation. */
  extractFeatures(samples: Float32Array, id: string, epoch?: number): FeatureMatrix {
    checkSamples(samples);
    checkId(id);
    return withWorkDir((dir) => {
      const wavPath = path.join(dir, `${id}.wav`);
      fs.writeFileSync(wavPath, encodeWavFloat32(samples, this.sampleRate));
      const manifest = path.join(dir, "manifest.jsonl");
      fs.writeFileSync(manifest, JSON.stringify({ id, audio_path: wavPath }) + "\n");
      const outDir = path.join(dir, "out");
      const args = this.commonArgs(epoch);
      args[0] = "features";
      runPmct([...args, "--manifest", manifest, "--out", outDir, "--fail-fast"]);
      return decodeFeatures(fs.readFileSync(path.join(outDir, `${id}.feat`)));
    });
  }
}

/** Load and validate a flat config file, returning an immutable handle. */
export function loadConfig(configPath: string, options: AugmenterOptions = {}): BoundAugmenter {
  return new BoundAugmenter(configPath, options);
}

/** Version of the native toolkit these bindings are driving. */
export function version(): string {
  const { stdout } = runPmct(["--version"]);
  const parts = stdout.trim().split(/\s+/);
  return parts[parts.length - 1];
}
