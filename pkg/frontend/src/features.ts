import { PmctFormatError } from "./errors";

const FEATURE_MAGIC = "PMCTFEAT";
const FEATURE_VERSION = 1;
const HEADER_BYTES = 28; // 8-byte magic + five u32 fields

export interface FeatureMatrix {
  /** Row-major T x F log-mel values. */
  data: Float32Array;
  frames: number;
  bins: number;
  frameShiftMs: number;
  frameLengthMs: number;
}

/** Decode a feature file: magic, version, T, F, shift/length, then T*F f32. */
export function decodeFeatures(data: Buffer): FeatureMatrix {
  if (data.length < HEADER_BYTES || data.toString("ascii", 0, 8) !== FEATURE_MAGIC) {
    throw new PmctFormatError("bad magic or truncated header");
  }
  const version = data.readUInt32LE(8);
  if (version !== FEATURE_VERSION) {
    throw new PmctFormatError(`unsupported feature file version ${version}`);
  }
  const frames = data.readUInt32LE(12);
  const bins = data.readUInt32LE(16);
  const frameShiftMs = data.readUInt32LE(20);
  const frameLengthMs = data.readUInt32LE(24);
  const expected = HEADER_BYTES + 4 * frames * bins;
  if (data.length !== expected) {
    throw new PmctFormatError(`expected ${expected} bytes, got ${data.length}`);
  }
  const values = new Float32Array(frames * bins);
  for (let i = 0; i < values.length; i++) {
    values[i] = data.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { data: values, frames, bins, frameShiftMs, frameLengthMs };
}
