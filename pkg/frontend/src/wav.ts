import { PmctFormatError } from "./errors";

const WAVE_FORMAT_PCM = 0x0001;
const WAVE_FORMAT_IEEE_FLOAT = 0x0003;
const WAVE_FORMAT_EXTENSIBLE = 0xfffe;

export interface DecodedWav {
  samples: Float32Array;
  sampleRate: number;
}

/**
 * Encode mono float32 samples as a canonical 44-byte-header RIFF/WAVE file.
 * The payload is the raw little-endian float32 samples, so decoding the
 * result gives back the identical bits.
 */
export function encodeWavFloat32(samples: Float32Array, sampleRate: number): Buffer {
  const payload = Buffer.from(samples.buffer, samples.byteOffset, samples.byteLength);
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + payload.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16); // fmt chunk size
  header.writeUInt16LE(WAVE_FORMAT_IEEE_FLOAT, 20);
  header.writeUInt16LE(1, 22); // channels
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 4, 28); // byte rate
  header.writeUInt16LE(4, 32); // block align
  header.writeUInt16LE(32, 34); // bits per sample
  header.write("data", 36, "ascii");
  header.writeUInt32LE(payload.length, 40);
  return Buffer.concat([header, payload]);
}

interface FmtChunk {
  formatTag: number;
  channels: number;
  sampleRate: number;
  bitsPerSample: number;
}

function readFmtChunk(body: Buffer): FmtChunk {
  if (body.length < 16) {
    throw new PmctFormatError("fmt chunk too short");
  }
  let formatTag = body.readUInt16LE(0);
  if (formatTag === WAVE_FORMAT_EXTENSIBLE) {
    // The sub-format GUID starts with the u16 format code it wraps.
    if (body.length < 26) {
      throw new PmctFormatError("extensible fmt chunk too short");
    }
    formatTag = body.readUInt16LE(24);
  }
  return {
    formatTag,
    channels: body.readUInt16LE(2),
    sampleRate: body.readUInt32LE(4),
    bitsPerSample: body.readUInt16LE(14),
  };
}

/**
 * Decode a PCM16 or IEEE-float32 RIFF/WAVE file to mono float32 samples.
 * PCM16 is scaled by 1/32768; multichannel audio is averaged to mono.
 * Anything else (compressed codecs, other bit depths) is rejected.
 */
export function decodeWav(data: Buffer): DecodedWav {
  if (data.length < 12 || data.toString("ascii", 0, 4) !== "RIFF" ||
      data.toString("ascii", 8, 12) !== "WAVE") {
    throw new PmctFormatError("not a RIFF/WAVE file");
  }

  let fmt: FmtChunk | null = null;
  let payload: Buffer | null = null;
  let pos = 12;
  while (pos + 8 <= data.length) {
    const chunkId = data.toString("ascii", pos, pos + 4);
    const size = data.readUInt32LE(pos + 4);
    const body = data.subarray(pos + 8, pos + 8 + size);
    if (chunkId === "fmt ") {
      fmt = readFmtChunk(body);
    } else if (chunkId === "data") {
      payload = body;
    }
    pos += 8 + size + (size & 1); // chunks are word-aligned
  }

  if (fmt === null || payload === null) {
    throw new PmctFormatError("missing fmt or data chunk");
  }
  if (fmt.channels < 1) {
    throw new PmctFormatError("zero channels");
  }

  let samples: Float32Array;
  if (fmt.formatTag === WAVE_FORMAT_PCM && fmt.bitsPerSample === 16) {
    const count = Math.floor(payload.length / 2);
    samples = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      samples[i] = payload.readInt16LE(2 * i) / 32768;
    }
  } else if (fmt.formatTag === WAVE_FORMAT_IEEE_FLOAT && fmt.bitsPerSample === 32) {
    const count = Math.floor(payload.length / 4);
    samples = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      samples[i] = payload.readFloatLE(4 * i);
    }
    for (let i = 0; i < count; i++) {
      if (!Number.isFinite(samples[i])) {
        throw new PmctFormatError("float payload contains NaN/Inf");
      }
    }
  } else {
    throw new PmctFormatError(
      `format tag ${fmt.formatTag}, ${fmt.bitsPerSample}-bit not supported (PCM16 or float32 only)`,
    );
  }

  if (fmt.channels > 1) {
    const frames = Math.floor(samples.length / fmt.channels);
    const mono = new Float32Array(frames);
    for (let i = 0; i < frames; i++) {
      let acc = 0;
      for (let c = 0; c < fmt.channels; c++) {
        acc += samples[i * fmt.channels + c];
      }
      mono[i] = acc / fmt.channels;
    }
    samples = mono;
  }

  return { samples, sampleRate: fmt.sampleRate };
}
