export {
  AugmenterOptions,
  AugmentResult,
  BoundAugmenter,
  OPERATING_RATE,
  loadConfig,
  version,
} from "./augmenter";
export {
  PmctConfigError,
  PmctDataError,
  PmctError,
  PmctFormatError,
  PmctProcessError,
} from "./errors";
export { FeatureMatrix, decodeFeatures } from "./features";
export { ProvenanceRecord, parseProvenance } from "./provenance";
export { RunResult, pmctBinary, runPmct } from "./runner";
export { DecodedWav, decodeWav, encodeWavFloat32 } from "./wav";
