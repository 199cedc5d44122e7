import { PmctFormatError } from "./errors";

/**
 * One line of the provenance sidecar an augment run writes. Fields are null
 * when the corresponding stage did not run (clean mode, mct without noise).
 */
export interface ProvenanceRecord {
  id: string;
  rir_id: string | null;
  noise_id: string | null;
  snr_db: number | null;
  pi_effective: number | null;
  patch_len: number | null;
  /** Per-patch choice: "C" kept the clean signal, "D" the distorted one. */
  sources: ("C" | "D")[] | null;
}

/** Parse a provenance sidecar (JSON lines, one record per utterance). */
export function parseProvenance(text: string): ProvenanceRecord[] {
  const records: ProvenanceRecord[] = [];
  for (const line of text.split("\n")) {
    if (!line.trim()) {
      continue;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new PmctFormatError(`bad provenance line: ${(err as Error).message}`);
    }
    if (typeof parsed !== "object" || parsed === null || typeof (parsed as { id?: unknown }).id !== "string") {
      throw new PmctFormatError("provenance record is not an object with an id");
    }
    records.push(parsed as ProvenanceRecord);
  }
  return records;
}
