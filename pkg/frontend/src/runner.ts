import { spawnSync } from "node:child_process";

import { PmctConfigError, PmctDataError, PmctProcessError } from "./errors";

export interface RunResult {
  stdout: string;
  stderr: string;
}

/** Resolve the toolkit executable; $PMCT_BIN overrides the PATH lookup. */
export function pmctBinary(): string {
  return process.env.PMCT_BIN || "pmct";
}

function firstLine(text: string): string {
  const line = text.trim().split("\n").pop();
  return line ? line.trim() : "(no diagnostic output)";
}

/**
 * Run one CLI invocation and map its exit status onto the error taxonomy:
 * 2 is a configuration error, any other nonzero status a data error.
 */
export function runPmct(args: string[]): RunResult {
  const bin = pmctBinary();
  const proc = spawnSync(bin, args, {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw new PmctProcessError(`failed to spawn ${bin}: ${proc.error.message}`);
  }
  const status = proc.status ?? -1;
  if (status === 2) {
    throw new PmctConfigError(firstLine(proc.stderr));
  }
  if (status !== 0) {
    throw new PmctDataError(`exit ${status}: ${firstLine(proc.stderr)}`);
  }
  return { stdout: proc.stdout, stderr: proc.stderr };
}
