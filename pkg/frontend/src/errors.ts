/** Base class for everything thrown by these bindings. */
export class PmctError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** Invalid or inconsistent run configuration (CLI exit code 2). */
export class PmctConfigError extends PmctError {}

/** Bad input data or a failed utterance (CLI exit code 1). */
export class PmctDataError extends PmctError {}

/** The CLI binary could not be spawned at all. */
export class PmctProcessError extends PmctError {}

/** A file produced or consumed by the toolkit does not parse. */
export class PmctFormatError extends PmctError {}
