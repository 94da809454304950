/** Typed errors mapping the CLI and HTTP failure modes. */

export class MlfixError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** The primary tool rejected the inputs (its exit-2 message is preserved). */
export class IngestError extends MlfixError {
  constructor(
    message: string,
    public readonly exitCode: number,
  ) {
    super(message);
  }
}

/** HTTP 422: the server rejected the bundle, pointing at a field. */
export class ValidationError extends MlfixError {
  constructor(
    message: string,
    public readonly fieldPath: string | null,
  ) {
    super(fieldPath ? `${fieldPath}: ${message}` : message);
  }
}

/** Any other non-200 response. */
export class ServerError extends MlfixError {
  constructor(
    public readonly statusCode: number,
    public readonly body: string,
  ) {
    super(`server returned ${statusCode}: ${body.slice(0, 200)}`);
  }
}

/** The server could not be reached at all. */
export class NetworkError extends MlfixError {}

/** The server did not answer within the session timeout. */
export class TimeoutError extends MlfixError {
  constructor(public readonly timeoutSecs: number) {
    super(`server did not answer within ${timeoutSecs}s`);
  }
}
