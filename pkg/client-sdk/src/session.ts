/** Connection settings for one server. Sessions are not shared across
 * threads/workers; create one per context. */

export interface SessionOptions {
  timeoutSecs?: number;
  headers?: Record<string, string>;
}

export class ClientSession {
  readonly serverUrl: string;
  readonly timeoutSecs: number;
  readonly headers: Record<string, string>;

  constructor(serverUrl: string, options: SessionOptions = {}) {
    this.serverUrl = new URL(serverUrl).toString().replace(/\/$/, '');
    this.timeoutSecs = options.timeoutSecs ?? 60;
    if (!(this.timeoutSecs > 0)) throw new Error('timeoutSecs must be positive');
    this.headers = { ...options.headers };
  }

  endpoint(path: string): string {
    return `${this.serverUrl}${path}`;
  }
}
