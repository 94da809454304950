/** POST a bundle to the analysis server and return the validated diagnosis. */

import { NetworkError, ServerError, TimeoutError, ValidationError } from './errors.js';
import type { ClientSession } from './session.js';
import { diagnosisSchema, type BundleDocument, type Diagnosis } from './types.js';

export async function analyze(
  session: ClientSession,
  bundle: BundleDocument | Buffer | string,
): Promise<Diagnosis> {
  // a Buffer holds canonical UTF-8 JSON; fetch re-encodes strings as UTF-8,
  // so the on-wire bytes are unchanged
  const body: string = Buffer.isBuffer(bundle)
    ? bundle.toString('utf-8')
    : typeof bundle === 'string'
      ? bundle
      : JSON.stringify(bundle);
  const controller = new AbortController();
  const timer = setTimeout(() => controller.abort(), session.timeoutSecs * 1000);
  let response: Response;
  try {
    response = await fetch(session.endpoint('/analyze'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json', ...session.headers },
      body,
      signal: controller.signal,
    });
  } catch (error) {
    if (controller.signal.aborted) throw new TimeoutError(session.timeoutSecs);
    throw new NetworkError(`cannot reach server: ${(error as Error).message}`);
  } finally {
    clearTimeout(timer);
  }

  const text = await response.text();
  if (response.status === 422) {
    let message = text;
    let fieldPath: string | null = null;
    try {
      const parsed = JSON.parse(text);
      message = parsed.error ?? text;
      fieldPath = parsed.field_path ?? null;
    } catch {
      // keep the raw body as the message
    }
    throw new ValidationError(message, fieldPath);
  }
  if (response.status !== 200) {
    throw new ServerError(response.status, text);
  }
  return diagnosisSchema.parse(JSON.parse(text));
}
