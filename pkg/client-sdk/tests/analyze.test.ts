import { spawn, type ChildProcess } from 'node:child_process';
import { createServer, type Server } from 'node:http';
import { AddressInfo } from 'node:net';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { analyze } from '../src/analyze.js';
import { NetworkError, ServerError, TimeoutError, ValidationError } from '../src/errors.js';
import { ingest } from '../src/ingest.js';
import { ClientSession } from '../src/session.js';
import { diagnosisSchema } from '../src/types.js';
import { FIXTURES } from './fixtures.js';

const MLFIX = ['python3', '-m', 'mlfix'];

let server: ChildProcess;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve) => {
    const probe = createServer();
    probe.listen(0, '127.0.0.1', () => {
      const port = (probe.address() as AddressInfo).port;
      probe.close(() => resolve(port));
    });
  });
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(MLFIX[0], [...MLFIX.slice(1), 'serve', '--port', String(port)], {
    stdio: 'ignore',
  });
  const deadline = Date.now() + 20_000;
  while (Date.now() < deadline) {
    try {
      const ok = await fetch(`${baseUrl}/healthz`);
      if (ok.status === 200) return;
    } catch {
      // server not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error('mlfix server did not come up');
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe('analyze against a live server', () => {
  it('round-trips a bundle into a schema-valid diagnosis', async () => {
    const fixture = FIXTURES[0];
    const { raw } = ingest(fixture.trainTable, fixture.testTable, fixture.schema, {
      mlfixBin: MLFIX,
    });
    const session = new ClientSession(baseUrl, { timeoutSecs: 30 });
    const diagnosis = await analyze(session, raw);
    expect(diagnosisSchema.safeParse(diagnosis).success).toBe(true);
    expect(diagnosis.consensus.samples).toBeGreaterThanOrEqual(0);
    expect(diagnosis.actions.length).toBeGreaterThan(0);
  });

  it('maps 422 to ValidationError with the field path', async () => {
    const fixture = FIXTURES[0];
    const { bundle } = ingest(fixture.trainTable, fixture.testTable, fixture.schema, {
      mlfixBin: MLFIX,
    });
    const broken = { ...bundle, modality: 'vision' };
    const session = new ClientSession(baseUrl, { timeoutSecs: 30 });
    await expect(analyze(session, JSON.stringify(broken))).rejects.toSatisfy((error) => {
      expect(error).toBeInstanceOf(ValidationError);
      expect((error as ValidationError).fieldPath).toBe('bundle.modality');
      return true;
    });
  });

  it('maps other non-200 responses to ServerError', async () => {
    const session = new ClientSession(`${baseUrl}/healthz`, { timeoutSecs: 30 });
    await expect(analyze(session, '{}')).rejects.toBeInstanceOf(ServerError);
  });
});

describe('analyze transport errors', () => {
  it('maps unreachable hosts to NetworkError', async () => {
    const port = await freePort();
    const session = new ClientSession(`http://127.0.0.1:${port}`, { timeoutSecs: 2 });
    await expect(analyze(session, '{}')).rejects.toBeInstanceOf(NetworkError);
  });

  it('maps a stalling server to TimeoutError', async () => {
    const stalling: Server = createServer(() => {
      /* never respond */
    });
    await new Promise<void>((resolve) => stalling.listen(0, '127.0.0.1', resolve));
    const port = (stalling.address() as AddressInfo).port;
    try {
      const session = new ClientSession(`http://127.0.0.1:${port}`, { timeoutSecs: 0.5 });
      await expect(analyze(session, '{}')).rejects.toBeInstanceOf(TimeoutError);
    } finally {
      stalling.close();
    }
  });
});
