/** Bundle construction by delegation: tables are materialized to the CSV/JSON
 * interchange files and the primary `mlfix ingest` does every computation, so
 * SDK bundles are byte-identical to CLI bundles for the same inputs. The SDK
 * itself computes no statistics.
 */

import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { tableToCsv } from './csv.js';
import { IngestError } from './errors.js';
import {
  bundleSchema,
  type BundleDocument,
  type CheckpointDocument,
  type DatasetSchema,
  type PredictionsDocument,
  type Table,
} from './types.js';

export interface IngestOptions {
  trainPredictions?: PredictionsDocument;
  testPredictions?: PredictionsDocument;
  checkpoint?: CheckpointDocument;
  checkConfig?: Record<string, unknown>;
  /** Command used to invoke the primary tool, e.g. ["python3", "-m", "mlfix"].
   * Defaults to $MLFIX_BIN (split on spaces) or ["mlfix"]. */
  mlfixBin?: string[];
}

export function resolveMlfixBin(override?: string[]): string[] {
  if (override && override.length > 0) return override;
  const env = process.env.MLFIX_BIN;
  if (env && env.trim()) return env.trim().split(/\s+/);
  return ['mlfix'];
}

export interface IngestResult {
  bundle: BundleDocument;
  /** Canonical bytes exactly as the primary tool wrote them. */
  raw: Buffer;
}

export function ingest(
  trainTable: Table,
  testTable: Table | null,
  schema: DatasetSchema,
  options: IngestOptions = {},
): IngestResult {
  if (testTable === null || testTable === undefined) {
    throw new IngestError('test split required', 2);
  }
  const workdir = mkdtempSync(join(tmpdir(), 'mlfix-sdk-'));
  try {
    const paths = {
      schema: join(workdir, 'schema.json'),
      train: join(workdir, 'train.csv'),
      test: join(workdir, 'test.csv'),
      out: join(workdir, 'bundle.json'),
    };
    writeFileSync(paths.schema, JSON.stringify(schema));
    writeFileSync(paths.train, tableToCsv(trainTable, schema));
    writeFileSync(paths.test, tableToCsv(testTable, schema));
    const args = [
      'ingest',
      '--train', paths.train,
      '--test', paths.test,
      '--schema', paths.schema,
      '--out', paths.out,
    ];
    if (options.trainPredictions) {
      const path = join(workdir, 'pred_train.json');
      writeFileSync(path, JSON.stringify({ dataset_ref: 'train', ...options.trainPredictions }));
      args.push('--predictions-train', path);
    }
    if (options.testPredictions) {
      const path = join(workdir, 'pred_test.json');
      writeFileSync(path, JSON.stringify({ dataset_ref: 'test', ...options.testPredictions }));
      args.push('--predictions-test', path);
    }
    if (options.checkpoint) {
      const path = join(workdir, 'checkpoint.json');
      writeFileSync(path, JSON.stringify(options.checkpoint));
      args.push('--checkpoint', path);
    }
    if (options.checkConfig) {
      const path = join(workdir, 'checks.json');
      writeFileSync(path, JSON.stringify(options.checkConfig));
      args.push('--config', path);
    }

    const [command, ...prefix] = resolveMlfixBin(options.mlfixBin);
    const run = spawnSync(command, [...prefix, ...args], { encoding: 'utf-8' });
    if (run.error) {
      throw new IngestError(`cannot run primary tool '${command}': ${run.error.message}`, -1);
    }
    if (run.status !== 0) {
      const message = (run.stderr || run.stdout || 'primary ingest failed').trim();
      throw new IngestError(message, run.status ?? -1);
    }
    const raw = readFileSync(paths.out);
    return { bundle: bundleSchema.parse(JSON.parse(raw.toString('utf-8'))), raw };
  } finally {
    rmSync(workdir, { recursive: true, force: true });
  }
}
