export { analyze } from './analyze.js';
export { tableToCsv } from './csv.js';
export {
  IngestError,
  MlfixError,
  NetworkError,
  ServerError,
  TimeoutError,
  ValidationError,
} from './errors.js';
export { ingest, resolveMlfixBin, type IngestOptions, type IngestResult } from './ingest.js';
export { ClientSession, type SessionOptions } from './session.js';
export {
  bundleSchema,
  diagnosisSchema,
  type BundleDocument,
  type CellValue,
  type CheckpointDocument,
  type ColumnKind,
  type DatasetSchema,
  type Diagnosis,
  type PredictionsDocument,
  type Table,
} from './types.js';
