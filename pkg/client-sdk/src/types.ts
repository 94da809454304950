/** Wire types shared with the mlfix server, plus the minimal in-memory table
 * protocol the SDK accepts (column names to value sequences). */

import { z } from 'zod';

export type CellValue = string | number | null;

/** Column name -> cell vector; all vectors must share one length. */
export type Table = Record<string, CellValue[]>;

export type ColumnKind = 'numeric' | 'categorical' | 'text' | 'datetime' | 'identifier';

export interface DatasetSchema {
  columns: { name: string; kind: ColumnKind }[];
  label_column: string | null;
  index_column: string | null;
  task: 'classification' | 'regression';
}

export interface PredictionsDocument {
  dataset_ref?: 'train' | 'test';
  predicted_labels: (string | number)[];
  probabilities?: number[][];
  class_order?: (string | number)[];
}

export interface CheckpointDocument {
  architecture: string;
  parameter_count: number;
  num_classes?: number | null;
  docstring?: string | null;
  training_config?: Record<string, string | number | boolean | null>;
}

/** The artifact bundle is produced and validated by the primary tool; the SDK
 * treats it as an opaque JSON document beyond this structural sketch. */
export const bundleSchema = z
  .object({
    bundle_version: z.string(),
    modality: z.literal('tabular'),
    created_at: z.string(),
    train_stats: z.object({ sample_count: z.number() }).passthrough(),
    test_stats: z.object({ sample_count: z.number() }).passthrough(),
    integrity_results: z.array(z.unknown()),
    validation_results: z.array(z.unknown()),
    evaluation_results: z.array(z.unknown()),
  })
  .passthrough();
export type BundleDocument = z.infer<typeof bundleSchema>;

const evidenceSchema = z.object({
  check_id: z.string(),
  metric: z.string(),
  value: z.number(),
});

const findingSchema = z.object({
  finding_id: z.string(),
  source_agent: z.enum(['dataset', 'checks', 'checkpoint', 'reasoner']),
  severity: z.enum(['critical', 'high', 'medium', 'low', 'info']),
  confidence: z.number().min(0).max(1),
  evidence: z.array(evidenceSchema),
  description: z.string(),
});

export const diagnosisSchema = z.object({
  ranked_findings: z.array(z.object({ finding: findingSchema, rank_score: z.number() })),
  hypotheses: z.array(
    z.object({
      statement: z.string(),
      supporting_findings: z.array(z.string()).nonempty(),
      kb_citations: z.array(z.string()),
      plausibility: z.number().min(0).max(1),
    }),
  ),
  actions: z.array(
    z.object({
      action: z.string(),
      rationale: z.string(),
      linked_findings: z.array(z.string()),
    }),
  ),
  summary: z.string(),
  consensus: z.object({ samples: z.number().int().min(0), agreement: z.number().min(0).max(1) }),
  degraded: z.boolean(),
});
export type Diagnosis = z.infer<typeof diagnosisSchema>;
