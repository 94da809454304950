/** Three fixture datasets, each available both as literal CSV text (the CLI
 * path) and as the in-memory table the SDK consumes. */

import type { CheckpointDocument, DatasetSchema, PredictionsDocument, Table } from '../src/types.js';

export interface Fixture {
  name: string;
  schema: DatasetSchema;
  trainCsv: string;
  testCsv: string;
  trainTable: Table;
  testTable: Table;
  trainPredictions?: PredictionsDocument;
  testPredictions?: PredictionsDocument;
  checkpoint?: CheckpointDocument;
}

const basicSchema: DatasetSchema = {
  columns: [
    { name: 'age', kind: 'numeric' },
    { name: 'city', kind: 'categorical' },
    { name: 'target', kind: 'categorical' },
  ],
  label_column: 'target',
  index_column: null,
  task: 'classification',
};

const basic: Fixture = {
  name: 'basic-classification',
  schema: basicSchema,
  trainCsv:
    'age,city,target\n' +
    '34,berlin,yes\n41,munich,no\n29,berlin,yes\n55,hamburg,no\n38,munich,yes\n47,berlin,no\n',
  testCsv: 'age,city,target\n31,berlin,yes\n52,hamburg,no\n44,munich,no\n',
  trainTable: {
    age: [34, 41, 29, 55, 38, 47],
    city: ['berlin', 'munich', 'berlin', 'hamburg', 'munich', 'berlin'],
    target: ['yes', 'no', 'yes', 'no', 'yes', 'no'],
  },
  testTable: {
    age: [31, 52, 44],
    city: ['berlin', 'hamburg', 'munich'],
    target: ['yes', 'no', 'no'],
  },
};

const richSchema: DatasetSchema = {
  columns: [
    { name: 'row_id', kind: 'identifier' },
    { name: 'f1', kind: 'numeric' },
    { name: 'note', kind: 'text' },
    { name: 'label', kind: 'categorical' },
  ],
  label_column: 'label',
  index_column: 'row_id',
  task: 'classification',
};

const rich: Fixture = {
  name: 'with-predictions-and-checkpoint',
  schema: richSchema,
  trainCsv:
    'row_id,f1,note,label\n' +
    'r1,0.5,first row,a\nr2,1.5,second row,b\nr3,,third row,a\nr4,2.25,"quoted, note",b\n',
  testCsv: 'row_id,f1,note,label\nt1,0.75,test one,a\nt2,1.25,test two,b\n',
  trainTable: {
    row_id: ['r1', 'r2', 'r3', 'r4'],
    f1: [0.5, 1.5, null, 2.25],
    note: ['first row', 'second row', 'third row', 'quoted, note'],
    label: ['a', 'b', 'a', 'b'],
  },
  testTable: {
    row_id: ['t1', 't2'],
    f1: [0.75, 1.25],
    note: ['test one', 'test two'],
    label: ['a', 'b'],
  },
  trainPredictions: { predicted_labels: ['a', 'b', 'a', 'b'] },
  testPredictions: {
    predicted_labels: ['a', 'b'],
    probabilities: [
      [0.8, 0.2],
      [0.3, 0.7],
    ],
    class_order: ['a', 'b'],
  },
  checkpoint: {
    architecture: 'gradient-boosted trees',
    parameter_count: 1024,
    num_classes: 2,
    docstring: 'fixture model',
    training_config: { depth: 3, lr: 0.1 },
  },
};

const regressionSchema: DatasetSchema = {
  columns: [
    { name: 'x1', kind: 'numeric' },
    { name: 'x2', kind: 'numeric' },
    { name: 'y', kind: 'numeric' },
  ],
  label_column: 'y',
  index_column: null,
  task: 'regression',
};

const regression: Fixture = {
  name: 'regression',
  schema: regressionSchema,
  trainCsv: 'x1,x2,y\n1,10,11\n2,9,11.5\n3,8,12\n4,7,12.5\n5,6,13\n',
  testCsv: 'x1,x2,y\n1.5,9.5,11.2\n3.5,7.5,12.2\n',
  trainTable: {
    x1: [1, 2, 3, 4, 5],
    x2: [10, 9, 8, 7, 6],
    y: [11, 11.5, 12, 12.5, 13],
  },
  testTable: {
    x1: [1.5, 3.5],
    x2: [9.5, 7.5],
    y: [11.2, 12.2],
  },
};

export const FIXTURES: Fixture[] = [basic, rich, regression];
