/** In-memory table to CSV interchange text.
 *
 * Columns are written in schema order so the file matches what the primary
 * tool expects; null cells become empty fields (the shared null token).
 */

import type { CellValue, DatasetSchema, Table } from './types.js';

const NEEDS_QUOTING = /[",\r\n]/;

function formatCell(value: CellValue): string {
  if (value === null) return '';
  const text = typeof value === 'number' ? String(value) : value;
  return NEEDS_QUOTING.test(text) ? `"${text.replaceAll('"', '""')}"` : text;
}

export function tableToCsv(table: Table, schema: DatasetSchema): string {
  const names = schema.columns.map((c) => c.name);
  for (const name of names) {
    if (!(name in table)) throw new Error(`table is missing column '${name}'`);
  }
  const extra = Object.keys(table).filter((name) => !names.includes(name));
  if (extra.length > 0) throw new Error(`table holds undeclared column(s): ${extra.join(', ')}`);

  const lengths = new Set(names.map((name) => table[name].length));
  if (lengths.size > 1) throw new Error('table columns have differing lengths');
  const rows = lengths.size === 1 ? [...lengths][0] : 0;

  const lines = [names.map(formatCell).join(',')];
  for (let i = 0; i < rows; i++) {
    lines.push(names.map((name) => formatCell(table[name][i])).join(','));
  }
  return lines.join('\n') + '\n';
}
