// Two-run comparison: side-by-side metric values with signed deltas,
// every number a straight copy or subtraction of payload fields.

import { metricRows } from "./render";
import type { RunPayload } from "./types";

export interface CompareRow {
  label: string;
  a: string;
  b: string;
  delta: number;
  deltaText: string;
}

export interface CompareModel {
  runA: string;
  runB: string;
  rows: CompareRow[];
}

export function compareRuns(a: RunPayload, b: RunPayload): CompareModel {
  if (a.scenario_hash === undefined || b.scenario_hash === undefined) {
    throw new Error("both runs must be complete to compare");
  }
  // Stable ordering by run index regardless of argument order.
  const [first, second] = [a, b].sort((x, y) => x.run_id.localeCompare(y.run_id));
  const rowsA = metricRows(first);
  const rowsB = metricRows(second);
  const rows: CompareRow[] = rowsA.map((ra, i) => {
    const rb = rowsB[i];
    const delta = rb.raw - ra.raw;
    const sign = delta >= 0 ? "+" : "−";
    return {
      label: ra.label,
      a: ra.value,
      b: rb.value,
      delta,
      deltaText: `${sign}${Math.abs(delta).toFixed(3)}`,
    };
  });
  return { runA: first.run_id, runB: second.run_id, rows };
}
