import { CsvRow, FigureKind, Series, ValidationError } from "./types.js";

function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

function median(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

/** Timing figures aggregate by median; everything else by mean sum SE. */
export function valueColumn(kind: FigureKind): (row: CsvRow) => number {
  return kind === "time_vs_antennas" ? (r) => r.wallTimeMs : (r) => r.sumSeBpsHz;
}

/**
 * Group rows into one polyline per algorithm: x = sorted sweep values,
 * y = mean (or median, for timing kinds) of the value column per sweep point.
 */
export function buildSeries(rows: CsvRow[], kind: FigureKind): Series[] {
  const pick = valueColumn(kind);
  const aggregate = kind === "time_vs_antennas" ? median : mean;
  const byAlgorithm = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    const value = pick(row);
    if (Number.isNaN(value)) continue; // failed trials carry nan
    let sweeps = byAlgorithm.get(row.algorithm);
    if (!sweeps) {
      sweeps = new Map();
      byAlgorithm.set(row.algorithm, sweeps);
    }
    let bucket = sweeps.get(row.sweepValue);
    if (!bucket) {
      bucket = [];
      sweeps.set(row.sweepValue, bucket);
    }
    bucket.push(value);
  }
  if (byAlgorithm.size === 0) {
    throw new ValidationError("no finite data to aggregate");
  }
  const series: Series[] = [];
  for (const [algorithm, sweeps] of [...byAlgorithm.entries()].sort((a, b) =>
    a[0].localeCompare(b[0]),
  )) {
    const x = [...sweeps.keys()].sort((a, b) => a - b);
    series.push({ algorithm, x, y: x.map((v) => aggregate(sweeps.get(v)!)) });
  }
  return series;
}
