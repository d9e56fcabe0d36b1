export const FIGURE_KINDS = [
  "se_vs_power",
  "se_vs_antennas",
  "time_vs_antennas",
  "se_vs_users",
  "convergence",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

/** One parsed row of the harness CSV schema. */
export interface CsvRow {
  sweepName: string;
  sweepValue: number;
  algorithm: string;
  trial: number;
  seed: number;
  sumSeBpsHz: number;
  sumSeLbBpsHz: number;
  wallTimeMs: number;
  iterations: number;
  converged: boolean;
}

export interface FigureSpec {
  csvPath: string;
  figureKind: FigureKind;
  outputPath: string;
}

/** Aggregated polyline for one algorithm: x sorted ascending. */
export interface Series {
  algorithm: string;
  x: number[];
  y: number[];
}

export interface SeriesStyle {
  color: string;
  dashed: boolean;
  marker: "circle" | "square" | "diamond" | "triangle";
}

export interface RenderedFigure {
  kind: FigureKind;
  sweepName: string;
  series: Series[];
  styles: Record<string, SeriesStyle>;
  svg: string;
}

export class ValidationError extends Error {}
