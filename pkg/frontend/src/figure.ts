import { readFileSync, writeFileSync } from "fs";

import { buildSeries } from "./aggregate.js";
import { parseHarnessCsv } from "./csv.js";
import { buildStyleMap } from "./styles.js";
import { renderSvg, AxisConfig } from "./svg.js";
import {
  FIGURE_KINDS,
  FigureKind,
  FigureSpec,
  RenderedFigure,
  ValidationError,
} from "./types.js";

const AXIS_LABELS: Record<FigureKind, { x: string; y: string; title: string; logY: boolean }> = {
  se_vs_power: {
    x: "transmit power budget [dBm]",
    y: "sum spectral efficiency [bits/s/Hz]",
    title: "Sum spectral efficiency vs transmit power",
    logY: false,
  },
  se_vs_antennas: {
    x: "transmit antennas",
    y: "sum spectral efficiency [bits/s/Hz]",
    title: "Sum spectral efficiency vs antenna count",
    logY: false,
  },
  time_vs_antennas: {
    x: "transmit antennas",
    y: "median solver wall time [ms]",
    title: "Computation time vs antenna count",
    logY: true,
  },
  se_vs_users: {
    x: "downlink users",
    y: "sum spectral efficiency [bits/s/Hz]",
    title: "Sum spectral efficiency vs user count",
    logY: false,
  },
  convergence: {
    x: "iteration",
    y: "objective [bits/s/Hz]",
    title: "Solver convergence",
    logY: false,
  },
};

export function isFigureKind(value: string): value is FigureKind {
  return (FIGURE_KINDS as readonly string[]).includes(value);
}

/** Aggregate CSV text and render it; the returned series back the SVG exactly. */
export function renderFigureFromText(text: string, kind: FigureKind): RenderedFigure {
  const rows = parseHarnessCsv(text);
  const series = buildSeries(rows, kind);
  const styles = buildStyleMap(series.map((s) => s.algorithm));
  const labels = AXIS_LABELS[kind];
  const axis: AxisConfig = {
    xLabel: labels.x,
    yLabel: labels.y,
    title: labels.title,
    logY: labels.logY,
  };
  const svg = renderSvg(series, styles, axis);
  return { kind, sweepName: rows[0].sweepName, series, styles, svg };
}

export function render(spec: FigureSpec): RenderedFigure {
  if (!isFigureKind(spec.figureKind)) {
    throw new ValidationError(
      `unknown figure kind "${spec.figureKind}"; valid: ${FIGURE_KINDS.join(", ")}`,
    );
  }
  let text: string;
  try {
    text = readFileSync(spec.csvPath, "utf-8");
  } catch (err) {
    throw new ValidationError(`cannot read CSV ${spec.csvPath}: ${(err as Error).message}`);
  }
  const figure = renderFigureFromText(text, spec.figureKind);
  writeFileSync(spec.outputPath, figure.svg, "utf-8");
  return figure;
}
