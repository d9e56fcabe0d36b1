import { readFileSync } from "fs";
import { dirname, join } from "path";
import { fileURLToPath } from "url";

import { describe, expect, it } from "vitest";

import { renderFigureFromText } from "../src/figure.js";
import { buildStyleMap, usesErrorCovariance } from "../src/styles.js";
import { EXPECTED_HEADER } from "../src/csv.js";
import { FIGURE_KINDS, ValidationError } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const goldenText = readFileSync(join(here, "fixtures", "golden.csv"), "utf-8");

// Reference table for the golden fixture, frozen from an independent
// aggregation of the CSV text (sorted sweep values 10, 30 dBm).
const GOLDEN_SE_MEANS: Record<string, number[]> = {
  rzf: [25.118635554, 51.95280867],
  sgpip: [34.560305203999995, 54.055964498],
};
const GOLDEN_TIME_MEDIANS: Record<string, number[]> = {
  rzf: [0.07341500077, 0.06118100009],
  sgpip: [12.366664, 12.699407],
};

/** Independent groupby on the raw text, sharing nothing with src/. */
function independentAggregate(
  text: string,
  column: number,
  how: "mean" | "median",
): Record<string, Map<number, number>> {
  const buckets: Record<string, Map<number, number[]>> = {};
  for (const line of text.trim().split("\n").slice(1)) {
    const fields = line.split(",");
    const algorithm = fields[2];
    const sweep = Number(fields[1]);
    const value = Number(fields[column]);
    buckets[algorithm] ??= new Map();
    if (!buckets[algorithm].has(sweep)) buckets[algorithm].set(sweep, []);
    buckets[algorithm].get(sweep)!.push(value);
  }
  const out: Record<string, Map<number, number>> = {};
  for (const [algorithm, sweeps] of Object.entries(buckets)) {
    out[algorithm] = new Map();
    for (const [sweep, values] of sweeps) {
      if (how === "mean") {
        out[algorithm].set(sweep, values.reduce((a, b) => a + b, 0) / values.length);
      } else {
        const sorted = [...values].sort((a, b) => a - b);
        const mid = Math.floor(sorted.length / 2);
        out[algorithm].set(
          sweep,
          sorted.length % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2,
        );
      }
    }
  }
  return out;
}

describe("golden figure", () => {
  it("renders all five figure kinds without error", () => {
    for (const kind of FIGURE_KINDS) {
      const figure = renderFigureFromText(goldenText, kind);
      expect(figure.svg).toContain("<svg");
      expect(figure.svg).toContain("</svg>");
      expect(figure.series.length).toBe(2);
    }
  });

  it("series equal the frozen reference table to 1e-9", () => {
    const se = renderFigureFromText(goldenText, "se_vs_power");
    for (const s of se.series) {
      expect(s.x).toEqual([10, 30]);
      const reference = GOLDEN_SE_MEANS[s.algorithm];
      s.y.forEach((v, i) => expect(Math.abs(v - reference[i])).toBeLessThanOrEqual(1e-9));
    }
    const time = renderFigureFromText(goldenText, "time_vs_antennas");
    for (const s of time.series) {
      const reference = GOLDEN_TIME_MEDIANS[s.algorithm];
      s.y.forEach((v, i) => expect(Math.abs(v - reference[i])).toBeLessThanOrEqual(1e-9));
    }
  });

  it("series equal an independent groupby of the text exactly", () => {
    const se = renderFigureFromText(goldenText, "se_vs_power");
    const means = independentAggregate(goldenText, 5, "mean");
    for (const s of se.series) {
      s.x.forEach((sweep, i) => expect(s.y[i]).toBe(means[s.algorithm].get(sweep)));
    }
    const time = renderFigureFromText(goldenText, "time_vs_antennas");
    const medians = independentAggregate(goldenText, 7, "median");
    for (const s of time.series) {
      s.x.forEach((sweep, i) => expect(s.y[i]).toBe(medians[s.algorithm].get(sweep)));
    }
  });

  it("timing figures use a logarithmic axis, rate figures linear", () => {
    const time = renderFigureFromText(goldenText, "time_vs_antennas");
    const se = renderFigureFromText(goldenText, "se_vs_antennas");
    // log axis draws decade gridlines: 0.1, 1, 10 appear for the golden data
    expect(time.svg).toContain(">0.1<");
    expect(time.svg).toContain(">10<");
    expect(se.svg).not.toContain(">0.1<");
  });
});

describe("style conventions", () => {
  it("dashes exactly the algorithms that ignore error covariance", () => {
    const algorithms = [
      "sgpip",
      "sgpip_cov",
      "gpip_full",
      "gpip_full_cov",
      "convergent_sgpip_cov",
      "rzf",
      "mrt",
      "zfdpc_wf",
    ];
    const styles = buildStyleMap(algorithms);
    for (const name of algorithms) {
      expect(styles[name].dashed).toBe(!usesErrorCovariance(name));
    }
    expect(styles["sgpip"].dashed).toBe(true);
    expect(styles["sgpip_cov"].dashed).toBe(false);
  });

  it("rendered polylines carry the dash attribute per the style map", () => {
    const header = EXPECTED_HEADER;
    const mk = (algorithm: string, sweep: number, se: number) =>
      `power_dbm,${sweep.toExponential(9)},${algorithm},0,1,${se.toExponential(9)},nan,0.000000000e+00,5,true`;
    const text = [header, mk("sgpip", 10, 20), mk("sgpip_cov", 10, 18)].join("\n") + "\n";
    const figure = renderFigureFromText(text, "se_vs_power");
    const dashedLine = figure.svg.match(/<polyline data-algorithm="sgpip"[^>]*>/)![0];
    const solidLine = figure.svg.match(/<polyline data-algorithm="sgpip_cov"[^>]*>/)![0];
    expect(dashedLine).toContain("stroke-dasharray");
    expect(solidLine).not.toContain("stroke-dasharray");
  });
});

describe("counting and validation", () => {
  it("single algorithm with three sweep points yields one line, three markers", () => {
    const mk = (sweep: number, se: number) =>
      `power_dbm,${sweep.toExponential(9)},sgpip,0,1,${se.toExponential(9)},nan,0.000000000e+00,5,true`;
    const text = [EXPECTED_HEADER, mk(0, 10), mk(10, 20), mk(20, 28)].join("\n") + "\n";
    const figure = renderFigureFromText(text, "se_vs_power");
    expect(figure.series).toHaveLength(1);
    expect(figure.series[0].x).toEqual([0, 10, 20]);
    const polylines = figure.svg.match(/<polyline data-algorithm=/g) ?? [];
    expect(polylines).toHaveLength(1);
    // circle markers: 3 on the line plus 1 legend sample
    const circles = figure.svg.match(/<circle /g) ?? [];
    expect(circles).toHaveLength(4);
  });

  it("empty CSV is a validation error", () => {
    expect(() => renderFigureFromText(`${EXPECTED_HEADER}\n`, "se_vs_power")).toThrowError(
      ValidationError,
    );
  });

  it("convergence traces from the harness schema render", () => {
    const mk = (t: number, value: number) =>
      `iteration,${t.toExponential(9)},convergent_sgpip,0,1,${value.toExponential(9)},nan,0.000000000e+00,${t},true`;
    const text = [EXPECTED_HEADER, mk(0, 5), mk(1, 8), mk(2, 9.5)].join("\n") + "\n";
    const figure = renderFigureFromText(text, "convergence");
    expect(figure.sweepName).toBe("iteration");
    expect(figure.series[0].y).toEqual([5, 8, 9.5]);
  });
});
