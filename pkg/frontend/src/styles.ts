import { SeriesStyle } from "./types.js";

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
  "#bcbd22",
  "#e377c2",
  "#393b79",
];

const MARKERS: SeriesStyle["marker"][] = ["circle", "square", "diamond", "triangle"];

/** Algorithms that consume error-covariance information render solid. */
export function usesErrorCovariance(algorithm: string): boolean {
  return algorithm.includes("_cov");
}

/**
 * Deterministic per-algorithm style: covariance-aware variants are solid,
 * everything else dashed; colors and markers cycle in sorted-name order so a
 * figure's styling depends only on its algorithm set.
 */
export function buildStyleMap(algorithms: string[]): Record<string, SeriesStyle> {
  const unique = [...new Set(algorithms)].sort();
  const styles: Record<string, SeriesStyle> = {};
  unique.forEach((name, i) => {
    styles[name] = {
      color: PALETTE[i % PALETTE.length],
      dashed: !usesErrorCovariance(name),
      marker: MARKERS[i % MARKERS.length],
    };
  });
  return styles;
}
