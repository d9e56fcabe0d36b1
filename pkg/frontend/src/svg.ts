import { Series, SeriesStyle } from "./types.js";

export interface AxisConfig {
  xLabel: string;
  yLabel: string;
  logY: boolean;
  title: string;
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 180, bottom: 56, left: 72 };

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (lo === hi) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e += 1) {
    const v = Math.pow(10, e);
    if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-2) return value.toExponential(0);
  return Number(value.toPrecision(6)).toString();
}

function markerGlyph(marker: SeriesStyle["marker"], x: number, y: number, color: string): string {
  const r = 3.5;
  switch (marker) {
    case "circle":
      return `<circle cx="${x}" cy="${y}" r="${r}" fill="${color}"/>`;
    case "square":
      return `<rect x="${x - r}" y="${y - r}" width="${2 * r}" height="${2 * r}" fill="${color}"/>`;
    case "diamond":
      return `<path d="M ${x} ${y - r - 1} L ${x + r + 1} ${y} L ${x} ${y + r + 1} L ${x - r - 1} ${y} Z" fill="${color}"/>`;
    case "triangle":
      return `<path d="M ${x} ${y - r - 1} L ${x + r + 1} ${y + r} L ${x - r - 1} ${y + r} Z" fill="${color}"/>`;
  }
}

/** Render aggregated series as a standalone SVG line chart. */
export function renderSvg(
  series: Series[],
  styles: Record<string, SeriesStyle>,
  axis: AxisConfig,
): string {
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  if (xLo === xHi) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  let yLo: number;
  let yHi: number;
  if (axis.logY) {
    const positive = ys.filter((v) => v > 0);
    yLo = Math.min(...positive) / 1.5;
    yHi = Math.max(...positive) * 1.5;
  } else {
    yLo = Math.min(0, Math.min(...ys));
    yHi = Math.max(...ys) * 1.05 || 1;
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) =>
    axis.logY
      ? MARGIN.top + plotH - ((Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * plotH
      : MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="24" text-anchor="middle" font-size="15">${axis.title}</text>`,
  );

  // axes and ticks
  const xTicks = niceTicks(xLo, xHi);
  const yTicks = axis.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const x = sx(t);
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">${formatTick(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-size="11">${formatTick(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${axis.xLabel}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${axis.yLabel}</text>`,
  );

  // one polyline plus markers per algorithm
  for (const s of series) {
    const style = styles[s.algorithm];
    const points = s.x.map((v, i) => `${sx(v)},${sy(s.y[i])}`).join(" ");
    const dash = style.dashed ? ' stroke-dasharray="7,4"' : "";
    parts.push(
      `<polyline data-algorithm="${s.algorithm}" points="${points}" fill="none" stroke="${style.color}" stroke-width="1.8"${dash}/>`,
    );
    for (let i = 0; i < s.x.length; i += 1) {
      parts.push(markerGlyph(style.marker, sx(s.x[i]), sy(s.y[i]), style.color));
    }
  }

  // legend
  const legendX = MARGIN.left + plotW + 16;
  series.forEach((s, i) => {
    const style = styles[s.algorithm];
    const y = MARGIN.top + 12 + i * 22;
    const dash = style.dashed ? ' stroke-dasharray="7,4"' : "";
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 28}" y2="${y}" stroke="${style.color}" stroke-width="1.8"${dash}/>`,
      markerGlyph(style.marker, legendX + 14, y, style.color),
      `<text x="${legendX + 34}" y="${y + 4}" font-size="12">${s.algorithm}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
