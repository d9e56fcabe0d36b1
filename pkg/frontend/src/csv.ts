import { CsvRow, ValidationError } from "./types.js";

export const EXPECTED_HEADER =
  "sweep_name,sweep_value,algorithm,trial,seed,sum_se_bps_hz," +
  "sum_se_lb_bps_hz,wall_time_ms,iterations,converged";

function parseNumber(field: string, raw: string, line: number): number {
  if (raw === "nan") return NaN;
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new ValidationError(`line ${line}: field ${field} is not a number: ${raw}`);
  }
  return value;
}

function parseInteger(field: string, raw: string, line: number): number {
  const value = parseNumber(field, raw, line);
  if (!Number.isInteger(value)) {
    throw new ValidationError(`line ${line}: field ${field} is not an integer: ${raw}`);
  }
  return value;
}

/**
 * Parse harness CSV text into typed rows.
 *
 * The header must match the schema exactly; the first malformed row aborts
 * with a message quoting its line number. An empty-but-valid file (header
 * only) is rejected, since there is nothing to plot.
 */
export function parseHarnessCsv(text: string): CsvRow[] {
  const lines = text.split("\n").filter((line, i, all) => !(line === "" && i === all.length - 1));
  if (lines.length === 0) {
    throw new ValidationError("empty file: missing header");
  }
  if (lines[0].replace(/\r$/, "") !== EXPECTED_HEADER) {
    throw new ValidationError(`header mismatch: expected "${EXPECTED_HEADER}", got "${lines[0]}"`);
  }
  const rows: CsvRow[] = [];
  for (let i = 1; i < lines.length; i += 1) {
    const raw = lines[i].replace(/\r$/, "");
    if (raw === "") {
      throw new ValidationError(`line ${i + 1}: blank data row`);
    }
    const fields = raw.split(",");
    if (fields.length !== 10) {
      throw new ValidationError(`line ${i + 1}: expected 10 fields, got ${fields.length}: ${raw}`);
    }
    if (fields[9] !== "true" && fields[9] !== "false") {
      throw new ValidationError(`line ${i + 1}: converged must be true/false, got ${fields[9]}`);
    }
    rows.push({
      sweepName: fields[0],
      sweepValue: parseNumber("sweep_value", fields[1], i + 1),
      algorithm: fields[2],
      trial: parseInteger("trial", fields[3], i + 1),
      seed: parseInteger("seed", fields[4], i + 1),
      sumSeBpsHz: parseNumber("sum_se_bps_hz", fields[5], i + 1),
      sumSeLbBpsHz: parseNumber("sum_se_lb_bps_hz", fields[6], i + 1),
      wallTimeMs: parseNumber("wall_time_ms", fields[7], i + 1),
      iterations: parseInteger("iterations", fields[8], i + 1),
      converged: fields[9] === "true",
    });
  }
  if (rows.length === 0) {
    throw new ValidationError("no data rows");
  }
  return rows;
}
