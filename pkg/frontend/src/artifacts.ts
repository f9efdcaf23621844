/**
 * Readers for the symvi CLI artifact files.
 *
 * CSV files carry `#`-prefixed comment lines, then a header row, then plain
 * numeric rows (an optional leading `kind` column tags sphere rows as
 * grid / minimizer / circle).  JSON files hold scalars and row-major
 * matrices.  Every number drawn by the renderer comes from these files;
 * nothing is recomputed.
 */

import { readFileSync } from "fs";
import { join } from "path";

export interface GridPoint {
  x: number;
  y: number;
  values: number[]; // one entry per value column
}

export interface CsvTable {
  comments: string[];
  columns: string[];
  /** rows keyed by their `kind` tag; plain tables land under "grid" */
  rows: Map<string, GridPoint[]>;
}

export class ArtifactError extends Error {}

export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new ArtifactError(`missing artifact file: ${path}`);
  }
  const comments: string[] = [];
  let columns: string[] | null = null;
  const rows = new Map<string, GridPoint[]>();
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      comments.push(line.slice(1).trim());
      continue;
    }
    if (columns === null) {
      columns = line.split(",");
      continue;
    }
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new ArtifactError(`ragged row in ${path}: ${line}`);
    }
    const hasKind = columns[0] === "kind";
    const kind = hasKind ? parts[0] : "grid";
    const nums = parts.slice(hasKind ? 1 : 0).map(Number);
    if (nums.some((v) => Number.isNaN(v))) {
      throw new ArtifactError(`non-numeric cell in ${path}: ${line}`);
    }
    const [x, y, ...values] = nums;
    const bucket = rows.get(kind) ?? [];
    bucket.push({ x, y, values });
    rows.set(kind, bucket);
  }
  if (columns === null || rows.size === 0) {
    throw new ArtifactError(`empty or malformed artifact file: ${path}`);
  }
  return { comments, columns, rows };
}

export function readJson(path: string): Record<string, unknown> {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new ArtifactError(`missing artifact file: ${path}`);
  }
  try {
    return JSON.parse(text) as Record<string, unknown>;
  } catch {
    throw new ArtifactError(`malformed JSON: ${path}`);
  }
}

export function num(obj: Record<string, unknown>, key: string): number {
  const v = obj[key];
  if (typeof v !== "number" || Number.isNaN(v)) {
    throw new ArtifactError(`summary field ${key} is not a number`);
  }
  return v;
}

export function vec(obj: Record<string, unknown>, key: string): number[] {
  const v = obj[key];
  if (!Array.isArray(v) || v.some((x) => typeof x !== "number")) {
    throw new ArtifactError(`summary field ${key} is not a numeric array`);
  }
  return v as number[];
}

/** A dense rectangular grid assembled from scattered (x, y, value) points. */
export interface DenseGrid {
  xs: number[];
  ys: number[];
  /** values[i][j] at (xs[i], ys[j]); NaN marks holes (omitted artifact rows) */
  values: number[][];
}

export function toDenseGrid(points: GridPoint[], valueIndex: number): DenseGrid {
  const xs = [...new Set(points.map((p) => p.x))].sort((a, b) => a - b);
  const ys = [...new Set(points.map((p) => p.y))].sort((a, b) => a - b);
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const yIndex = new Map(ys.map((v, i) => [v, i]));
  const values = xs.map(() => ys.map(() => Number.NaN));
  for (const p of points) {
    values[xIndex.get(p.x)!][yIndex.get(p.y)!] = p.values[valueIndex];
  }
  return { xs, ys, values };
}

export function artifactPath(dir: string, name: string): string {
  return join(dir, name);
}
