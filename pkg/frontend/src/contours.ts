/**
 * Marching-squares contour extraction on a dense rectangular grid.
 *
 * Produces raw line segments in data coordinates for a set of iso-levels.
 * Cells touching a NaN corner (holes in the artifact grid) are skipped.
 * This is rendering geometry only: levels are chosen from percentiles of
 * the values read from the artifact, never recomputed from a model.
 */

import { DenseGrid } from "./artifacts.js";

export interface Segment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/** Equally spaced levels between the q-th percentile and the maximum. */
export function percentileLevels(grid: DenseGrid, count: number, lowQuantile = 0.5): number[] {
  const flat = grid.values.flat().filter((v) => Number.isFinite(v));
  flat.sort((a, b) => a - b);
  if (flat.length === 0) return [];
  const lo = flat[Math.min(flat.length - 1, Math.floor(lowQuantile * flat.length))];
  const hi = flat[flat.length - 1];
  const levels: number[] = [];
  for (let i = 1; i <= count; i += 1) {
    levels.push(lo + ((hi - lo) * i) / (count + 1));
  }
  return levels;
}

function interp(level: number, a: number, b: number, pa: number, pb: number): number {
  const t = (level - a) / (b - a);
  return pa + t * (pb - pa);
}

export function contourSegments(grid: DenseGrid, level: number): Segment[] {
  const segments: Segment[] = [];
  const { xs, ys, values } = grid;
  for (let i = 0; i + 1 < xs.length; i += 1) {
    for (let j = 0; j + 1 < ys.length; j += 1) {
      const v00 = values[i][j];
      const v10 = values[i + 1][j];
      const v11 = values[i + 1][j + 1];
      const v01 = values[i][j + 1];
      if (![v00, v10, v11, v01].every(Number.isFinite)) continue;

      // crossing points on the four cell edges
      const bottom =
        v00 < level !== v10 < level
          ? { x: interp(level, v00, v10, xs[i], xs[i + 1]), y: ys[j] }
          : null;
      const top =
        v01 < level !== v11 < level
          ? { x: interp(level, v01, v11, xs[i], xs[i + 1]), y: ys[j + 1] }
          : null;
      const left =
        v00 < level !== v01 < level
          ? { x: xs[i], y: interp(level, v00, v01, ys[j], ys[j + 1]) }
          : null;
      const right =
        v10 < level !== v11 < level
          ? { x: xs[i + 1], y: interp(level, v10, v11, ys[j], ys[j + 1]) }
          : null;

      const pts = [bottom, right, top, left].filter((p) => p !== null) as {
        x: number;
        y: number;
      }[];
      if (pts.length === 2) {
        segments.push({ x1: pts[0].x, y1: pts[0].y, x2: pts[1].x, y2: pts[1].y });
      } else if (pts.length === 4) {
        // saddle cell: split by the center value to pick consistent pairs
        const center = (v00 + v10 + v11 + v01) / 4;
        if ((center < level) === (v00 < level)) {
          segments.push({ x1: left!.x, y1: left!.y, x2: top!.x, y2: top!.y });
          segments.push({ x1: bottom!.x, y1: bottom!.y, x2: right!.x, y2: right!.y });
        } else {
          segments.push({ x1: left!.x, y1: left!.y, x2: bottom!.x, y2: bottom!.y });
          segments.push({ x1: top!.x, y1: top!.y, x2: right!.x, y2: right!.y });
        }
      }
    }
  }
  return segments;
}
