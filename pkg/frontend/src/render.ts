/**
 * Figure assembly from artifact directories.
 *
 * Euclidean figures overlay target and fit log-density contours with the
 * center and fitted-location markers.  Sphere figures show the target and
 * fitted vMF log-densities in the Lambert equal-area plane, the minimizer
 * marker, and (above the critical threshold) the latitude circle of
 * minimizers.  Only numbers read from the artifacts are drawn.
 */

import {
  ArtifactError,
  artifactPath,
  num,
  readCsv,
  readJson,
  toDenseGrid,
  vec,
} from "./artifacts.js";
import { contourSegments, percentileLevels } from "./contours.js";
import {
  Frame,
  caption,
  contourGroup,
  document as svgDocument,
  frameBox,
  legend,
  marker,
  polyline,
  segmentsPath,
} from "./svg.js";

export type FigureKind = "even" | "elliptical" | "sphere-left" | "sphere-right";

export interface PlotJob {
  inputDir: string;
  figure: FigureKind;
  levels: number;
}

const TARGET_COLOR = "#1f77b4";
const FIT_COLOR = "#d62728";
const CIRCLE_COLOR = "#2ca02c";

function levelPaths(frame: Frame, grid: ReturnType<typeof toDenseGrid>, count: number): string[] {
  return percentileLevels(grid, count).map((level) =>
    segmentsPath(frame, contourSegments(grid, level)),
  );
}

function renderEuclidean(job: PlotJob): string {
  const summary = readJson(artifactPath(job.inputDir, "summary.json"));
  const target = toDenseGrid(
    readCsv(artifactPath(job.inputDir, "target_density.csv")).rows.get("grid") ?? [],
    0,
  );
  const fit = toDenseGrid(
    readCsv(artifactPath(job.inputDir, "fit_density.csv")).rows.get("grid") ?? [],
    0,
  );
  const frame = new Frame({
    xMin: Math.min(...target.xs),
    xMax: Math.max(...target.xs),
    yMin: Math.min(...target.ys),
    yMax: Math.max(...target.ys),
  });
  const center = vec(summary, "m");
  const nuStar = vec(summary, "nu_star");
  const captionText =
    job.figure === "even"
      ? `even symmetry: |nu* - m| = ${num(summary, "mean_error").toExponential(2)}`
      : `elliptical symmetry: correlation gap = ${num(summary, "max_correlation_gap").toExponential(2)}`;

  const body = [
    frameBox(frame),
    contourGroup(frame, "contours target", TARGET_COLOR, null, levelPaths(frame, target, job.levels)),
    contourGroup(frame, "contours fit", FIT_COLOR, "5 3", levelPaths(frame, fit, job.levels)),
    marker(frame, "marker center", center[0], center[1], TARGET_COLOR, 6),
    marker(frame, "marker minimizer", nuStar[0], nuStar[1], FIT_COLOR, 4),
    legend(frame, [
      { label: "target", color: TARGET_COLOR, dash: false },
      { label: "fit", color: FIT_COLOR, dash: true },
    ]),
    caption(frame, captionText),
  ];
  return svgDocument(frame, body);
}

function renderSphere(job: PlotJob): string {
  const summary = readJson(artifactPath(job.inputDir, "summary.json"));
  const table = readCsv(artifactPath(job.inputDir, "contours.csv"));
  const gridRows = table.rows.get("grid") ?? [];
  if (gridRows.length === 0) {
    throw new ArtifactError("contours.csv holds no grid rows");
  }
  const targetGrid = toDenseGrid(gridRows, 0); // log_p column
  const fitGrid = toDenseGrid(gridRows, 1); // log_q column
  const frame = new Frame({ xMin: -2.05, xMax: 2.05, yMin: -2.05, yMax: 2.05 });

  const eta = num(summary, "eta");
  const etaC = num(summary, "eta_critical");
  const minimizers = table.rows.get("minimizer") ?? [];
  const circleRows = table.rows.get("circle") ?? [];

  const body = [
    frameBox(frame),
    contourGroup(frame, "contours target", TARGET_COLOR, null, levelPaths(frame, targetGrid, job.levels)),
    contourGroup(frame, "contours fit", FIT_COLOR, "5 3", levelPaths(frame, fitGrid, job.levels)),
  ];
  if (circleRows.length > 0) {
    const pts = circleRows.map((r) => ({ x: r.x, y: r.y }));
    pts.push(pts[0]);
    body.push(polyline(frame, "minimizer-circle", pts, CIRCLE_COLOR));
  }
  body.push(marker(frame, "marker center", 0, 0, TARGET_COLOR, 6));
  for (const mRow of minimizers) {
    body.push(marker(frame, "marker minimizer", mRow.x, mRow.y, FIT_COLOR, 4));
  }
  body.push(
    legend(frame, [
      { label: "target", color: TARGET_COLOR, dash: false },
      { label: "vMF fit", color: FIT_COLOR, dash: true },
    ]),
    caption(frame, `eta = ${eta} ${eta <= etaC ? "<=" : ">"} eta_c = ${etaC.toFixed(4)}`),
  );
  return svgDocument(frame, body);
}

export function render(job: PlotJob): string {
  if (job.levels < 5) {
    throw new ArtifactError("need at least 5 contour levels");
  }
  switch (job.figure) {
    case "even":
    case "elliptical":
      return renderEuclidean(job);
    case "sphere-left":
    case "sphere-right":
      return renderSphere(job);
    default:
      throw new ArtifactError(`unknown figure ${job.figure as string}`);
  }
}
