#!/usr/bin/env node
/**
 * symvi-plot: render symvi experiment artifacts into SVG figures.
 *
 *   symvi-plot --in DIR --figure even|elliptical|sphere-left|sphere-right \
 *              --out FILE [--levels N]
 *
 * Fails with a nonzero exit code and writes nothing on missing or malformed
 * input.
 */

import { writeFileSync, mkdirSync } from "fs";
import { dirname } from "path";

import { ArtifactError } from "./artifacts.js";
import { FigureKind, render } from "./render.js";

const FIGURES: FigureKind[] = ["even", "elliptical", "sphere-left", "sphere-right"];

interface CliArgs {
  inputDir: string;
  figure: FigureKind;
  outFile: string;
  levels: number;
}

export function parseArgs(argv: string[]): CliArgs {
  let inputDir: string | null = null;
  let figure: string | null = null;
  let outFile: string | null = null;
  let levels = 9;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`flag ${arg} needs a value`);
      return argv[i];
    };
    switch (arg) {
      case "--in":
        inputDir = next();
        break;
      case "--figure":
        figure = next();
        break;
      case "--out":
        outFile = next();
        break;
      case "--levels":
        levels = Number(next());
        break;
      default:
        throw new Error(`unknown flag ${arg}`);
    }
  }
  if (!inputDir || !figure || !outFile) {
    throw new Error("usage: symvi-plot --in DIR --figure NAME --out FILE [--levels N]");
  }
  if (!FIGURES.includes(figure as FigureKind)) {
    throw new Error(`--figure must be one of ${FIGURES.join(", ")}`);
  }
  if (!Number.isInteger(levels) || levels < 5) {
    throw new Error("--levels must be an integer >= 5");
  }
  return { inputDir, figure: figure as FigureKind, outFile, levels };
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  let svg: string;
  try {
    svg = render({ inputDir: args.inputDir, figure: args.figure, levels: args.levels });
  } catch (err) {
    if (err instanceof ArtifactError) {
      console.error(`cannot render: ${err.message}`);
      return 1;
    }
    throw err;
  }
  mkdirSync(dirname(args.outFile), { recursive: true });
  writeFileSync(args.outFile, svg, "utf-8");
  return 0;
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
