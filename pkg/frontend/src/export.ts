/**
 * Batch export jobs: one output file per input audio file, same basename,
 * with the extension fixed by the artifact kind (.ispf / .pitch.csv /
 * .phones.csv).
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { basename, join } from "node:path";

import { formatPhonesCsv, formatPitchCsv } from "./csv.js";
import { loadFeatureModel } from "./embed.js";
import { writeIspf } from "./ispf.js";
import { recognizePhones } from "./phones.js";
import { estimatePitch, type PitchOptions } from "./pitch.js";
import { readWav, type AudioClip } from "./wav.js";

export type ExportKind = "features" | "pitch" | "phones";

export interface ExportOptions {
  model?: string;
  pitch?: PitchOptions;
}

const EXTENSIONS: Record<ExportKind, string> = {
  features: ".ispf",
  pitch: ".pitch.csv",
  phones: ".phones.csv",
};

function stem(path: string): string {
  return basename(path).replace(/\.[^.]+$/, "");
}

export function outputPath(kind: ExportKind, inputPath: string, outDir: string): string {
  return join(outDir, stem(inputPath) + EXTENSIONS[kind]);
}

function loadClip(path: string): AudioClip {
  return readWav(readFileSync(path));
}

/** Run one export job; returns the written file paths in input order. */
export function runExport(
  kind: ExportKind,
  inputPaths: string[],
  outDir: string,
  options: ExportOptions = {},
): string[] {
  if (inputPaths.length === 0) {
    throw new Error("no input files");
  }
  mkdirSync(outDir, { recursive: true });
  const model = kind === "features" ? loadFeatureModel(options.model ?? "spectral") : null;

  const written: string[] = [];
  for (const inputPath of inputPaths) {
    const clip = loadClip(inputPath);
    const outPath = outputPath(kind, inputPath, outDir);
    if (kind === "features") {
      writeFileSync(outPath, writeIspf(model!.embed(clip)));
    } else if (kind === "pitch") {
      writeFileSync(outPath, formatPitchCsv(estimatePitch(clip, options.pitch)));
    } else {
      writeFileSync(outPath, formatPhonesCsv(recognizePhones(clip)));
    }
    written.push(outPath);
  }
  return written;
}
