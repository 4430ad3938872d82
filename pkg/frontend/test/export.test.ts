import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { readIspf } from "../src/ispf.js";
import { outputPath, runExport } from "../src/export.js";
import { writeWavPcm16 } from "../src/wav.js";
import { bursts, tone } from "./helpers.js";

let dir: string;

beforeEach(() => {
  dir = mkdtempSync(join(tmpdir(), "ispa-export-"));
});

afterEach(() => {
  rmSync(dir, { recursive: true, force: true });
});

function writeFixture(name: string, clip = tone(700, 2.0)): string {
  const path = join(dir, name);
  writeFileSync(path, writeWavPcm16(clip));
  return path;
}

describe("outputPath", () => {
  it("keeps the basename and swaps the extension", () => {
    expect(outputPath("features", "/x/y/clip.wav", "/out")).toBe("/out/clip.ispf");
    expect(outputPath("pitch", "clip.wav", "/out")).toBe("/out/clip.pitch.csv");
    expect(outputPath("phones", "a/b.wav", "/out")).toBe("/out/b.phones.csv");
  });
});

describe("runExport", () => {
  it("writes one ISPF per input with the embedder contract", () => {
    const inputs = [writeFixture("a.wav", tone(500, 1.0)), writeFixture("b.wav", tone(900, 1.0))];
    const out = join(dir, "out");
    const written = runExport("features", inputs, out);
    expect(written).toEqual([join(out, "a.ispf"), join(out, "b.ispf")]);
    for (const path of written) {
      const data = readIspf(readFileSync(path));
      expect(data.dim).toBe(768);
      expect(data.hopSeconds).toBe(0.02);
      expect(data.values.length / data.dim).toBe(50);
    }
  });

  it("writes a parseable pitch CSV with accurate f0", () => {
    const [path] = runExport("pitch", [writeFixture("tone700.wav")], dir);
    const lines = readFileSync(path, "utf8").trimEnd().split("\n");
    expect(lines[0]).toBe("time_s,f0_hz,confidence,energy_db");
    const f0s = lines
      .slice(1)
      .map((l) => Number(l.split(",")[1] || 0))
      .filter((v) => v > 0)
      .sort((a, b) => a - b);
    expect(f0s.length).toBeGreaterThan(30);
    const median = f0s[Math.floor(f0s.length / 2)];
    expect(Math.abs(median - 700) / 700).toBeLessThan(0.02);
  });

  it("writes phone rows for burst audio", () => {
    const [path] = runExport("phones", [writeFixture("call.wav", bursts(1.5))], dir);
    const lines = readFileSync(path, "utf8").trimEnd().split("\n");
    expect(lines[0]).toBe("start_s,end_s,phone");
    expect(lines.length).toBeGreaterThan(2);
  });

  it("rejects an empty input list", () => {
    expect(() => runExport("pitch", [], dir)).toThrow(/no input files/);
  });

  it("propagates model load failures", () => {
    const input = writeFixture("c.wav", tone(500, 0.5));
    expect(() => runExport("features", [input], dir, { model: "aves" })).toThrow(
      /model load failure/,
    );
  });
});
