/**
 * Phone alignment export: time-sorted, non-overlapping (start, end, phone)
 * rows with X-SAMPA symbols.
 *
 * The built-in recognizer is a coarse acoustic stand-in: active regions are
 * found by an energy gate and split where the spectral centroid changes
 * register, then each piece is labeled from a small X-SAMPA inventory. A
 * real phone recognizer plugs in upstream; its IPA output can be converted
 * with ipaToXsampa before writing.
 */

import { frameEnergyDb, frameSignal, nextPowerOfTwo, spectralCentroid } from "./dsp.js";
import type { AudioClip } from "./wav.js";

export interface PhoneRow {
  startS: number;
  endS: number;
  phone: string;
}

const HOP_SECONDS = 0.01;
const WIN_SECONDS = 0.025;
const GATE_DB = -45;
const MIN_DURATION_S = 0.03;

/** Centroid registers for the stand-in labels, low to high. */
const REGISTERS: Array<{ upToHz: number; phone: string }> = [
  { upToHz: 700, phone: "u" },
  { upToHz: 1500, phone: "a" },
  { upToHz: 3000, phone: "i" },
  { upToHz: Infinity, phone: "s" },
];

function registerOf(centroidHz: number): string {
  for (const { upToHz, phone } of REGISTERS) {
    if (centroidHz < upToHz) return phone;
  }
  return REGISTERS[REGISTERS.length - 1].phone;
}

export function recognizePhones(clip: AudioClip): PhoneRow[] {
  const energy = frameEnergyDb(clip.samples, clip.sampleRate, HOP_SECONDS, WIN_SECONDS);
  const frames = frameSignal(clip.samples, clip.sampleRate, HOP_SECONDS, WIN_SECONDS);
  const nFft = nextPowerOfTwo(Math.max(frames[0].length, 256));

  const labels: Array<string | null> = frames.map((frame, i) =>
    energy[i] > GATE_DB ? registerOf(spectralCentroid(frame, nFft, clip.sampleRate)) : null,
  );

  const rows: PhoneRow[] = [];
  let runStart = -1;
  let runLabel: string | null = null;
  const flush = (endFrame: number) => {
    if (runLabel === null || runStart < 0) return;
    const startS = runStart * HOP_SECONDS;
    const endS = endFrame * HOP_SECONDS;
    if (endS - startS >= MIN_DURATION_S) {
      rows.push({ startS, endS, phone: runLabel });
    }
  };
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] !== runLabel) {
      flush(i);
      runLabel = labels[i];
      runStart = i;
    }
  }
  flush(labels.length);
  return rows;
}

/** IPA glyph to X-SAMPA mapping for the symbols common in recognizer output. */
const IPA_TO_XSAMPA: Record<string, string> = {
  "ɑ": "A", "æ": "{", "ɐ": "6", "ə": "@", "ɚ": "@`", "ɛ": "E", "ɜ": "3",
  "ɪ": "I", "ɨ": "1", "ɔ": "O", "ø": "2", "œ": "9", "ʊ": "U", "ʉ": "}",
  "ʌ": "V", "ɯ": "M", "ɒ": "Q", "ɤ": "7", "ŋ": "N", "ɲ": "J", "ɳ": "n`",
  "ɴ": "N\\", "ʃ": "S", "ʒ": "Z", "θ": "T", "ð": "D", "ɸ": "p\\",
  "β": "B", "ç": "C", "ʝ": "j\\", "ɣ": "G", "χ": "X", "ʁ": "R",
  "ħ": "X\\", "ʕ": "?\\", "ʔ": "?", "ɦ": "h\\", "ɹ": "r\\", "ɾ": "4",
  "ʀ": "R\\", "ɭ": "l`", "ʎ": "L", "ʟ": "L\\", "ɫ": "5", "ɥ": "H",
  "ʍ": "W", "ɟ": "J\\", "ɢ": "G\\", "ɖ": "d`", "ʈ": "t`", "ɽ": "r`",
  "ʂ": "s`", "ʐ": "z`", "ɡ": "g", "ː": ":", "ˈ": '"', "ˌ": "%",
  "ʲ": "'", "̃": "~",
};

/**
 * Convert an IPA phone symbol to X-SAMPA. ASCII characters pass through;
 * unknown non-ASCII glyphs are an error so silent corruption cannot reach
 * the alignment files.
 */
export function ipaToXsampa(symbol: string): string {
  let out = "";
  for (const glyph of symbol) {
    if (glyph.charCodeAt(0) < 128) {
      out += glyph;
    } else if (glyph in IPA_TO_XSAMPA) {
      out += IPA_TO_XSAMPA[glyph];
    } else {
      throw new Error(`no X-SAMPA mapping for IPA glyph '${glyph}' (U+${glyph.codePointAt(0)!.toString(16).toUpperCase()})`);
    }
  }
  return out;
}
