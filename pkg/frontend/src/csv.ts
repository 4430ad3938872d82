/** CSV serialization for the pitch and phone alignment interchange files. */

import type { PhoneRow } from "./phones.js";
import type { PitchFrame } from "./pitch.js";

export const PITCH_HEADER = "time_s,f0_hz,confidence,energy_db";
export const PHONES_HEADER = "start_s,end_s,phone";

/**
 * Pitch rows as CSV. Times are multiples of the hop printed with enough
 * digits that the reader can re-derive a uniform grid; an unvoiced frame
 * leaves the f0 field empty.
 */
export function formatPitchCsv(rows: PitchFrame[]): string {
  const lines = [PITCH_HEADER];
  for (const row of rows) {
    const f0 = row.f0Hz > 0 ? row.f0Hz.toFixed(3) : "";
    lines.push(
      `${row.timeS.toFixed(5)},${f0},${row.confidence.toFixed(4)},${row.energyDb.toFixed(2)}`,
    );
  }
  return lines.join("\n") + "\n";
}

export function formatPhonesCsv(rows: PhoneRow[]): string {
  const lines = [PHONES_HEADER];
  for (const row of rows) {
    if (!row.phone) throw new Error("phone symbol must be non-empty");
    if (row.endS < row.startS) throw new Error("phone interval ends before it starts");
    lines.push(`${row.startS.toFixed(3)},${row.endS.toFixed(3)},${row.phone}`);
  }
  return lines.join("\n") + "\n";
}
