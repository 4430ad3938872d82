#!/usr/bin/env node
/**
 * ispa-export <features|pitch|phones> [options] input.wav [input2.wav ...]
 *
 *   --out <dir>     output directory (default .)
 *   --model <name>  feature embedder (features only; default "spectral")
 *   --hop <s>       hop override in seconds (pitch only)
 */

import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { runExport, type ExportKind } from "./export.js";

const KINDS: ExportKind[] = ["features", "pitch", "phones"];

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string", default: "." },
        model: { type: "string" },
        hop: { type: "string" },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    process.stderr.write(`ispa-export: ${(err as Error).message}\n`);
    return 2;
  }
  const { values, positionals } = parsed;
  if (values.help) {
    process.stdout.write(
      "usage: ispa-export <features|pitch|phones> [--out dir] [--model name] [--hop s] input.wav...\n",
    );
    return 0;
  }
  const [command, ...inputs] = positionals;
  if (!KINDS.includes(command as ExportKind)) {
    process.stderr.write(`ispa-export: expected one of ${KINDS.join(", ")}, got '${command ?? ""}'\n`);
    return 2;
  }
  if (inputs.length === 0) {
    process.stderr.write("ispa-export: no input files\n");
    return 2;
  }
  if (values.model !== undefined && command !== "features") {
    process.stderr.write("ispa-export: --model only applies to the features command\n");
    return 2;
  }
  if (values.hop !== undefined && command !== "pitch") {
    process.stderr.write("ispa-export: --hop only applies to the pitch command\n");
    return 2;
  }

  try {
    const written = runExport(command as ExportKind, inputs, values.out!, {
      model: values.model,
      pitch: values.hop !== undefined ? { hopSeconds: Number(values.hop) } : undefined,
    });
    for (const path of written) process.stdout.write(path + "\n");
    return 0;
  } catch (err) {
    process.stderr.write(`ispa-export: error: ${(err as Error).message}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exitCode = main(process.argv.slice(2));
}
