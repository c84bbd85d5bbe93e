#!/usr/bin/env node
/** CLI: figures --in <aggregate csv> --out-dir <dir> [--error-bars] */

import { renderEeFigure, renderSeFigure } from "./figures.js";

function usage(): never {
  console.error("usage: figures --in <csv> --out-dir <dir> [--error-bars] [--schemes a,b,c]");
  process.exit(2);
}

export function main(argv: string[]): number {
  let input: string | undefined;
  let outDir: string | undefined;
  let errorBars = false;
  let schemes: string[] | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--in":
        input = argv[++i];
        break;
      case "--out-dir":
        outDir = argv[++i];
        break;
      case "--error-bars":
        errorBars = true;
        break;
      case "--schemes":
        schemes = (argv[++i] ?? "").split(",").filter((s) => s.length > 0);
        break;
      default:
        usage();
    }
  }
  if (!input || !outDir) {
    usage();
  }
  const spec = { inputPath: input, outDir, errorBars, schemes };
  const sePath = renderSeFigure(spec);
  const eePath = renderEeFigure(spec);
  console.log(`wrote ${sePath}`);
  console.log(`wrote ${eePath}`);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  }
}
