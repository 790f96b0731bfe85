#!/usr/bin/env node
/** CLI: harness render --html in.html --png out.png --geometry out.json */
import { parseArgs } from "node:util";

import { HarnessError, renderAndDump } from "./harness.js";

function usage(): void {
  console.error(
    "usage: harness render --html <file> --png <out> --geometry <out> " +
      "[--allow-network] [--timeout <ms>] [--chrome-path <bin>]",
  );
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (command !== "render") {
    usage();
    return 2;
  }
  let parsed;
  try {
    parsed = parseArgs({
      args: rest,
      options: {
        html: { type: "string" },
        png: { type: "string" },
        geometry: { type: "string" },
        "allow-network": { type: "boolean", default: false },
        timeout: { type: "string" },
        "chrome-path": { type: "string" },
      },
    });
  } catch (err) {
    console.error(String(err));
    usage();
    return 2;
  }
  const { values } = parsed;
  if (!values.html || !values.png || !values.geometry) {
    usage();
    return 2;
  }
  try {
    const dump = await renderAndDump({
      htmlPath: values.html,
      pngOut: values.png,
      geometryOut: values.geometry,
      allowNetwork: values["allow-network"],
      timeoutMs: values.timeout ? parseInt(values.timeout, 10) : undefined,
      chromePath: values["chrome-path"],
    });
    console.log(
      `rendered ${values.html}: canvas ${dump.canvas.width}x${dump.canvas.height}, ` +
        `${dump.elements.length} elements, ${dump.text_nodes.length} text nodes`,
    );
    return 0;
  } catch (err) {
    if (err instanceof HarnessError) {
      console.error(err.message);
      return err.exitCode;
    }
    console.error(String(err));
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
