/**
 * Headless render harness: load a poster document, size the viewport to
 * the .poster container, screenshot it, and emit the geometry dump.
 *
 * Exit codes: 0 ok, 3 no poster container, 4 timeout, 5 navigation error.
 */
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import puppeteer, { Browser } from "puppeteer-core";

import { findChrome } from "./chrome.js";
import { extractGeometry, GeometryDump } from "./extract.js";

export const EXIT_OK = 0;
export const EXIT_NO_POSTER = 3;
export const EXIT_TIMEOUT = 4;
export const EXIT_NAVIGATION = 5;

export interface RenderOptions {
  htmlPath: string;
  pngOut: string;
  geometryOut: string;
  allowNetwork?: boolean;
  timeoutMs?: number;
  chromePath?: string;
}

export class HarnessError extends Error {
  constructor(message: string, public exitCode: number) {
    super(message);
  }
}

export async function renderAndDump(opts: RenderOptions): Promise<GeometryDump> {
  const chrome = findChrome(opts.chromePath);
  if (!chrome) {
    throw new HarnessError(
      "no Chrome/Chromium executable found (set POSTERML_CHROME or --chrome-path)",
      EXIT_NAVIGATION,
    );
  }
  const timeout = opts.timeoutMs ?? 30000;
  let browser: Browser | null = null;
  try {
    browser = await puppeteer.launch({
      executablePath: chrome,
      headless: true,
      args: [
        "--no-sandbox",
        "--disable-dev-shm-usage",
        "--force-device-scale-factor=1",
        "--hide-scrollbars",
        "--disable-gpu",
      ],
    });
    const page = await browser.newPage();
    await page.setViewport({ width: 1280, height: 1024, deviceScaleFactor: 1 });

    if (!opts.allowNetwork) {
      await page.setRequestInterception(true);
      page.on("request", (request) => {
        const url = request.url();
        if (url.startsWith("file://") || url.startsWith("data:") || url.startsWith("about:")) {
          void request.continue();
        } else {
          void request.abort();
        }
      });
    }

    try {
      await page.goto(pathToFileURL(opts.htmlPath).href, {
        waitUntil: "load",
        timeout,
      });
    } catch (err: any) {
      if (err && err.name === "TimeoutError") {
        throw new HarnessError(`navigation timed out after ${timeout}ms`, EXIT_TIMEOUT);
      }
      throw new HarnessError(`navigation failed: ${err}`, EXIT_NAVIGATION);
    }

    // settle fonts and images so rects are final
    await page.evaluate(async () => {
      const anyDoc = document as any;
      if (anyDoc.fonts && anyDoc.fonts.ready) {
        await anyDoc.fonts.ready;
      }
      const images = Array.from(document.images);
      await Promise.all(
        images.map((img) =>
          img.complete
            ? Promise.resolve()
            : new Promise((resolve) => {
                img.addEventListener("load", resolve, { once: true });
                img.addEventListener("error", resolve, { once: true });
              }),
        ),
      );
    });

    const posterBox = await page.evaluate(() => {
      const poster = document.querySelector(".poster");
      if (!poster) return null;
      const rect = poster.getBoundingClientRect();
      return { x: rect.x, y: rect.y, width: rect.width, height: rect.height };
    });
    if (!posterBox) {
      throw new HarnessError('no element with class "poster"', EXIT_NO_POSTER);
    }

    const width = Math.max(1, Math.round(posterBox.width));
    const height = Math.max(1, Math.round(posterBox.height));
    await page.setViewport({
      width: Math.max(width, Math.ceil(posterBox.x + width)),
      height: Math.max(height, Math.ceil(posterBox.y + height)),
      deviceScaleFactor: 1,
    });

    // ship the extractor source into the page; it is self-contained by design
    const dump = (await page.evaluate((source: string) => {
      const fn = new Function(`return (${source})`)();
      return fn(window);
    }, extractGeometry.toString())) as GeometryDump | null;
    if (!dump) {
      throw new HarnessError('no element with class "poster"', EXIT_NO_POSTER);
    }

    await page.screenshot({
      path: opts.pngOut as `${string}.png`,
      clip: {
        x: Math.round(posterBox.x),
        y: Math.round(posterBox.y),
        width: dump.canvas.width,
        height: dump.canvas.height,
      },
    });
    writeFileSync(opts.geometryOut, JSON.stringify(dump, null, 2));
    return dump;
  } finally {
    if (browser) {
      await browser.close();
    }
  }
}
