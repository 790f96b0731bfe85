/** Locate a Chrome/Chromium executable without downloading one. */
import { accessSync, constants } from "node:fs";

const CANDIDATES = [
  "/usr/bin/google-chrome-stable",
  "/usr/bin/google-chrome",
  "/usr/bin/chromium-browser",
  "/usr/bin/chromium",
  "/snap/bin/chromium",
  "/opt/google/chrome/chrome",
  "/Applications/Google Chrome.app/Contents/MacOS/Google Chrome",
];

export function findChrome(explicit?: string): string | null {
  const ordered = [
    explicit,
    process.env.POSTERML_CHROME,
    process.env.CHROME_PATH,
    ...CANDIDATES,
  ];
  for (const candidate of ordered) {
    if (!candidate) continue;
    try {
      accessSync(candidate, constants.X_OK);
      return candidate;
    } catch {
      /* keep looking */
    }
  }
  return null;
}
