/**
 * In-page geometry extraction.
 *
 * `extractGeometry` runs inside the browser via page.evaluate, so it must
 * be fully self-contained: no imports, no outer-scope references. It takes
 * the window-like root as a parameter, which also makes it unit-testable
 * against a DOM stub.
 */

export interface RectDump {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface ElementDump {
  id: string;
  kind: "text" | "image" | "shape" | "container";
  bbox: RectDump;
  z: number;
  opacity: number;
  angle: number;
  text: string | null;
}

export interface TextNodeDump {
  text: string;
  rects: RectDump[];
}

export interface GeometryDump {
  canvas: { width: number; height: number };
  elements: ElementDump[];
  text_nodes: TextNodeDump[];
}

/** Minimal slice of the DOM the extractor touches (stubbed in tests). */
export interface WindowLike {
  document: {
    querySelector(sel: string): any;
    createTreeWalker(root: any, whatToShow: number): { nextNode(): any };
    createRange(): { selectNodeContents(node: any): void; getClientRects(): ArrayLike<any> };
  };
  getComputedStyle(el: any): any;
}

export function extractGeometry(win: WindowLike): GeometryDump | null {
  const SHOW_TEXT = 0x4;
  const doc = win.document;
  const poster = doc.querySelector(".poster");
  if (!poster) return null;

  const posterRect = poster.getBoundingClientRect();
  const originX = posterRect.x !== undefined ? posterRect.x : posterRect.left;
  const originY = posterRect.y !== undefined ? posterRect.y : posterRect.top;
  // integer canvas so the screenshot clip can match it exactly
  const canvasW = Math.max(1, Math.round(posterRect.width));
  const canvasH = Math.max(1, Math.round(posterRect.height));

  function toLocal(rect: any) {
    const rx = rect.x !== undefined ? rect.x : rect.left;
    const ry = rect.y !== undefined ? rect.y : rect.top;
    return { x: rx - originX, y: ry - originY, w: rect.width, h: rect.height };
  }

  function rotationDeg(transform: string): number {
    if (!transform || transform === "none") return 0;
    const m = /matrix\(\s*([-\d.e]+)\s*,\s*([-\d.e]+)/.exec(transform);
    if (!m) return 0;
    const a = parseFloat(m[1]);
    const b = parseFloat(m[2]);
    const deg = (Math.atan2(b, a) * 180) / Math.PI;
    return Math.abs(deg) < 1e-9 ? 0 : deg;
  }

  function onlyTextChildren(el: any): boolean {
    if (el.childElementCount !== undefined ? el.childElementCount > 0 : el.children.length > 0) {
      return false;
    }
    const text = el.textContent || "";
    return text.trim().length > 0;
  }

  function visibleDecoration(style: any): boolean {
    const bg = style.backgroundColor || "";
    const paintedBg =
      bg !== "" && bg !== "transparent" && bg !== "rgba(0, 0, 0, 0)";
    const bw = parseFloat(style.borderTopWidth || "0") || 0;
    return paintedBg || bw > 0;
  }

  function classify(el: any, style: any): "text" | "image" | "shape" | "container" {
    const tag = String(el.tagName || "").toLowerCase();
    const bgImage = style.backgroundImage || "none";
    if (tag === "img" || bgImage !== "none") return "image";
    if (onlyTextChildren(el)) return "text";
    const childCount =
      el.childElementCount !== undefined ? el.childElementCount : el.children.length;
    if (childCount > 0) return "container";
    if (visibleDecoration(style)) return "shape";
    return "container";
  }

  const elements: ElementDump[] = [];
  const usedIds: Record<string, boolean> = {};
  const all = poster.querySelectorAll("*");
  for (let i = 0; i < all.length; i++) {
    const el = all[i];
    const tag = String(el.tagName || "").toLowerCase();
    if (tag === "style" || tag === "script" || tag === "link" || tag === "meta") continue;
    const style = win.getComputedStyle(el);
    if (style.display === "none") continue;
    const kind = classify(el, style);
    let id = el.id && !usedIds[el.id] ? el.id : `${tag}-${i}`;
    while (usedIds[id]) id = id + "x";
    usedIds[id] = true;
    const box = toLocal(el.getBoundingClientRect());
    let opacity = parseFloat(style.opacity);
    if (!isFinite(opacity)) opacity = 1;
    opacity = Math.min(1, Math.max(0, opacity));
    let z = parseInt(style.zIndex, 10);
    if (!isFinite(z)) z = 0;
    elements.push({
      id,
      kind,
      bbox: box,
      z,
      opacity,
      angle: rotationDeg(style.transform),
      text: kind === "text" ? (el.textContent || "").trim() : null,
    });
  }

  const textNodes: TextNodeDump[] = [];
  const walker = doc.createTreeWalker(poster, SHOW_TEXT);
  let node = walker.nextNode();
  while (node) {
    const value = node.nodeValue !== undefined && node.nodeValue !== null
      ? node.nodeValue
      : node.textContent || "";
    if (value.trim().length > 0) {
      const parentTag = node.parentElement
        ? String(node.parentElement.tagName || "").toLowerCase()
        : "";
      if (parentTag !== "style" && parentTag !== "script" && parentTag !== "title") {
        const range = doc.createRange();
        range.selectNodeContents(node);
        const rects = range.getClientRects();
        const local: RectDump[] = [];
        for (let r = 0; r < rects.length; r++) {
          const rect = toLocal(rects[r]);
          if (rect.w > 0 && rect.h > 0) local.push(rect);
        }
        if (local.length > 0) {
          textNodes.push({ text: value.trim(), rects: local });
        }
      }
    }
    node = walker.nextNode();
  }

  return {
    canvas: { width: canvasW, height: canvasH },
    elements,
    text_nodes: textNodes,
  };
}
