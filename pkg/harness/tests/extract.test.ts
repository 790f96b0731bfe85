/**
 * Unit tests for the in-page extractor against a hand-rolled DOM stub.
 * Rect values are preset on stub nodes, so the geometry/kind/translation
 * logic is verified without a browser.
 */
import { describe, expect, it } from "vitest";

import { extractGeometry, WindowLike } from "../src/extract.js";

interface StubRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

class StubText {
  nodeType = 3;
  parentElement: StubElement | null = null;
  constructor(public nodeValue: string, public rects: StubRect[] = []) {}
}

class StubElement {
  id = "";
  children: StubElement[] = [];
  childNodes: (StubElement | StubText)[] = [];
  style: Record<string, string> = {};
  rect: StubRect = { x: 0, y: 0, width: 0, height: 0 };
  constructor(public tagName: string) {}

  get childElementCount(): number {
    return this.children.length;
  }

  get textContent(): string {
    let out = "";
    for (const node of this.childNodes) {
      out += node instanceof StubText ? node.nodeValue : node.textContent;
    }
    return out;
  }

  getBoundingClientRect(): StubRect {
    return this.rect;
  }

  append(...nodes: (StubElement | StubText)[]): void {
    for (const node of nodes) {
      this.childNodes.push(node);
      if (node instanceof StubElement) this.children.push(node);
      else node.parentElement = this;
    }
  }

  querySelectorAll(sel: string): StubElement[] {
    if (sel !== "*") throw new Error("stub supports only *");
    const out: StubElement[] = [];
    const walk = (el: StubElement) => {
      for (const child of el.children) {
        out.push(child);
        walk(child);
      }
    };
    walk(this);
    return out;
  }
}

const DEFAULT_STYLE = {
  backgroundColor: "rgba(0, 0, 0, 0)",
  backgroundImage: "none",
  borderTopWidth: "0px",
  opacity: "1",
  zIndex: "auto",
  transform: "none",
  display: "block",
};

function makeWindow(poster: StubElement): WindowLike {
  const textNodes = (root: StubElement): StubText[] => {
    const out: StubText[] = [];
    const walk = (el: StubElement) => {
      for (const node of el.childNodes) {
        if (node instanceof StubText) out.push(node);
        else walk(node);
      }
    };
    walk(root);
    return out;
  };
  return {
    document: {
      querySelector: (sel: string) => (sel === ".poster" ? poster : null),
      createTreeWalker: (root: StubElement) => {
        const nodes = textNodes(root);
        let i = -1;
        return {
          nextNode: () => {
            i += 1;
            return i < nodes.length ? nodes[i] : null;
          },
        };
      },
      createRange: () => {
        let target: StubText | null = null;
        return {
          selectNodeContents: (node: StubText) => {
            target = node;
          },
          getClientRects: () => (target ? target.rects : []),
        };
      },
    },
    getComputedStyle: (el: StubElement) => ({ ...DEFAULT_STYLE, ...el.style }),
  };
}

function poster400(): StubElement {
  const poster = new StubElement("div");
  poster.rect = { x: 8, y: 8, width: 400, height: 400 };
  return poster;
}

describe("extractGeometry", () => {
  it("returns null without a poster container", () => {
    const win = makeWindow(poster400());
    (win.document as any).querySelector = () => null;
    expect(extractGeometry(win)).toBeNull();
  });

  it("translates boxes to poster-local coordinates", () => {
    const poster = poster400();
    const box = new StubElement("div");
    box.id = "box";
    box.rect = { x: 18, y: 28, width: 100, height: 50 };
    box.style.backgroundColor = "rgb(51, 102, 153)";
    poster.append(box);

    const dump = extractGeometry(makeWindow(poster))!;
    expect(dump.canvas).toEqual({ width: 400, height: 400 });
    expect(dump.elements).toHaveLength(1);
    const el = dump.elements[0];
    expect(el.id).toBe("box");
    expect(el.kind).toBe("shape");
    expect(el.bbox).toEqual({ x: 10, y: 20, w: 100, h: 50 });
  });

  it("classifies kinds like the offline parser", () => {
    const poster = poster400();

    const img = new StubElement("img");
    img.rect = { x: 8, y: 8, width: 50, height: 50 };
    const bgDiv = new StubElement("div");
    bgDiv.style.backgroundImage = "url(layer.png)";
    const text = new StubElement("div");
    text.append(new StubText("HELLO", [{ x: 8, y: 108, width: 60, height: 20 }]));
    text.rect = { x: 8, y: 108, width: 60, height: 20 };
    const wrapper = new StubElement("div");
    const inner = new StubElement("div");
    inner.style.backgroundColor = "red";
    wrapper.append(inner);
    const empty = new StubElement("div");
    poster.append(img, bgDiv, text, wrapper, empty);

    const dump = extractGeometry(makeWindow(poster))!;
    const kinds = dump.elements.map((e) => e.kind);
    expect(kinds).toEqual(["image", "image", "text", "container", "shape", "container"]);
    const textEl = dump.elements[2];
    expect(textEl.text).toBe("HELLO");
  });

  it("extracts rotation from the computed matrix", () => {
    const poster = poster400();
    const rotated = new StubElement("div");
    rotated.style.backgroundColor = "red";
    // rotate(90deg) => matrix(0, 1, -1, 0, 0, 0)
    rotated.style.transform = "matrix(0, 1, -1, 0, 0, 0)";
    poster.append(rotated);
    const dump = extractGeometry(makeWindow(poster))!;
    expect(dump.elements[0].angle).toBeCloseTo(90, 9);
  });

  it("collects wrapped text nodes with one entry and two rects", () => {
    const poster = poster400();
    const caption = new StubElement("div");
    caption.append(
      new StubText("wrapping caption text", [
        { x: 28, y: 48, width: 110, height: 28 },
        { x: 28, y: 76, width: 70, height: 28 },
      ]),
    );
    caption.rect = { x: 28, y: 48, width: 120, height: 56 };
    poster.append(caption);

    const dump = extractGeometry(makeWindow(poster))!;
    expect(dump.text_nodes).toHaveLength(1);
    expect(dump.text_nodes[0].text).toBe("wrapping caption text");
    expect(dump.text_nodes[0].rects).toEqual([
      { x: 20, y: 40, w: 110, h: 28 },
      { x: 20, y: 68, w: 70, h: 28 },
    ]);
  });

  it("skips whitespace-only text nodes and display:none elements", () => {
    const poster = poster400();
    const hidden = new StubElement("div");
    hidden.style.display = "none";
    hidden.style.backgroundColor = "red";
    const spacer = new StubElement("div");
    spacer.append(new StubText("   \n  ", [{ x: 0, y: 0, width: 5, height: 5 }]));
    poster.append(hidden, spacer);

    const dump = extractGeometry(makeWindow(poster))!;
    expect(dump.elements.map((e) => e.id)).toEqual(["div-1"]);
    expect(dump.text_nodes).toHaveLength(0);
  });

  it("keeps ids unique when the markup repeats them", () => {
    const poster = poster400();
    const a = new StubElement("div");
    a.id = "dup";
    a.style.backgroundColor = "red";
    const b = new StubElement("div");
    b.id = "dup";
    b.style.backgroundColor = "blue";
    poster.append(a, b);
    const dump = extractGeometry(makeWindow(poster))!;
    const ids = dump.elements.map((e) => e.id);
    expect(new Set(ids).size).toBe(2);
    expect(ids[0]).toBe("dup");
  });

  it("clamps opacity and defaults non-numeric z-index", () => {
    const poster = poster400();
    const el = new StubElement("div");
    el.style.backgroundColor = "red";
    el.style.opacity = "0.5";
    el.style.zIndex = "3";
    poster.append(el);
    const dump = extractGeometry(makeWindow(poster))!;
    expect(dump.elements[0].opacity).toBe(0.5);
    expect(dump.elements[0].z).toBe(3);
  });

  it("is source-serializable for page.evaluate", () => {
    const source = extractGeometry.toString();
    expect(source.startsWith("function")).toBe(true);
    // eslint-disable-next-line no-new-func
    const rebuilt = new Function(`return (${source})`)();
    const poster = poster400();
    const box = new StubElement("div");
    box.style.backgroundColor = "red";
    box.rect = { x: 8, y: 8, width: 10, height: 10 };
    poster.append(box);
    const dump = rebuilt(makeWindow(poster));
    expect(dump.elements).toHaveLength(1);
  });
});
