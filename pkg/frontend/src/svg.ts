/**
 * Minimal SVG assembly: a data-to-view transform plus element helpers.
 *
 * Rendering is a pure function of its inputs; no timestamps, randomness, or
 * host details enter the output, so identical artifacts yield identical
 * bytes.
 */

export interface ViewBox {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export class Frame {
  readonly width: number;
  readonly height: number;
  readonly margin: number;
  private readonly scale: number;
  private readonly xOffset: number;
  private readonly yOffset: number;
  readonly view: ViewBox;

  constructor(view: ViewBox, width = 640, height = 560, margin = 56) {
    this.view = view;
    this.width = width;
    this.height = height;
    this.margin = margin;
    const innerW = width - 2 * margin;
    const innerH = height - 2 * margin - 24; // leave room for the caption line
    const sx = innerW / (view.xMax - view.xMin);
    const sy = innerH / (view.yMax - view.yMin);
    this.scale = Math.min(sx, sy);
    const usedW = this.scale * (view.xMax - view.xMin);
    const usedH = this.scale * (view.yMax - view.yMin);
    this.xOffset = margin + (innerW - usedW) / 2;
    this.yOffset = margin + 24 + (innerH - usedH) / 2;
  }

  px(x: number): number {
    return this.xOffset + this.scale * (x - this.view.xMin);
  }

  /** SVG y grows downward; data y grows upward. */
  py(y: number): number {
    return this.yOffset + this.scale * (this.view.yMax - y);
  }
}

const fmt = (v: number): string => {
  const rounded = Math.round(v * 100) / 100;
  return Object.is(rounded, -0) ? "0" : String(rounded);
};

export function segmentsPath(
  frame: Frame,
  segments: { x1: number; y1: number; x2: number; y2: number }[],
): string {
  const parts: string[] = [];
  for (const s of segments) {
    parts.push(
      `M${fmt(frame.px(s.x1))} ${fmt(frame.py(s.y1))}L${fmt(frame.px(s.x2))} ${fmt(frame.py(s.y2))}`,
    );
  }
  return parts.join("");
}

export function contourGroup(
  frame: Frame,
  cls: string,
  color: string,
  dash: string | null,
  levelPaths: string[],
): string {
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  const paths = levelPaths
    .filter((d) => d.length > 0)
    .map((d) => `    <path d="${d}" fill="none" stroke="${color}" stroke-width="1.1"${dashAttr}/>`)
    .join("\n");
  return `  <g class="${cls}">\n${paths}\n  </g>`;
}

export function marker(
  frame: Frame,
  cls: string,
  x: number,
  y: number,
  color: string,
  radius = 5,
): string {
  return (
    `  <circle class="${cls}" cx="${fmt(frame.px(x))}" cy="${fmt(frame.py(y))}" r="${radius}" ` +
    `data-x="${x}" data-y="${y}" fill="${color}" stroke="white" stroke-width="1.2"/>`
  );
}

export function polyline(
  frame: Frame,
  cls: string,
  points: { x: number; y: number }[],
  color: string,
): string {
  const coords = points.map((p) => `${fmt(frame.px(p.x))},${fmt(frame.py(p.y))}`).join(" ");
  return `  <polyline class="${cls}" points="${coords}" fill="none" stroke="${color}" stroke-width="1.6" stroke-dasharray="6 3"/>`;
}

export function caption(frame: Frame, text: string): string {
  return (
    `  <text class="caption" x="${frame.width / 2}" y="${frame.margin - 16}" ` +
    `text-anchor="middle" font-family="sans-serif" font-size="15">${text}</text>`
  );
}

export function legend(frame: Frame, entries: { label: string; color: string; dash: boolean }[]): string {
  const lines = entries.map((e, i) => {
    const y = frame.margin + 6 + 18 * i;
    const dash = e.dash ? ` stroke-dasharray="6 3"` : "";
    return (
      `    <line x1="${frame.width - frame.margin - 120}" y1="${y}" x2="${frame.width - frame.margin - 92}" y2="${y}" stroke="${e.color}" stroke-width="2"${dash}/>` +
      `<text x="${frame.width - frame.margin - 86}" y="${y + 4}" font-family="sans-serif" font-size="12">${e.label}</text>`
    );
  });
  return `  <g class="legend">\n${lines.join("\n")}\n  </g>`;
}

export function frameBox(frame: Frame): string {
  const x0 = frame.px(frame.view.xMin);
  const x1 = frame.px(frame.view.xMax);
  const y0 = frame.py(frame.view.yMin);
  const y1 = frame.py(frame.view.yMax);
  const ticks =
    `    <text x="${fmt(x0)}" y="${fmt(y0 + 16)}" font-family="sans-serif" font-size="11" text-anchor="middle">${fmt(frame.view.xMin)}</text>\n` +
    `    <text x="${fmt(x1)}" y="${fmt(y0 + 16)}" font-family="sans-serif" font-size="11" text-anchor="middle">${fmt(frame.view.xMax)}</text>\n` +
    `    <text x="${fmt(x0 - 8)}" y="${fmt(y0)}" font-family="sans-serif" font-size="11" text-anchor="end">${fmt(frame.view.yMin)}</text>\n` +
    `    <text x="${fmt(x0 - 8)}" y="${fmt(y1 + 4)}" font-family="sans-serif" font-size="11" text-anchor="end">${fmt(frame.view.yMax)}</text>`;
  return (
    `  <g class="frame">\n    <rect x="${fmt(x0)}" y="${fmt(y1)}" width="${fmt(x1 - x0)}" height="${fmt(y0 - y1)}" ` +
    `fill="none" stroke="#444" stroke-width="1"/>\n${ticks}\n  </g>`
  );
}

export function document(frame: Frame, body: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" ` +
    `viewBox="0 0 ${frame.width} ${frame.height}">\n` +
    `  <rect width="${frame.width}" height="${frame.height}" fill="white"/>\n` +
    body.join("\n") +
    `\n</svg>\n`
  );
}
