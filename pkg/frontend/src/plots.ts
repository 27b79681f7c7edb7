/** Client-side SVG plot rendering from raw data payloads.
 *
 * The service ships numbers, never pixels; every plot is drawn here as a
 * plain black-on-white SVG string so rendering stays a pure function of the
 * payload.
 */

import type { BoxGroupJson, PlotJson } from "./types.js";
import { escapeHtml } from "./escape.js";

const WIDTH = 440;
const HEIGHT = 300;
const MARGIN = { top: 14, right: 14, bottom: 46, left: 56 };

interface Scale {
  lo: number;
  hi: number;
  toPx(v: number): number;
}

function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  if (!(hi > lo)) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  const dLo = lo - pad;
  const dHi = hi + pad;
  return {
    lo: dLo,
    hi: dHi,
    toPx: (v) => pxLo + ((v - dLo) / (dHi - dLo)) * (pxHi - pxLo),
  };
}

function fmtTick(v: number): string {
  return String(Number(v.toPrecision(3)));
}

function ticks(scale: Scale, count = 4): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    out.push(scale.lo + ((scale.hi - scale.lo) * i) / (count - 1));
  }
  return out;
}

function axisFrame(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const parts: string[] = [
    `<line x1="${left}" y1="${bottom}" x2="${right}" y2="${bottom}" stroke="#000"/>`,
    `<line x1="${left}" y1="${top}" x2="${left}" y2="${bottom}" stroke="#000"/>`,
  ];
  for (const t of ticks(x)) {
    const px = x.toPx(t).toFixed(1);
    parts.push(`<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 4}" stroke="#000"/>`);
    parts.push(
      `<text x="${px}" y="${bottom + 16}" text-anchor="middle" font-size="10">${fmtTick(t)}</text>`,
    );
  }
  for (const t of ticks(y)) {
    const py = y.toPx(t).toFixed(1);
    parts.push(`<line x1="${left - 4}" y1="${py}" x2="${left}" y2="${py}" stroke="#000"/>`);
    parts.push(
      `<text x="${left - 7}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="10">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(left + right) / 2}" y="${HEIGHT - 8}" text-anchor="middle" font-size="11">${escapeHtml(xLabel)}</text>`,
    `<text x="14" y="${(top + bottom) / 2}" text-anchor="middle" font-size="11" transform="rotate(-90 14 ${(top + bottom) / 2})">${escapeHtml(yLabel)}</text>`,
  );
  return parts.join("");
}

function svgOpen(label: string): string {
  return (
    `<svg role="img" aria-label="${escapeHtml(label)}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `width="${WIDTH}" height="${HEIGHT}" xmlns="http://www.w3.org/2000/svg" ` +
    `style="background:#fff">`
  );
}

/** Scatter plot: one black dot per [x, y] pair. */
export function scatterSvg(plot: PlotJson): string {
  const points = plot.points ?? [];
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const x = linearScale(
    Math.min(...xs, Infinity) === Infinity ? 0 : Math.min(...xs),
    Math.max(...xs, -Infinity) === -Infinity ? 1 : Math.max(...xs),
    MARGIN.left,
    WIDTH - MARGIN.right,
  );
  const y = linearScale(
    Math.min(...ys, Infinity) === Infinity ? 0 : Math.min(...ys),
    Math.max(...ys, -Infinity) === -Infinity ? 1 : Math.max(...ys),
    HEIGHT - MARGIN.bottom,
    MARGIN.top,
  );
  const dots = points
    .map(([px, py]) => `<circle cx="${x.toPx(px).toFixed(1)}" cy="${y.toPx(py).toFixed(1)}" r="2.5" fill="#000"/>`)
    .join("");
  return svgOpen(plot.caption) + axisFrame(x, y, plot.x_column, plot.y_column) + dots + "</svg>";
}

function boxGlyph(g: BoxGroupJson, cx: number, halfW: number, y: Scale): string {
  const yMin = y.toPx(g.min).toFixed(1);
  const yMax = y.toPx(g.max).toFixed(1);
  const yP25 = y.toPx(g.p25);
  const yP75 = y.toPx(g.p75);
  const yMed = y.toPx(g.median).toFixed(1);
  const left = (cx - halfW).toFixed(1);
  const width = (2 * halfW).toFixed(1);
  return [
    `<line x1="${cx}" y1="${yMin}" x2="${cx}" y2="${yMax}" stroke="#000"/>`,
    `<line x1="${(cx - halfW / 2).toFixed(1)}" y1="${yMin}" x2="${(cx + halfW / 2).toFixed(1)}" y2="${yMin}" stroke="#000"/>`,
    `<line x1="${(cx - halfW / 2).toFixed(1)}" y1="${yMax}" x2="${(cx + halfW / 2).toFixed(1)}" y2="${yMax}" stroke="#000"/>`,
    `<rect x="${left}" y="${yP75.toFixed(1)}" width="${width}" height="${(yP25 - yP75).toFixed(1)}" fill="#fff" stroke="#000"/>`,
    `<line x1="${left}" y1="${yMed}" x2="${(cx + halfW).toFixed(1)}" y2="${yMed}" stroke="#000" stroke-width="2"/>`,
  ].join("");
}

/** Box-and-whisker plot: one five-number glyph per group. */
export function boxSvg(plot: PlotJson): string {
  const groups = plot.groups ?? [];
  const lo = groups.length ? Math.min(...groups.map((g) => g.min)) : 0;
  const hi = groups.length ? Math.max(...groups.map((g) => g.max)) : 1;
  const y = linearScale(lo, hi, HEIGHT - MARGIN.bottom, MARGIN.top);
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const band = groups.length ? innerW / groups.length : innerW;
  const halfW = Math.min(28, band * 0.25);
  const parts: string[] = [];
  groups.forEach((g, i) => {
    const cx = MARGIN.left + band * (i + 0.5);
    parts.push(boxGlyph(g, cx, halfW, y));
    parts.push(
      `<text x="${cx.toFixed(1)}" y="${HEIGHT - MARGIN.bottom + 16}" text-anchor="middle" font-size="10">${escapeHtml(g.label)}</text>`,
    );
  });
  const left = MARGIN.left;
  const bottom = HEIGHT - MARGIN.bottom;
  const frame: string[] = [
    `<line x1="${left}" y1="${MARGIN.top}" x2="${left}" y2="${bottom}" stroke="#000"/>`,
    `<line x1="${left}" y1="${bottom}" x2="${WIDTH - MARGIN.right}" y2="${bottom}" stroke="#000"/>`,
  ];
  for (const t of ticks(y)) {
    const py = y.toPx(t).toFixed(1);
    frame.push(`<line x1="${left - 4}" y1="${py}" x2="${left}" y2="${py}" stroke="#000"/>`);
    frame.push(
      `<text x="${left - 7}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="10">${fmtTick(t)}</text>`,
    );
  }
  frame.push(
    `<text x="${(left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 8}" text-anchor="middle" font-size="11">${escapeHtml(plot.x_column)}</text>`,
    `<text x="14" y="${(MARGIN.top + bottom) / 2}" text-anchor="middle" font-size="11" transform="rotate(-90 14 ${(MARGIN.top + bottom) / 2})">${escapeHtml(plot.y_column)}</text>`,
  );
  return svgOpen(plot.caption) + frame.join("") + parts.join("") + "</svg>";
}

/** Dispatch on the payload's kind; malformed payloads must fail loudly. */
export function plotSvg(plot: PlotJson): string {
  if (plot.kind === "scatter") {
    return scatterSvg(plot);
  }
  if (plot.kind === "box") {
    return boxSvg(plot);
  }
  throw new Error(`unknown plot kind ${JSON.stringify((plot as { kind: string }).kind)}`);
}
