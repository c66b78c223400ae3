/**
 * SVG fan chart: cumulative enrollment vs month with a shaded PI band, the
 * median line, a horizontal target line, and LSFD markers where the quantile
 * curves cross the target. All values come from the service's curve field;
 * this module only maps them to pixels.
 */

import type { CurvePoint } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface FanChartLayout {
  width: number;
  height: number;
  padLeft: number;
  padBottom: number;
  padTop: number;
  padRight: number;
}

const DEFAULT_LAYOUT: FanChartLayout = {
  width: 560,
  height: 280,
  padLeft: 44,
  padBottom: 28,
  padTop: 10,
  padRight: 12,
};

/**
 * Month at which a quantile curve first reaches the target count, linearly
 * interpolated between adjacent months; null when it never does.
 */
export function crossingMonth(
  curve: CurvePoint[],
  key: "q_low" | "q_median" | "q_high",
  target: number,
): number | null {
  let prevMonth = 0;
  let prevValue = 0;
  for (const point of curve) {
    const value = point[key];
    if (value >= target) {
      if (value === prevValue) return point.month;
      const t = (target - prevValue) / (value - prevValue);
      return prevMonth + t * (point.month - prevMonth);
    }
    prevMonth = point.month;
    prevValue = value;
  }
  return null;
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  return node;
}

/** Build the fan chart for one forecast curve. */
export function renderFanChart(
  curve: CurvePoint[],
  target: number,
  layout: FanChartLayout = DEFAULT_LAYOUT,
): SVGSVGElement {
  const { width, height, padLeft, padBottom, padTop, padRight } = layout;
  const svg = el("svg", {
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
    "data-testid": "fan-chart",
  });

  const maxMonth = curve.length ? curve[curve.length - 1]!.month : 1;
  const maxCount = Math.max(target, ...curve.map((p) => p.q_high), 1);
  const plotW = width - padLeft - padRight;
  const plotH = height - padTop - padBottom;
  const x = (month: number) => padLeft + (month / maxMonth) * plotW;
  const y = (count: number) => padTop + plotH - (count / maxCount) * plotH;

  // axes
  svg.appendChild(el("line", {
    x1: String(padLeft), y1: String(padTop + plotH),
    x2: String(padLeft + plotW), y2: String(padTop + plotH),
    stroke: "#888", "stroke-width": "1",
  }));
  svg.appendChild(el("line", {
    x1: String(padLeft), y1: String(padTop),
    x2: String(padLeft), y2: String(padTop + plotH),
    stroke: "#888", "stroke-width": "1",
  }));

  if (curve.length) {
    // shaded band between q_low and q_high, anchored at month 0 = 0 enrolled
    const upper = [`${x(0)},${y(0)}`]
      .concat(curve.map((p) => `${x(p.month)},${y(p.q_high)}`));
    const lower = curve
      .slice()
      .reverse()
      .map((p) => `${x(p.month)},${y(p.q_low)}`)
      .concat([`${x(0)},${y(0)}`]);
    svg.appendChild(el("polygon", {
      points: upper.concat(lower).join(" "),
      fill: "#4a90d9",
      "fill-opacity": "0.25",
      stroke: "none",
      "data-testid": "pi-band",
    }));

    const medianPoints = [`${x(0)},${y(0)}`]
      .concat(curve.map((p) => `${x(p.month)},${y(p.q_median)}`));
    svg.appendChild(el("polyline", {
      points: medianPoints.join(" "),
      fill: "none",
      stroke: "#1b4f8a",
      "stroke-width": "2",
      "data-testid": "median-line",
    }));
  }

  // horizontal target line
  svg.appendChild(el("line", {
    x1: String(padLeft), y1: String(y(target)),
    x2: String(padLeft + plotW), y2: String(y(target)),
    stroke: "#c0392b",
    "stroke-dasharray": "5 3",
    "data-testid": "target-line",
  }));

  // LSFD markers: where each quantile curve reaches the target
  const markers: ["q_low" | "q_median" | "q_high", string][] = [
    ["q_high", "pi-early"],
    ["q_median", "median"],
    ["q_low", "pi-late"],
  ];
  for (const [key, label] of markers) {
    const month = crossingMonth(curve, key, target);
    if (month === null) continue;
    svg.appendChild(el("circle", {
      cx: String(x(month)),
      cy: String(y(target)),
      r: "4",
      fill: key === "q_median" ? "#1b4f8a" : "#4a90d9",
      "data-testid": `lsfd-marker-${label}`,
      "data-month": String(month),
    }));
  }

  // sparse month ticks
  const step = Math.max(1, Math.ceil(maxMonth / 8));
  for (let month = step; month <= maxMonth; month += step) {
    const tick = el("text", {
      x: String(x(month)),
      y: String(height - 8),
      "text-anchor": "middle",
      "font-size": "10",
      fill: "#555",
    });
    tick.textContent = String(month);
    svg.appendChild(tick);
  }
  const countTick = el("text", {
    x: "6",
    y: String(y(target) + 3),
    "font-size": "10",
    fill: "#c0392b",
  });
  countTick.textContent = String(target);
  svg.appendChild(countTick);

  return svg;
}
