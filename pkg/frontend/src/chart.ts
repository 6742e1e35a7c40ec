/** Geometry for the best-total SVG chart: fraction series in,
 * polyline points out.  Pure string/number work so it is testable
 * without a DOM. */

import { fractionToNumber } from "./fraction.js";

export interface ChartBox {
  width: number;
  height: number;
  padding: number;
}

/** Map a series onto evenly spaced x and linearly scaled y
 * coordinates, formatted for an SVG <polyline> points attribute.
 * A constant series draws at mid-height; a single point sits at the
 * left edge. */
export function seriesToPolylinePoints(series: string[], box: ChartBox): string {
  if (series.length === 0) {
    return "";
  }
  const values = series.map(fractionToNumber);
  const low = Math.min(...values);
  const high = Math.max(...values);
  const span = high - low;
  const innerWidth = box.width - 2 * box.padding;
  const innerHeight = box.height - 2 * box.padding;
  const step = series.length > 1 ? innerWidth / (series.length - 1) : 0;

  return values
    .map((value, index) => {
      const x = box.padding + index * step;
      const scaled = span > 0 ? (value - low) / span : 0.5;
      const y = box.padding + (1 - scaled) * innerHeight;
      return `${round(x)},${round(y)}`;
    })
    .join(" ");
}

function round(value: number): number {
  return Math.round(value * 100) / 100;
}
