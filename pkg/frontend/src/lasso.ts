/** Lasso selection geometry.
 *
 * Even-odd point-in-polygon with boundary points counting as inside; must
 * stay in lockstep with the server-side oracle (golden fixtures pin the two
 * to identical id sets).
 */

export type Vertex = [number, number];

function onSegment(
  px: number,
  py: number,
  x1: number,
  y1: number,
  x2: number,
  y2: number,
): boolean {
  const cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
  if (Math.abs(cross) > 1e-9 * Math.max(1, Math.abs(x2 - x1) + Math.abs(y2 - y1))) {
    return false;
  }
  return (
    Math.min(x1, x2) - 1e-12 <= px &&
    px <= Math.max(x1, x2) + 1e-12 &&
    Math.min(y1, y2) - 1e-12 <= py &&
    py <= Math.max(y1, y2) + 1e-12
  );
}

export function pointInPolygon(x: number, y: number, polygon: Vertex[]): boolean {
  const n = polygon.length;
  if (n < 3) return false;
  let inside = false;
  for (let i = 0; i < n; i++) {
    const [x1, y1] = polygon[i];
    const [x2, y2] = polygon[(i + 1) % n];
    if (onSegment(x, y, x1, y1, x2, y2)) return true;
    if (y1 > y !== y2 > y) {
      const xCross = x1 + ((y - y1) * (x2 - x1)) / (y2 - y1);
      if (x < xCross) inside = !inside;
    }
  }
  return inside;
}

/** Ids of points inside the closed polygon; degenerate polygons select nothing. */
export function lassoSelect(
  points: Array<[string, number, number]>,
  polygon: Vertex[],
): Set<string> {
  const distinct = new Set(polygon.map(([x, y]) => `${x.toFixed(12)}:${y.toFixed(12)}`));
  if (distinct.size < 3) return new Set();
  const out = new Set<string>();
  for (const [id, x, y] of points) {
    if (pointInPolygon(x, y, polygon)) out.add(id);
  }
  return out;
}
