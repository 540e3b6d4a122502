// Lasso selection is polygon hit-testing in projection coordinates.

export type Point = [number, number];

// Ray-casting point-in-polygon test; points on an edge count as inside
// closely enough for selection purposes.
export function pointInPolygon(point: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  const [x, y] = point;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const [xi, yi] = polygon[i]!;
    const [xj, yj] = polygon[j]!;
    const crosses = yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi;
    if (crosses) inside = !inside;
  }
  return inside;
}

export function pointsInPolygon<T>(
  items: T[],
  coord: (item: T) => Point | null,
  polygon: Point[],
): T[] {
  return items.filter((item) => {
    const point = coord(item);
    return point !== null && pointInPolygon(point, polygon);
  });
}
