"""Point-in-polygon selection, the server-side oracle for lasso gestures.

Even-odd rule with boundary points counting as inside. The browser client
implements the same rule; golden fixtures generated from this module pin the
two to identical results.
"""

from __future__ import annotations


def point_in_polygon(x: float, y: float, polygon: list[tuple[float, float]]) -> bool:
    """Even-odd containment test; points on an edge are inside."""
    n = len(polygon)
    if n < 3:
        return False
    inside = False
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if _on_segment(x, y, x1, y1, x2, y2):
            return True
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def _on_segment(px, py, x1, y1, x2, y2) -> bool:
    cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    if abs(cross) > 1e-9 * max(1.0, abs(x2 - x1) + abs(y2 - y1)):
        return False
    return min(x1, x2) - 1e-12 <= px <= max(x1, x2) + 1e-12 and (
        min(y1, y2) - 1e-12 <= py <= max(y1, y2) + 1e-12
    )


def lasso_select(points: list[tuple[str, float, float]], polygon: list[tuple[float, float]]) -> set[str]:
    """Ids of the points inside the closed polygon; needs >= 3 vertices."""
    if len({(round(x, 12), round(y, 12)) for x, y in polygon}) < 3:
        return set()
    return {pid for pid, x, y in points if point_in_polygon(x, y, polygon)}
