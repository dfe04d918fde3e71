"""Planar geometry primitives shared by the world model and the sonar.

Points are plain (x, y) tuples of floats; angles are radians. Everything here
is pure and allocation-light because the RL environment calls it every step.
"""

from __future__ import annotations

import math

Point = tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.fmod(a + math.pi, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


def dist(a: Point, b: Point) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def norm(v: Point) -> float:
    return math.hypot(v[0], v[1])


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def scale(v: Point, k: float) -> Point:
    return (v[0] * k, v[1] * k)


def unit(v: Point) -> Point:
    n = norm(v)
    if n == 0.0:
        return (0.0, 0.0)
    return (v[0] / n, v[1] / n)


def cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def rotate(v: Point, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def closest_point_on_segment(p: Point, a: Point, b: Point) -> Point:
    """Closest point to p on the closed segment ab."""
    ab = sub(b, a)
    L2 = ab[0] * ab[0] + ab[1] * ab[1]
    if L2 == 0.0:
        return a
    t = dot(sub(p, a), ab) / L2
    t = min(1.0, max(0.0, t))
    return (a[0] + t * ab[0], a[1] + t * ab[1])


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    return dist(p, closest_point_on_segment(p, a, b))


def ray_segment_intersection(origin: Point, direction: Point, a: Point, b: Point) -> float | None:
    """Distance along the ray (origin, unit direction) to segment ab, or None.

    Parallel (including collinear) configurations count as no hit.
    """
    e = sub(b, a)
    denom = cross(direction, e)
    if abs(denom) < 1e-12:
        return None
    ao = sub(a, origin)
    t = cross(ao, e) / denom
    u = cross(ao, direction) / denom
    if t >= 0.0 and 0.0 <= u <= 1.0:
        return t
    return None


def ray_circle_intersection(origin: Point, direction: Point, center: Point, radius: float) -> float | None:
    """Distance along the ray to the first intersection with the circle, or None.

    An origin inside the circle hits on the way out.
    """
    oc = sub(origin, center)
    b = dot(direction, oc)
    c = dot(oc, oc) - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    t = -b - root
    if t < 0.0:
        t = -b + root
    if t < 0.0:
        return None
    return t


def segment_hits_segment(p0: Point, p1: Point, a: Point, b: Point,
                         t_min: float, t_max: float) -> bool:
    """True if segment p0->p1 crosses ab at a parameter distance in (t_min, t_max).

    Parameters are measured in meters along p0->p1.
    """
    L = dist(p0, p1)
    if L == 0.0:
        return False
    d = scale(sub(p1, p0), 1.0 / L)
    t = ray_segment_intersection(p0, d, a, b)
    return t is not None and t_min < t < min(t_max, L)


def segment_hits_circle(p0: Point, p1: Point, center: Point, radius: float,
                        t_min: float, t_max: float) -> bool:
    """True if segment p0->p1 enters the circle at a parameter distance in (t_min, t_max)."""
    L = dist(p0, p1)
    if L == 0.0:
        return False
    d = scale(sub(p1, p0), 1.0 / L)
    t = ray_circle_intersection(p0, d, center, radius)
    return t is not None and t_min < t < min(t_max, L)


def polygon_signed_area(vertices: tuple[Point, ...]) -> float:
    """Shoelace area; positive for counter-clockwise vertex order."""
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def point_in_polygon(p: Point, vertices: tuple[Point, ...]) -> bool:
    """Even-odd crossing test. Boundary points are not guaranteed either way."""
    x, y = p
    inside = False
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xi:
                inside = not inside
    return inside


def polygon_edges_intersect(vertices: tuple[Point, ...]) -> bool:
    """True if any two non-adjacent edges of the polygon intersect (self-intersection)."""
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or j == (i + 1) % n or (j + 1) % n == i:
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return True
    return False


def _segments_cross(a0: Point, a1: Point, b0: Point, b1: Point) -> bool:
    d1 = cross(sub(a1, a0), sub(b0, a0))
    d2 = cross(sub(a1, a0), sub(b1, a0))
    d3 = cross(sub(b1, b0), sub(a0, b0))
    d4 = cross(sub(b1, b0), sub(a1, b0))
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))
