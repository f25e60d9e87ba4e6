//! Planar primitives shared by grid masking and the layout metrics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

/// Axis-aligned rectangle, `min` is the lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        self.min.midpoint(self.max)
    }

    pub fn contains_closed(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_open(&self, p: Point) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Bounding box of a point set; `None` when empty.
    pub fn envelope<I: IntoIterator<Item = Point>>(points: I) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first, first);
        for p in it {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            Point::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            Point::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        )
    }

    /// Parameter interval `[t0, t1]` of `a + t (b - a)` inside the closed
    /// rectangle (Liang-Barsky), or `None` if the segment misses it.
    fn clip(&self, a: Point, b: Point) -> Option<(f64, f64)> {
        let dx = b.x - a.x;
        let dy = b.y - a.y;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (p, q) in [
            (-dx, a.x - self.min.x),
            (dx, self.max.x - a.x),
            (-dy, a.y - self.min.y),
            (dy, self.max.y - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }

    pub fn segment_hits_closed(&self, a: Point, b: Point) -> bool {
        self.clip(a, b).is_some()
    }

    /// True when some point of segment `ab` lies strictly inside the rectangle.
    pub fn segment_hits_open(&self, a: Point, b: Point) -> bool {
        match self.clip(a, b) {
            // The chord through a convex set is interior everywhere except its
            // endpoints as soon as any point is interior, so the midpoint decides.
            Some((t0, t1)) => self.contains_open(a.lerp(b, 0.5 * (t0 + t1))),
            None => false,
        }
    }
}

/// Polygon with an exterior ring and optional holes. Rings may be open or
/// closed (first == last); both are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Vec<Point>,
    #[serde(default)]
    pub holes: Vec<Vec<Point>>,
}

impl Polygon {
    pub fn new(exterior: Vec<Point>) -> Self {
        Self { exterior, holes: Vec::new() }
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    /// Even-odd containment over all rings.
    pub fn contains(&self, p: Point) -> bool {
        self.rings().filter(|r| ring_crossings(r, p) % 2 == 1).count() % 2 == 1
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.rings().flat_map(ring_edges)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.rings().flat_map(|r| r.iter().copied())
    }

    pub fn bbox(&self) -> Option<Rect> {
        Rect::envelope(self.exterior.iter().copied())
    }

    /// True when the polygon interior and the open rectangle share area.
    pub fn overlaps_open_rect(&self, rect: &Rect) -> bool {
        if self.vertices().any(|v| rect.contains_open(v)) {
            return true;
        }
        if self.edges().any(|(a, b)| rect.segment_hits_open(a, b)) {
            return true;
        }
        // Boundary stays outside the open square: it is wholly in or out.
        self.contains(rect.center())
    }

    /// True when no two non-adjacent edges of any ring intersect.
    pub fn is_simple(&self) -> bool {
        self.rings().all(|ring| {
            let edges: Vec<_> = ring_edges(ring).collect();
            let n = edges.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                    if adjacent {
                        continue;
                    }
                    if segments_intersect_f64(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                        return false;
                    }
                }
            }
            true
        })
    }
}

fn ring_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let closed = ring.len() > 1 && ring.first() == ring.last();
    let n = if closed { ring.len() - 1 } else { ring.len() };
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

fn ring_crossings(ring: &[Point], p: Point) -> usize {
    ring_edges(ring)
        .filter(|&(a, b)| {
            (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x
        })
        .count()
}

fn orient_f64(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect_f64(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient_f64(a, b, c);
    let o2 = orient_f64(a, b, d);
    let o3 = orient_f64(c, d, a);
    let o4 = orient_f64(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// Obstacle geometry kinds accepted from region input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Point(Point),
    LineString(Vec<Point>),
    Polygon(Polygon),
}

impl Geometry {
    /// Whether this geometry blocks the cell square `rect`.
    ///
    /// Points and lines use the closed square so a line along a cell border
    /// masks both sides; polygons need shared area so a polygon aligned to cell
    /// borders masks exactly the cells it covers.
    pub fn blocks(&self, rect: &Rect) -> bool {
        match self {
            Geometry::Point(p) => rect.contains_closed(*p),
            Geometry::LineString(pts) => match pts.as_slice() {
                [p] => rect.contains_closed(*p),
                _ => pts.windows(2).any(|w| rect.segment_hits_closed(w[0], w[1])),
            },
            Geometry::Polygon(poly) => poly.overlaps_open_rect(rect),
        }
    }

    pub fn bbox(&self) -> Option<Rect> {
        match self {
            Geometry::Point(p) => Some(Rect::new(*p, *p)),
            Geometry::LineString(pts) => Rect::envelope(pts.iter().copied()),
            Geometry::Polygon(poly) => poly.bbox(),
        }
    }
}

/// Exact orientation sign on integer lattice coordinates.
pub fn orient(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i64 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).signum()
}

fn on_segment(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    orient(a, b, p) == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// How two lattice segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentContact {
    Disjoint,
    /// Interiors cross at a single point.
    Proper,
    /// They touch at a lattice point or overlap collinearly.
    Touch,
}

pub fn segment_contact(a: (i64, i64), b: (i64, i64), c: (i64, i64), d: (i64, i64)) -> SegmentContact {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return SegmentContact::Proper;
    }
    if on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b) {
        return SegmentContact::Touch;
    }
    SegmentContact::Disjoint
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}
