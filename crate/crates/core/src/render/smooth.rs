use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSegment {
    Line { to: Point },
    Quad { ctrl: Point, to: Point },
}

/// A piecewise curve of lines and quadratic Béziers.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCurve {
    pub start: Point,
    pub segments: Vec<CurveSegment>,
}

impl SmoothCurve {
    pub fn end(&self) -> Point {
        match self.segments.last() {
            Some(CurveSegment::Line { to } | CurveSegment::Quad { to, .. }) => *to,
            None => self.start,
        }
    }

    /// `per_segment + 1` points on every segment, segment joins included once.
    pub fn sample(&self, per_segment: usize) -> Vec<Point> {
        let mut out = vec![self.start];
        let mut from = self.start;
        for seg in &self.segments {
            for i in 1..=per_segment {
                let t = i as f64 / per_segment as f64;
                out.push(match *seg {
                    CurveSegment::Line { to } => from.lerp(to, t),
                    CurveSegment::Quad { ctrl, to } => quad_point(from, ctrl, to, t),
                });
            }
            from = match *seg {
                CurveSegment::Line { to } | CurveSegment::Quad { to, .. } => to,
            };
        }
        out
    }
}

pub fn quad_point(p0: Point, p1: Point, p2: Point, t: f64) -> Point {
    let u = 1.0 - t;
    Point::new(
        u * u * p0.x + 2.0 * u * t * p1.x + t * t * p2.x,
        u * u * p0.y + 2.0 * u * t * p1.y + t * t * p2.y,
    )
}

/// Drop interior vertices that lie on the straight line through their
/// neighbours. Lossless.
pub fn collapse_collinear(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last() == Some(&p) {
            continue;
        }
        while out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            let scale = a.dist(b).max(b.dist(p)).max(f64::MIN_POSITIVE);
            let same_way = (b.x - a.x) * (p.x - b.x) + (b.y - a.y) * (p.y - b.y) > 0.0;
            if cross.abs() <= 1e-9 * scale * scale && same_way {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Corner-cutting smoothing: endpoints stay fixed, each interior vertex
/// becomes the control point of a quadratic running between the midpoints
/// of its two incident segments.
pub fn smooth(polyline: &[Point]) -> SmoothCurve {
    let pts = collapse_collinear(polyline);
    let Some(&start) = pts.first() else {
        return SmoothCurve { start: Point::new(0.0, 0.0), segments: Vec::new() };
    };
    if pts.len() == 1 {
        return SmoothCurve { start, segments: Vec::new() };
    }
    if pts.len() == 2 {
        return SmoothCurve { start, segments: vec![CurveSegment::Line { to: pts[1] }] };
    }
    let mut segments = vec![CurveSegment::Line { to: pts[0].midpoint(pts[1]) }];
    for i in 1..pts.len() - 1 {
        segments.push(CurveSegment::Quad { ctrl: pts[i], to: pts[i].midpoint(pts[i + 1]) });
    }
    segments.push(CurveSegment::Line { to: *pts.last().expect("len > 2") });
    SmoothCurve { start, segments }
}
