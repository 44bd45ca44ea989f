//! Exact planar primitives and predicates.
//!
//! Lines are never vertical and are stored in the duality-friendly form
//! `y = slope * x - offset`, so that [`dualize_line`] is plain coordinate copying.
//! Angles are never materialized: [`AngleGap`] compares differences of
//! `arctan(slope)` through exact sign tests on the tangent subtraction formula.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("lines {0} and {1} are parallel")]
    ParallelLines(usize, usize),
    #[error("polyline touches the ray at a vertex or along a sub-segment")]
    DegenerateContact,
    #[error("polyline needs at least two points")]
    TooShort,
    #[error("zero direction vector")]
    ZeroDirection,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(Scalar::from_int(x), Scalar::from_int(y))
    }

    pub fn translate(&self, dx: &Scalar, dy: &Scalar) -> Point {
        Point::new(&self.x + dx, &self.y + dy)
    }

    pub fn squared_distance(&self, other: &Point) -> Scalar {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A non-vertical line `y = slope * x - offset`.
///
/// `offset` is the negated y-intercept; `(slope, offset)` is exactly the dual
/// point of the line.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Line {
    pub slope: Scalar,
    pub offset: Scalar,
    pub id: usize,
}

impl Line {
    pub fn new(slope: Scalar, offset: Scalar, id: usize) -> Self {
        Line { slope, offset, id }
    }

    /// `y = slope * x + intercept`, converted to the stored form.
    pub fn from_slope_intercept(slope: Scalar, intercept: Scalar, id: usize) -> Self {
        Line::new(slope, -intercept, id)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        &self.slope * x - &self.offset
    }

    pub fn point_at(&self, x: &Scalar) -> Point {
        Point::new(x.clone(), self.eval(x))
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.eval(&p.x) == p.y
    }

    /// Sign of `p.y - line(p.x)`: +1 above, 0 on, -1 below.
    pub fn side_of(&self, p: &Point) -> i8 {
        (&p.y - self.eval(&p.x)).signum()
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}: y = {}x - {}", self.id, self.slope, self.offset)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Self {
        debug_assert!(p != q, "degenerate segment");
        Segment { p, q }
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.q.clone(), self.p.clone())
    }

    /// Whether `r` lies on the closed segment.
    pub fn contains(&self, r: &Point) -> bool {
        orientation(&self.p, &self.q, r) == 0 && in_box(&self.p, &self.q, r)
    }

    /// Point `p + t (q - p)`.
    pub fn at(&self, t: &Scalar) -> Point {
        Point::new(
            &self.p.x + t * (&self.q.x - &self.p.x),
            &self.p.y + t * (&self.q.y - &self.p.y),
        )
    }

    /// Crossing with a line, as the parameter `t` in `[0, 1]` and the point.
    /// `None` if the segment misses the line or lies on it.
    pub fn cross_line(&self, line: &Line) -> Option<(Scalar, Point)> {
        let fp = &self.p.y - line.eval(&self.p.x);
        let fq = &self.q.y - line.eval(&self.q.x);
        if fp.signum() * fq.signum() > 0 || (fp.is_zero() && fq.is_zero()) {
            return None;
        }
        let t = &fp / (&fp - &fq);
        let pt = self.at(&t);
        Some((t, pt))
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?} -> {:?}]", self.p, self.q)
    }
}

/// A half-line from `origin` in direction `(dx, dy)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub origin: Point,
    pub dx: Scalar,
    pub dy: Scalar,
}

impl Ray {
    pub fn new(origin: Point, dx: Scalar, dy: Scalar) -> Result<Self, GeometryError> {
        if dx.is_zero() && dy.is_zero() {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(Ray { origin, dx, dy })
    }

    /// Which side of the ray's supporting line `p` is on, looking along the
    /// ray: +1 left, -1 right, 0 on the line.
    pub fn side(&self, p: &Point) -> i8 {
        let cross = &self.dx * (&p.y - &self.origin.y) - &self.dy * (&p.x - &self.origin.x);
        cross.signum()
    }

    /// Whether a point on the supporting line is on the ray itself.
    fn ahead(&self, p: &Point) -> bool {
        let dot = &self.dx * (&p.x - &self.origin.x) + &self.dy * (&p.y - &self.origin.y);
        !dot.is_negative()
    }
}

/// Sign of `(q - p) x (r - p)`: +1 left turn, 0 collinear, -1 right turn.
pub fn orientation(p: &Point, q: &Point, r: &Point) -> i8 {
    let det = (&q.x - &p.x) * (&r.y - &p.y) - (&q.y - &p.y) * (&r.x - &p.x);
    det.signum()
}

fn in_box(a: &Point, b: &Point, r: &Point) -> bool {
    a.x.min_of(&b.x) <= &r.x
        && &r.x <= a.x.max_of(&b.x)
        && a.y.min_of(&b.y) <= &r.y
        && &r.y <= a.y.max_of(&b.y)
}

pub fn line_intersection(l1: &Line, l2: &Line) -> Result<Point, GeometryError> {
    let ds = &l1.slope - &l2.slope;
    if ds.is_zero() {
        return Err(GeometryError::ParallelLines(l1.id, l2.id));
    }
    let x = (&l1.offset - &l2.offset) / ds;
    let y = l1.eval(&x);
    Ok(Point::new(x, y))
}

/// x-coordinate of the intersection of two non-parallel lines.
pub fn intersection_x(l1: &Line, l2: &Line) -> Result<Scalar, GeometryError> {
    let ds = &l1.slope - &l2.slope;
    if ds.is_zero() {
        return Err(GeometryError::ParallelLines(l1.id, l2.id));
    }
    Ok((&l1.offset - &l2.offset) / ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TouchKind {
    /// An endpoint of one segment coincides with an endpoint of the other.
    EndpointEndpoint,
    /// An endpoint of one segment lies in the relative interior of the other.
    EndpointInterior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentContact {
    Disjoint,
    ProperCross(Point),
    Touch(TouchKind, Point),
    /// Collinear with a shared sub-segment of positive length.
    Overlap,
}

impl SegmentContact {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, SegmentContact::Disjoint)
    }
}

/// Classifies the intersection of two closed segments.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> SegmentContact {
    let (a, b, c, d) = (&s1.p, &s1.q, &s2.p, &s2.q);
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);

    if o1 == 0 && o2 == 0 {
        // collinear: compare projections on the dominant axis
        let key = |p: &Point| -> (Scalar, Scalar) {
            if a.x != b.x {
                (p.x.clone(), p.y.clone())
            } else {
                (p.y.clone(), p.x.clone())
            }
        };
        let (mut lo1, mut hi1) = (key(a), key(b));
        if lo1 > hi1 {
            std::mem::swap(&mut lo1, &mut hi1);
        }
        let (mut lo2, mut hi2) = (key(c), key(d));
        if lo2 > hi2 {
            std::mem::swap(&mut lo2, &mut hi2);
        }
        let lo = if lo1 > lo2 { lo1 } else { lo2 };
        let hi = if hi1 < hi2 { hi1 } else { hi2 };
        return match lo.cmp(&hi) {
            Ordering::Greater => SegmentContact::Disjoint,
            Ordering::Less => SegmentContact::Overlap,
            Ordering::Equal => {
                let shared = [a, b]
                    .into_iter()
                    .find(|p| key(p) == lo)
                    .cloned()
                    .expect("touch point is an endpoint of the first segment");
                let kind = if shared == *c || shared == *d {
                    TouchKind::EndpointEndpoint
                } else {
                    TouchKind::EndpointInterior
                };
                SegmentContact::Touch(kind, shared)
            }
        };
    }

    if o1 * o2 < 0 && o3 * o4 < 0 {
        let denom = (&b.x - &a.x) * (&d.y - &c.y) - (&b.y - &a.y) * (&d.x - &c.x);
        let t = ((&c.x - &a.x) * (&d.y - &c.y) - (&c.y - &a.y) * (&d.x - &c.x)) / denom;
        return SegmentContact::ProperCross(s1.at(&t));
    }

    let endpoint_hits: Vec<(&Point, bool)> = [
        (c, o1 == 0 && s1.contains(c)),
        (d, o2 == 0 && s1.contains(d)),
        (a, o3 == 0 && s2.contains(a)),
        (b, o4 == 0 && s2.contains(b)),
    ]
    .into_iter()
    .filter(|(_, hit)| *hit)
    .collect();

    match endpoint_hits.first() {
        None => SegmentContact::Disjoint,
        Some((p, _)) => {
            let p = (*p).clone();
            let shared_endpoint = (p == *a || p == *b) && (p == *c || p == *d);
            let kind = if shared_endpoint {
                TouchKind::EndpointEndpoint
            } else {
                TouchKind::EndpointInterior
            };
            SegmentContact::Touch(kind, p)
        }
    }
}

/// `y = a x - b` maps to the point `(a, b)`.
pub fn dualize_line(l: &Line) -> Point {
    Point::new(l.slope.clone(), l.offset.clone())
}

/// Inverse of [`dualize_line`]; the id is supplied by the caller.
pub fn dualize_point(p: &Point, id: usize) -> Line {
    Line::new(p.x.clone(), p.y.clone(), id)
}

/// Convex hull in counter-clockwise order starting from the lexicographically
/// smallest point. Collinear boundary points are dropped; duplicates collapse.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && orientation(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && orientation(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Whether a closed segment meets a closed convex polygon given in CCW order
/// (as returned by [`convex_hull`]; one or two points are also accepted).
pub fn segment_meets_convex(seg: &Segment, hull: &[Point]) -> bool {
    match hull.len() {
        0 => false,
        1 => seg.contains(&hull[0]),
        2 => {
            !segments_intersect(seg, &Segment::new(hull[0].clone(), hull[1].clone())).is_disjoint()
        }
        n => {
            // separating axis test over hull edges and the segment's own line
            for i in 0..n {
                let a = &hull[i];
                let b = &hull[(i + 1) % n];
                if orientation(a, b, &seg.p) < 0 && orientation(a, b, &seg.q) < 0 {
                    return false;
                }
            }
            let sides: Vec<i8> = hull
                .iter()
                .map(|h| orientation(&seg.p, &seg.q, h))
                .collect();
            !(sides.iter().all(|&s| s > 0) || sides.iter().all(|&s| s < 0))
        }
    }
}

/// Whether `p` lies in the closed convex polygon `hull` (CCW).
pub fn convex_contains(hull: &[Point], p: &Point) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == *p,
        2 => Segment::new(hull[0].clone(), hull[1].clone()).contains(p),
        n => (0..n).all(|i| orientation(&hull[i], &hull[(i + 1) % n], p) >= 0),
    }
}

/// Signed number of transversal crossings of the oriented polyline with the
/// ray: +1 for each arrival from the left side (looking along the ray), -1 for
/// each arrival from the right side.
///
/// Touching the ray at a vertex, running along it, or passing through its
/// origin is refused with [`GeometryError::DegenerateContact`].
pub fn winding_number(polyline: &[Point], ray: &Ray) -> Result<i64, GeometryError> {
    if polyline.len() < 2 {
        return Err(GeometryError::TooShort);
    }
    for v in polyline {
        if ray.side(v) == 0 && ray.ahead(v) {
            return Err(GeometryError::DegenerateContact);
        }
    }
    let mut total = 0i64;
    for w in polyline.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let sp = ray.side(p);
        let sq = ray.side(q);
        if sp == 0 || sq == 0 || sp == sq {
            // a vertex on the supporting line but behind the origin cannot
            // produce a crossing of the ray itself
            continue;
        }
        // the segment crosses the supporting line; find where
        let seg = Segment::new(p.clone(), q.clone());
        let t = {
            let fp = &ray.dx * (&p.y - &ray.origin.y) - &ray.dy * (&p.x - &ray.origin.x);
            let fq = &ray.dx * (&q.y - &ray.origin.y) - &ray.dy * (&q.x - &ray.origin.x);
            &fp / (&fp - &fq)
        };
        let hit = seg.at(&t);
        if hit == ray.origin {
            return Err(GeometryError::DegenerateContact);
        }
        if ray.ahead(&hit) {
            total += if sp > 0 { 1 } else { -1 };
        }
    }
    Ok(total)
}

/// Whether the angle between two lines (taken from the smaller to the larger
/// slope) is below, at, or above a right angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GapClass {
    Acute,
    Right,
    Obtuse,
}

/// The angle `arctan(s_hi) - arctan(s_lo)` in `(0, pi)`, kept symbolically as
/// its class and tangent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleGap {
    pub class: GapClass,
    /// `(s_hi - s_lo) / (1 + s_lo s_hi)`; `None` for a right angle.
    pub tangent: Option<Scalar>,
}

impl AngleGap {
    /// Gap between two distinct slopes; the order of the arguments is irrelevant.
    pub fn between(s1: &Scalar, s2: &Scalar) -> AngleGap {
        assert!(s1 != s2, "angle gap of equal slopes");
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let denom = Scalar::one() + lo * hi;
        match denom.signum() {
            0 => AngleGap {
                class: GapClass::Right,
                tangent: None,
            },
            s => AngleGap {
                class: if s > 0 {
                    GapClass::Acute
                } else {
                    GapClass::Obtuse
                },
                tangent: Some((hi - lo) / denom),
            },
        }
    }

    pub fn of_lines(l1: &Line, l2: &Line) -> AngleGap {
        AngleGap::between(&l1.slope, &l2.slope)
    }
}

impl PartialOrd for AngleGap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AngleGap {
    fn cmp(&self, other: &Self) -> Ordering {
        // tan is increasing on (0, pi/2) and on (pi/2, pi)
        self.class
            .cmp(&other.class)
            .then_with(|| match (&self.tangent, &other.tangent) {
                (Some(a), Some(b)) => a.cmp(b),
                _ => Ordering::Equal,
            })
    }
}

/// Compares the angle gaps of two line pairs without evaluating `arctan`.
pub fn compare_angle_gap(pair1: (&Line, &Line), pair2: (&Line, &Line)) -> Ordering {
    AngleGap::of_lines(pair1.0, pair1.1).cmp(&AngleGap::of_lines(pair2.0, pair2.1))
}
