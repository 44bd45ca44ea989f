//! Validated line collections.
//!
//! A [`LineSet`] is sorted by strictly increasing slope and is in general
//! position. Positions in the sorted order are 0-based internally; line ids
//! are whatever the caller assigned (1..n after [`verify_general_position`]).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{
    convex_hull, intersection_x, line_intersection, orientation, Line, Point, Segment,
};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LineSetError {
    #[error("lines {0} and {1} are parallel")]
    ParallelPair(usize, usize),
    #[error("lines {0}, {1} and {2} pass through a common point")]
    ConcurrentTriple(usize, usize, usize),
    #[error("lines {0} and {1} coincide")]
    DuplicateLine(usize, usize),
    #[error("at least 3 lines are needed, got {0}")]
    TooFew(usize),
    #[error("line id {0} is used twice")]
    DuplicateId(usize),
    #[error("no line with id {0}")]
    UnknownId(usize),
    #[error("{c} color classes do not divide {n} lines")]
    Divisibility { n: usize, c: usize },
    #[error("point lies on the intersection with line {0}")]
    OnIntersection(usize),
    #[error("region ({0}, {1}) is empty or out of range")]
    EmptyRegion(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSet {
    lines: Vec<Line>,
    /// Per position: partner positions sorted by intersection x, with the x.
    order: Vec<Vec<(usize, Scalar)>>,
}

/// Sorts by slope, checks general position and relabels ids `1..=n`.
pub fn verify_general_position(lines: &[Line]) -> Result<LineSet, LineSetError> {
    let ls = LineSet::sorted_checked(lines)?;
    let relabeled = ls
        .lines
        .iter()
        .enumerate()
        .map(|(k, l)| Line::new(l.slope.clone(), l.offset.clone(), k + 1))
        .collect();
    Ok(LineSet {
        lines: relabeled,
        order: ls.order,
    })
}

impl LineSet {
    /// Like [`verify_general_position`] but keeps the caller's ids, which
    /// must be distinct.
    pub fn with_ids(lines: &[Line]) -> Result<LineSet, LineSetError> {
        let mut ids: Vec<usize> = lines.iter().map(|l| l.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(LineSetError::DuplicateId(w[0]));
        }
        LineSet::sorted_checked(lines)
    }

    fn sorted_checked(lines: &[Line]) -> Result<LineSet, LineSetError> {
        let mut sorted = lines.to_vec();
        sorted.sort_by(|a, b| a.slope.cmp(&b.slope).then_with(|| a.offset.cmp(&b.offset)));
        for w in sorted.windows(2) {
            if w[0].slope == w[1].slope {
                if w[0].offset == w[1].offset {
                    return Err(LineSetError::DuplicateLine(w[0].id, w[1].id));
                }
                return Err(LineSetError::ParallelPair(w[0].id, w[1].id));
            }
        }
        LineSet::build(sorted)
    }

    /// Builds from lines already sorted by strictly increasing slope, keeping
    /// their ids. Fails on concurrency.
    fn build(lines: Vec<Line>) -> Result<LineSet, LineSetError> {
        let n = lines.len();
        let mut order = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: Vec<(usize, Scalar)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let x = intersection_x(&lines[i], &lines[j])
                        .expect("slopes are strictly increasing");
                    (j, x)
                })
                .collect();
            row.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
            for w in row.windows(2) {
                if w[0].1 == w[1].1 {
                    let mut ids = [lines[i].id, lines[w[0].0].id, lines[w[1].0].id];
                    ids.sort_unstable();
                    return Err(LineSetError::ConcurrentTriple(ids[0], ids[1], ids[2]));
                }
            }
            order.push(row);
        }
        Ok(LineSet { lines, order })
    }

    /// Sub-collection of the given ids, keeping ids and slope order.
    pub fn subset(&self, ids: &[usize]) -> Result<LineSet, LineSetError> {
        let mut picked = Vec::with_capacity(ids.len());
        for &id in ids {
            picked.push(self.line(id)?.clone());
        }
        picked.sort_by(|a, b| a.slope.cmp(&b.slope));
        picked.dedup_by(|a, b| a.id == b.id);
        LineSet::build(picked)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn ids(&self) -> Vec<usize> {
        self.lines.iter().map(|l| l.id).collect()
    }

    pub fn position(&self, id: usize) -> Result<usize, LineSetError> {
        self.lines
            .iter()
            .position(|l| l.id == id)
            .ok_or(LineSetError::UnknownId(id))
    }

    pub fn line(&self, id: usize) -> Result<&Line, LineSetError> {
        Ok(&self.lines[self.position(id)?])
    }

    pub fn at(&self, pos: usize) -> &Line {
        &self.lines[pos]
    }

    /// Partner positions on the line at `pos`, sorted by intersection x.
    pub fn order_at(&self, pos: usize) -> &[(usize, Scalar)] {
        &self.order[pos]
    }

    /// All pairwise intersection points.
    pub fn intersection_points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                out.push(line_intersection(&self.lines[i], &self.lines[j]).expect("not parallel"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CapCup {
    Cap,
    Cup,
    Neither,
}

/// Cap when, along every line, the intersections with the other lines taken
/// in index order move left to right; Cup when they all move right to left.
///
/// With this orientation a cap is exactly the dual of a convex (cup) point
/// chain and vice versa.
pub fn classify_cap_cup(ls: &LineSet) -> Result<CapCup, LineSetError> {
    let n = ls.len();
    if n < 3 {
        return Err(LineSetError::TooFew(n));
    }
    let mut increasing = true;
    let mut decreasing = true;
    for row in &ls.order {
        // row is sorted by x; read off the partner positions
        let partners: Vec<usize> = row.iter().map(|(j, _)| *j).collect();
        if !partners.windows(2).all(|w| w[0] < w[1]) {
            increasing = false;
        }
        if !partners.windows(2).all(|w| w[0] > w[1]) {
            decreasing = false;
        }
    }
    Ok(match (increasing, decreasing) {
        (true, _) => CapCup::Cap,
        (_, true) => CapCup::Cup,
        _ => CapCup::Neither,
    })
}

/// Convex position test for a point sequence with distinct x-coordinates.
/// `Cup` for a strictly convex chain, `Cap` for a strictly concave one.
pub fn classify_point_chain(points: &[Point]) -> CapCup {
    let mut pts = points.to_vec();
    pts.sort();
    if pts.len() < 3 || pts.windows(2).any(|w| w[0].x == w[1].x) {
        return CapCup::Neither;
    }
    let turns: Vec<i8> = pts
        .windows(3)
        .map(|w| orientation(&w[0], &w[1], &w[2]))
        .collect();
    if turns.iter().all(|&t| t > 0) {
        CapCup::Cup
    } else if turns.iter().all(|&t| t < 0) {
        CapCup::Cap
    } else {
        CapCup::Neither
    }
}

/// Longest convex chain of points sorted by strictly increasing x, as indices.
///
/// `f(j, k)` is the longest chain ending with the edge `j -> k`; it extends
/// `f(i, j)` whenever slope(i, j) < slope(j, k). For each middle vertex the
/// incoming and outgoing edges are sorted by slope once, so the whole pass is
/// O(n^2 log n).
fn longest_convex_chain(pts: &[Point]) -> Vec<usize> {
    let n = pts.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let slope = |a: usize, b: usize| (&pts[b].y - &pts[a].y) / (&pts[b].x - &pts[a].x);
    // best[i][j] for i < j: (length, predecessor of i or usize::MAX)
    let mut best = vec![vec![(2usize, usize::MAX); n]; n];
    for j in 1..n {
        let mut incoming: Vec<(Scalar, usize)> = (0..j).map(|i| (slope(i, j), i)).collect();
        incoming.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut outgoing: Vec<(Scalar, usize)> = (j + 1..n).map(|k| (slope(j, k), k)).collect();
        outgoing.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut ptr = 0;
        // running best over incoming edges with slope strictly below the current
        let mut run: Option<(usize, usize)> = None;
        for (s_out, k) in &outgoing {
            while ptr < incoming.len() && incoming[ptr].0 < *s_out {
                let i = incoming[ptr].1;
                let cand = (best[i][j].0, i);
                run = match run {
                    None => Some(cand),
                    Some(r) if cand.0 > r.0 || (cand.0 == r.0 && cand.1 < r.1) => Some(cand),
                    keep => keep,
                };
                ptr += 1;
            }
            if let Some((len, i)) = run {
                best[j][*k] = (len + 1, i);
            }
        }
    }
    let mut top = (0usize, 1usize, 2usize);
    for i in 0..n {
        for j in i + 1..n {
            if best[i][j].0 > top.0 {
                top = (best[i][j].0, i, j);
            }
        }
    }
    let (_, mut i, mut j) = top;
    let mut chain = vec![j, i];
    while best[i][j].1 != usize::MAX {
        let h = best[i][j].1;
        chain.push(h);
        j = i;
        i = h;
    }
    chain.reverse();
    chain
}

/// Largest cap or cup contained in the set, via the dual point set.
///
/// Returns the kind and the sub-collection (original ids). Ties prefer `Cap`.
pub fn longest_cap_cup(ls: &LineSet) -> Result<(CapCup, LineSet), LineSetError> {
    if ls.len() < 3 {
        return Err(LineSetError::TooFew(ls.len()));
    }
    // dual points are already sorted by x (= slope)
    let dual: Vec<Point> = ls.lines.iter().map(crate::geometry::dualize_line).collect();
    let mirrored: Vec<Point> = dual
        .iter()
        .map(|p| Point::new(p.x.clone(), -&p.y))
        .collect();
    let cup_pts = longest_convex_chain(&dual);
    let cap_pts = longest_convex_chain(&mirrored);
    // a convex dual chain is a cap of lines
    let (kind, idx) = if cup_pts.len() >= cap_pts.len() {
        (CapCup::Cap, cup_pts)
    } else {
        (CapCup::Cup, cap_pts)
    };
    let ids: Vec<usize> = idx.iter().map(|&k| ls.lines[k].id).collect();
    let sub = ls.subset(&ids)?;
    Ok((kind, sub))
}

/// The intersections on line `id`, sorted by x, as (partner id, point).
pub fn intersection_order(ls: &LineSet, id: usize) -> Result<Vec<(usize, Point)>, LineSetError> {
    let pos = ls.position(id)?;
    let line = &ls.lines[pos];
    Ok(ls.order[pos]
        .iter()
        .map(|(j, x)| (ls.lines[*j].id, line.point_at(x)))
        .collect())
}

/// Partition of the slope-sorted lines into `c` consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorClasses {
    pub n: usize,
    pub c: usize,
}

impl ColorClasses {
    pub fn new(n: usize, c: usize) -> Result<Self, LineSetError> {
        if c == 0 || !n.is_multiple_of(c) {
            return Err(LineSetError::Divisibility { n, c });
        }
        Ok(ColorClasses { n, c })
    }

    pub fn block(&self) -> usize {
        self.n / self.c
    }

    /// Class (1-based) of the line at 0-based slope position `pos`.
    pub fn class_of_position(&self, pos: usize) -> usize {
        pos / self.block() + 1
    }

    /// Class of a line id in `ls`.
    pub fn class_of(&self, ls: &LineSet, id: usize) -> Result<usize, LineSetError> {
        Ok(self.class_of_position(ls.position(id)?))
    }

    /// 0-based positions of the lines in class `k`.
    pub fn members(&self, k: usize) -> std::ops::Range<usize> {
        (k - 1) * self.block()..k * self.block()
    }

    /// All region indices `(a, b)` with `a <= b`.
    pub fn regions(&self) -> Vec<RegionIndex> {
        let mut out = Vec::new();
        for a in 1..=self.c {
            for b in a..=self.c {
                out.push(RegionIndex { a, b });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionIndex {
    pub a: usize,
    pub b: usize,
}

impl RegionIndex {
    pub fn new(p: usize, q: usize) -> Self {
        RegionIndex {
            a: p.min(q),
            b: p.max(q),
        }
    }
}

/// Bounds of the open segment number `seg` (1-based) on the line at `pos`:
/// `None` stands for the infinite end.
fn segment_bounds(
    ls: &LineSet,
    cc: &ColorClasses,
    pos: usize,
    seg: usize,
) -> (Option<Scalar>, Option<Scalar>) {
    let n = ls.len();
    let lo = (seg - 1) * cc.block();
    let hi = seg * cc.block();
    // P_{i,j} is the j-th leftmost point, 1-based; P_{i,0} and P_{i,n} are infinite
    let at = |j: usize| -> Option<Scalar> {
        if j == 0 || j == n {
            None
        } else {
            Some(ls.order[pos][j - 1].1.clone())
        }
    };
    (at(lo), at(hi))
}

/// Region containing the point of line `id` at abscissa `x`.
pub fn region_of(
    ls: &LineSet,
    cc: &ColorClasses,
    id: usize,
    x: &Scalar,
) -> Result<RegionIndex, LineSetError> {
    let pos = ls.position(id)?;
    if cc.n != ls.len() {
        return Err(LineSetError::Divisibility {
            n: ls.len(),
            c: cc.c,
        });
    }
    if let Some((j, _)) = ls.order[pos].iter().find(|(_, px)| px == x) {
        return Err(LineSetError::OnIntersection(ls.lines[*j].id));
    }
    // number of intersection points strictly left of x
    let left = ls.order[pos].partition_point(|(_, px)| px < x);
    // the point sits between P_{left} and P_{left+1}; segment c' covers
    // (c'-1)n/c <= left < c'n/c
    let seg = left / cc.block() + 1;
    Ok(RegionIndex::new(cc.class_of_position(pos), seg))
}

/// Closure of the convex hull of a region, possibly unbounded.
///
/// Bounded hulls list their vertices counter-clockwise. Unbounded hulls are
/// `vertices` (CCW chain from `u` to `w`) plus a ray arriving at `u` from
/// infinity along `-incoming` and a ray leaving `w` along `outgoing`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionHull {
    pub region: RegionIndex,
    pub vertices: Vec<Point>,
    pub incoming: Option<(Scalar, Scalar)>,
    pub outgoing: Option<(Scalar, Scalar)>,
    pub sides: Vec<HullSide>,
}

/// One side of a region hull; `to`/`from` are `None` at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullSide {
    pub label: usize,
    pub from: Option<Point>,
    pub to: Option<Point>,
    /// Direction of travel along the side (counter-clockwise).
    pub dir: (Scalar, Scalar),
}

impl HullSide {
    /// Point on the side's supporting line.
    pub fn anchor(&self) -> &Point {
        self.from
            .as_ref()
            .or(self.to.as_ref())
            .expect("side has a finite end")
    }

    /// Whether `p` lies on the closed side.
    pub fn contains(&self, p: &Point) -> bool {
        let a = self.anchor();
        let cross = &self.dir.0 * (&p.y - &a.y) - &self.dir.1 * (&p.x - &a.x);
        if !cross.is_zero() {
            return false;
        }
        let along = |q: &Point| &self.dir.0 * &q.x + &self.dir.1 * &q.y;
        let t = along(p);
        self.from.as_ref().is_none_or(|f| along(f) <= t)
            && self.to.as_ref().is_none_or(|q| t <= along(q))
    }
}

impl RegionHull {
    pub fn is_bounded(&self) -> bool {
        self.incoming.is_none()
    }

    pub fn side_count(&self) -> usize {
        self.sides.len()
    }

    /// Number of infinite directions (0 or 2).
    pub fn infinite_directions(&self) -> Vec<(Scalar, Scalar)> {
        match (&self.incoming, &self.outgoing) {
            (Some(a), Some(b)) => vec![a.clone(), b.clone()],
            _ => Vec::new(),
        }
    }

    /// Whether `p` is in the closed hull.
    pub fn contains(&self, p: &Point) -> bool {
        self.sides.iter().all(|s| {
            let a = s.anchor();
            let cross = &s.dir.0 * (&p.y - &a.y) - &s.dir.1 * (&p.x - &a.x);
            !cross.is_negative()
        }) && (self.sides.len() > 1 || self.vertices.len() <= 1)
    }
}

fn cross2(a: &(Scalar, Scalar), b: &(Scalar, Scalar)) -> Scalar {
    &a.0 * &b.1 - &a.1 * &b.0
}

fn dot2(a: &(Scalar, Scalar), p: &Point) -> Scalar {
    &a.0 * &p.x + &a.1 * &p.y
}

/// Closure of the convex hull of region `r`.
///
/// With a single class every region is the whole plane, which has no pointed
/// recession cone; that case is refused as [`LineSetError::EmptyRegion`].
pub fn region_hull(
    ls: &LineSet,
    cc: &ColorClasses,
    r: RegionIndex,
) -> Result<RegionHull, LineSetError> {
    if r.a == 0 || r.a > r.b || r.b > cc.c || cc.n != ls.len() {
        return Err(LineSetError::EmptyRegion(r.a, r.b));
    }
    let mut pts: BTreeSet<Point> = BTreeSet::new();
    let mut dirs: Vec<(Scalar, Scalar)> = Vec::new();
    let mut pieces = Vec::new();
    for pos in cc.members(r.b) {
        pieces.push((pos, r.a));
    }
    if r.a != r.b {
        for pos in cc.members(r.a) {
            pieces.push((pos, r.b));
        }
    }
    for (pos, seg) in pieces {
        let line = &ls.lines[pos];
        let (lo, hi) = segment_bounds(ls, cc, pos, seg);
        match &lo {
            Some(x) => {
                pts.insert(line.point_at(x));
            }
            None => dirs.push((Scalar::from_int(-1), -&line.slope)),
        }
        match &hi {
            Some(x) => {
                pts.insert(line.point_at(x));
            }
            None => dirs.push((Scalar::one(), line.slope.clone())),
        }
    }
    if pts.is_empty() {
        return Err(LineSetError::EmptyRegion(r.a, r.b));
    }
    let pts: Vec<Point> = pts.into_iter().collect();
    let hull = convex_hull(&pts);

    if dirs.is_empty() {
        let sides = label_bounded(&hull);
        return Ok(RegionHull {
            region: r,
            vertices: hull,
            incoming: None,
            outgoing: None,
            sides,
        });
    }

    // extreme directions of the recession cone: `out_dir` is clockwise-most,
    // `in_dir` counter-clockwise-most
    let out_dir = dirs
        .iter()
        .find(|d| dirs.iter().all(|e| !cross2(d, e).is_negative()))
        .cloned()
        .ok_or(LineSetError::EmptyRegion(r.a, r.b))?;
    let in_dir = dirs
        .iter()
        .find(|d| dirs.iter().all(|e| !cross2(d, e).is_positive()))
        .cloned()
        .ok_or(LineSetError::EmptyRegion(r.a, r.b))?;
    // outward normals of the two rays
    let n_out = (out_dir.1.clone(), -&out_dir.0);
    let n_in = (-&in_dir.1, in_dir.0.clone());

    let argbest = |normal: &(Scalar, Scalar), along: &(Scalar, Scalar)| -> usize {
        let mut best = 0;
        for k in 1..hull.len() {
            let c = dot2(normal, &hull[k]).cmp(&dot2(normal, &hull[best]));
            let tie_better = dot2(along, &hull[k]) < dot2(along, &hull[best]);
            if c == Ordering::Greater || (c == Ordering::Equal && tie_better) {
                best = k;
            }
        }
        best
    };
    let w = argbest(&n_out, &out_dir);
    let u = argbest(&n_in, &in_dir);
    let m = hull.len();
    let mut chain = vec![hull[u].clone()];
    let mut k = u;
    while k != w {
        k = (k + 1) % m;
        chain.push(hull[k].clone());
    }
    let sides = label_unbounded(&chain, &in_dir, &out_dir);
    Ok(RegionHull {
        region: r,
        vertices: chain,
        incoming: Some(in_dir),
        outgoing: Some(out_dir),
        sides,
    })
}

fn edge_dir(a: &Point, b: &Point) -> (Scalar, Scalar) {
    (&b.x - &a.x, &b.y - &a.y)
}

fn rotate_to_smallest(sides: &mut [HullSide]) {
    let start = sides
        .iter()
        .enumerate()
        .filter_map(|(k, s)| s.from.as_ref().map(|p| (p.clone(), k)))
        .min()
        .map(|(_, k)| k)
        .unwrap_or(0);
    sides.rotate_left(start);
    for (k, s) in sides.iter_mut().enumerate() {
        s.label = k + 1;
    }
}

fn label_bounded(hull: &[Point]) -> Vec<HullSide> {
    let m = hull.len();
    if m < 2 {
        return Vec::new();
    }
    let count = if m == 2 { 2 } else { m };
    let mut sides: Vec<HullSide> = (0..count)
        .map(|k| {
            let a = &hull[k % m];
            let b = &hull[(k + 1) % m];
            HullSide {
                label: 0,
                from: Some(a.clone()),
                to: Some(b.clone()),
                dir: edge_dir(a, b),
            }
        })
        .collect();
    rotate_to_smallest(&mut sides);
    sides
}

fn label_unbounded(
    chain: &[Point],
    in_dir: &(Scalar, Scalar),
    out_dir: &(Scalar, Scalar),
) -> Vec<HullSide> {
    let mut sides = vec![HullSide {
        label: 0,
        from: None,
        to: Some(chain[0].clone()),
        dir: (-&in_dir.0, -&in_dir.1),
    }];
    for w in chain.windows(2) {
        sides.push(HullSide {
            label: 0,
            from: Some(w[0].clone()),
            to: Some(w[1].clone()),
            dir: edge_dir(&w[0], &w[1]),
        });
    }
    sides.push(HullSide {
        label: 0,
        from: Some(chain[chain.len() - 1].clone()),
        to: None,
        dir: out_dir.clone(),
    });
    rotate_to_smallest(&mut sides);
    sides
}

/// Parameter interval `[t_in, t_out]` of `seg` inside the closed hull, with
/// the labels of the sides that bound it (`0` when the bound is the segment's
/// own endpoint). `None` if the segment misses the hull.
pub fn clip_segment(hull: &RegionHull, seg: &Segment) -> Option<(Scalar, Scalar, usize, usize)> {
    let mut t_in = Scalar::zero();
    let mut t_out = Scalar::one();
    let mut side_in = 0usize;
    let mut side_out = 0usize;
    let d = edge_dir(&seg.p, &seg.q);
    for s in &hull.sides {
        let a = s.anchor();
        // inside iff cross(dir, p - a) >= 0
        let f0 = &s.dir.0 * (&seg.p.y - &a.y) - &s.dir.1 * (&seg.p.x - &a.x);
        let df = cross2(&s.dir, &d);
        if df.is_zero() {
            if f0.is_negative() {
                return None;
            }
            continue;
        }
        let t = -&f0 / &df;
        if df.is_positive() {
            // entering constraint
            if t > t_in {
                t_in = t;
                side_in = s.label;
            }
        } else if t < t_out {
            t_out = t;
            side_out = s.label;
        }
    }
    if t_in > t_out {
        return None;
    }
    Some((t_in, t_out, side_in, side_out))
}
