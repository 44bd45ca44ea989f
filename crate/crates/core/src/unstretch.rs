//! Six-line frames, three-edge configurations and the chain argument showing
//! that such configurations cannot be drawn with straight segments.
//!
//! Frame lines are `L1..L6` in slope order. Edge `e_j` (j = 1, 2, 3) joins
//! `L_{2j}` (endpoint `A_j`) with `L_{2j-1}`. The three properties checked are
//!
//! * (i) the vertical line through the apex `L_{2j} ∩ L_{2j-1}` meets `e_j`
//!   strictly below the apex for j = 1, 3 and strictly above it for j = 2;
//! * (ii) every closed edge misses the convex hull of the 15 pairwise
//!   intersection points of the frame;
//! * (iii) `A_j` lies on the segment of `L_{2j}` between the apex and the
//!   crossing of `L_{2j}` with `e_{j+1}` (indices mod 3, 0 read as 3).
//!
//! These are stated for frames whose intersections run right to left along
//! every line ([`CapCup::Cup`] here). A [`CapCup::Cap`] frame is the mirror
//! image of such a frame under `y -> -y`; its configurations are checked by
//! reflecting both frame and edges, so every frame gets the configuration
//! the argument is about.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{
    convex_hull, line_intersection, segment_meets_convex, segments_intersect, AngleGap, GapClass,
    Line, Point, Segment,
};
use crate::hp::{angle_of_slope, distance, Hp};
use crate::lineset::{classify_cap_cup, CapCup, LineSet, LineSetError};
use crate::ramsey::{check_doubling, DoublingVariant};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("a frame needs exactly 6 lines, got {0}")]
    WrongCount(usize),
    #[error("frame lines must be listed by increasing slope")]
    NotSlopeOrdered,
    #[error("angle between the extreme lines is not below a right angle")]
    SpanTooWide,
    #[error("doubling inequality fails at j = {0}")]
    NotDoubling(usize),
    #[error("frame lines form neither a cap nor a cup")]
    NotCapOrCup,
    #[error(transparent)]
    Lines(#[from] LineSetError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SixLineFrame {
    lines: [Line; 6],
    pub variant: DoublingVariant,
    pub kind: CapCup,
}

impl SixLineFrame {
    pub fn lines(&self) -> &[Line; 6] {
        &self.lines
    }

    /// `L_k` for 1-based `k`.
    pub fn l(&self, k: usize) -> &Line {
        &self.lines[k - 1]
    }

    pub fn apex(&self, j: usize) -> Point {
        line_intersection(self.l(2 * j), self.l(2 * j - 1)).expect("frame lines are not parallel")
    }

    pub fn intersection_points(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(15);
        for i in 0..6 {
            for k in i + 1..6 {
                out.push(line_intersection(&self.lines[i], &self.lines[k]).expect("not parallel"));
            }
        }
        out
    }

    /// The frame in the orientation the properties are stated for.
    fn standard(&self) -> SixLineFrame {
        match self.kind {
            CapCup::Cap => self.reflected(),
            _ => self.clone(),
        }
    }

    /// Mirror image under `y -> -y`, re-sorted by slope.
    pub fn reflected(&self) -> SixLineFrame {
        let mut lines = self.lines.clone();
        lines.reverse();
        for l in lines.iter_mut() {
            *l = Line::new(-&l.slope, -&l.offset, l.id);
        }
        SixLineFrame {
            lines,
            variant: match self.variant {
                DoublingVariant::Lower => DoublingVariant::Upper,
                DoublingVariant::Upper => DoublingVariant::Lower,
            },
            kind: match self.kind {
                CapCup::Cap => CapCup::Cup,
                CapCup::Cup => CapCup::Cap,
                CapCup::Neither => CapCup::Neither,
            },
        }
    }
}

/// Builds a frame from 6 ids of `ls` and checks span, doubling and cap/cup.
pub fn validate_frame(ls: &LineSet, ids: &[usize]) -> Result<SixLineFrame, FrameError> {
    if ids.len() != 6 {
        return Err(FrameError::WrongCount(ids.len()));
    }
    let lines: Vec<Line> = ids
        .iter()
        .map(|&id| ls.line(id).cloned())
        .collect::<Result<_, _>>()?;
    if lines.windows(2).any(|w| w[0].slope >= w[1].slope) {
        return Err(FrameError::NotSlopeOrdered);
    }
    frame_from_lines(&lines, ls.subset(ids)?)
}

fn frame_from_lines(lines: &[Line], sub: LineSet) -> Result<SixLineFrame, FrameError> {
    if AngleGap::of_lines(&lines[0], &lines[5]).class != GapClass::Acute {
        return Err(FrameError::SpanTooWide);
    }
    let slopes: Vec<Scalar> = lines.iter().map(|l| l.slope.clone()).collect();
    let variant = match check_doubling(&slopes, DoublingVariant::Lower) {
        Ok(()) => DoublingVariant::Lower,
        Err(j) => match check_doubling(&slopes, DoublingVariant::Upper) {
            Ok(()) => DoublingVariant::Upper,
            Err(_) => return Err(FrameError::NotDoubling(j)),
        },
    };
    let kind = classify_cap_cup(&sub)?;
    if kind == CapCup::Neither {
        return Err(FrameError::NotCapOrCup);
    }
    Ok(SixLineFrame {
        lines: lines.to_vec().try_into().expect("six lines"),
        variant,
        kind,
    })
}

/// Edge `j` runs from `on_even[j]` (on `L_{2j}`) to `on_odd[j]` (on `L_{2j-1}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleEdgeConfig {
    pub on_even: [Point; 3],
    pub on_odd: [Point; 3],
}

impl TripleEdgeConfig {
    /// Endpoints given by their abscissae on the frame lines.
    pub fn from_abscissae(frame: &SixLineFrame, even_x: [Scalar; 3], odd_x: [Scalar; 3]) -> Self {
        let on_even = [0, 1, 2].map(|j| frame.l(2 * j + 2).point_at(&even_x[j]));
        let on_odd = [0, 1, 2].map(|j| frame.l(2 * j + 1).point_at(&odd_x[j]));
        TripleEdgeConfig { on_even, on_odd }
    }

    /// Edge `j` (1-based) as a segment from `A_j`.
    pub fn edge(&self, j: usize) -> Segment {
        Segment::new(self.on_even[j - 1].clone(), self.on_odd[j - 1].clone())
    }

    fn reflected(&self) -> TripleEdgeConfig {
        let flip = |p: &Point| Point::new(p.x.clone(), -&p.y);
        TripleEdgeConfig {
            on_even: [2, 1, 0].map(|k| flip(&self.on_odd[k])),
            on_odd: [2, 1, 0].map(|k| flip(&self.on_even[k])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    BelowAbove,
    HullDisjoint,
    Between,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigVerdict {
    Valid,
    Violation(Property, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("endpoint of edge {0} is not on its line")]
    Incidence(usize),
    #[error("edge {0} has coinciding endpoints")]
    Degenerate(usize),
    #[error("edge {1} does not cross the line carrying the endpoint of edge {0}")]
    MissingCrossing(usize, usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Skip property (ii); used as a mutation control for the search.
    pub skip_hull: bool,
    /// Check the configuration of the opposite handedness instead.
    pub opposite: bool,
}

pub fn validate_config(
    frame: &SixLineFrame,
    cfg: &TripleEdgeConfig,
) -> Result<ConfigVerdict, ConfigError> {
    validate_config_with(frame, cfg, CheckOptions::default())
}

pub fn validate_config_with(
    frame: &SixLineFrame,
    cfg: &TripleEdgeConfig,
    opts: CheckOptions,
) -> Result<ConfigVerdict, ConfigError> {
    for j in 1..=3 {
        if !frame.l(2 * j).contains(&cfg.on_even[j - 1])
            || !frame.l(2 * j - 1).contains(&cfg.on_odd[j - 1])
        {
            return Err(ConfigError::Incidence(j));
        }
        if cfg.on_even[j - 1] == cfg.on_odd[j - 1] {
            return Err(ConfigError::Degenerate(j));
        }
    }
    let mirrored = (frame.kind == CapCup::Cap) != opts.opposite;
    if !mirrored {
        return check_standard(frame, cfg, opts.skip_hull);
    }
    let back = |j: usize| 4 - j;
    match check_standard(&frame.reflected(), &cfg.reflected(), opts.skip_hull) {
        Ok(ConfigVerdict::Violation(p, j)) => Ok(ConfigVerdict::Violation(p, back(j))),
        Err(ConfigError::MissingCrossing(a, b)) => {
            Err(ConfigError::MissingCrossing(back(a), back(b)))
        }
        other => other,
    }
}

fn next(j: usize) -> usize {
    j % 3 + 1
}

fn check_standard(
    frame: &SixLineFrame,
    cfg: &TripleEdgeConfig,
    skip_hull: bool,
) -> Result<ConfigVerdict, ConfigError> {
    for j in 1..=3 {
        let apex = frame.apex(j);
        let e = cfg.edge(j);
        let (lo, hi) = if e.p.x <= e.q.x {
            (&e.p.x, &e.q.x)
        } else {
            (&e.q.x, &e.p.x)
        };
        let ok = lo <= &apex.x && &apex.x <= hi && lo != hi && {
            let t = (&apex.x - &e.p.x) / (&e.q.x - &e.p.x);
            let y = e.at(&t).y;
            if j == 2 {
                y > apex.y
            } else {
                y < apex.y
            }
        };
        if !ok {
            return Ok(ConfigVerdict::Violation(Property::BelowAbove, j));
        }
    }
    if !skip_hull {
        let hull = convex_hull(&frame.intersection_points());
        for j in 1..=3 {
            if segment_meets_convex(&cfg.edge(j), &hull) {
                return Ok(ConfigVerdict::Violation(Property::HullDisjoint, j));
            }
        }
    }
    for j in 1..=3 {
        let line = frame.l(2 * j);
        let q = match cfg.edge(next(j)).cross_line(line) {
            Some((_, q)) => q,
            None => return Err(ConfigError::MissingCrossing(j, next(j))),
        };
        let apex = frame.apex(j);
        let a = &cfg.on_even[j - 1].x;
        let (lo, hi) = if apex.x <= q.x {
            (&apex.x, &q.x)
        } else {
            (&q.x, &apex.x)
        };
        if !(lo <= a && a <= hi) {
            return Ok(ConfigVerdict::Violation(Property::Between, j));
        }
    }
    Ok(ConfigVerdict::Valid)
}

/// Whether the three edges are pairwise disjoint.
pub fn edges_pairwise_disjoint(cfg: &TripleEdgeConfig) -> bool {
    (1..=3)
        .all(|i| (i + 1..=3).all(|k| segments_intersect(&cfg.edge(i), &cfg.edge(k)).is_disjoint()))
}

/// Angles, lengths and the chain quantities of the argument.
#[derive(Debug, Clone)]
pub struct ChainValues {
    pub alpha: [Hp; 6],
    pub a: [Hp; 3],
    pub b: [Hp; 3],
    pub r: [Hp; 3],
}

/// `alpha_j` for j >= 2 is the angle between `L_{j-1}` and `L_j`;
/// `alpha_1 = pi - sum`.
fn frame_angles(frame: &SixLineFrame) -> [Hp; 6] {
    let theta: Vec<Hp> = frame
        .lines
        .iter()
        .map(|l| angle_of_slope(&l.slope))
        .collect();
    let pi = Hp::pi();
    let half = &pi / &Hp::from_i64(2);
    let mut alpha = vec![Hp::zero()];
    let mut sum = Hp::zero();
    for j in 1..6 {
        let g = &theta[j] - &theta[j - 1];
        let g = if g > half { &pi - &g } else { g };
        sum = &sum + &g;
        alpha.push(g);
    }
    alpha[0] = &pi - &sum;
    alpha.try_into().expect("six angles")
}

/// `B_j = L_{2j} ∩ L_{2(j-1)}` with index 0 read as 3.
fn b_points(frame: &SixLineFrame) -> [Point; 3] {
    [1, 2, 3].map(|j| {
        let prev = if j == 1 { 3 } else { j - 1 };
        line_intersection(frame.l(2 * j), frame.l(2 * prev)).expect("not parallel")
    })
}

/// Measures the chain quantities on a configuration with exact incidence:
/// `a_j = |A_j B_j|`, `b_j = |B_j A_{j-1}|`, `r_j = |B_j B_{j+1}|`.
pub fn derive_chain(
    frame: &SixLineFrame,
    cfg: &TripleEdgeConfig,
) -> Result<ChainValues, ConfigError> {
    for j in 1..=3 {
        if !frame.l(2 * j).contains(&cfg.on_even[j - 1])
            || !frame.l(2 * j - 1).contains(&cfg.on_odd[j - 1])
        {
            return Err(ConfigError::Incidence(j));
        }
    }
    let (f, c) = match frame.kind {
        CapCup::Cap => (frame.reflected(), cfg.reflected()),
        _ => (frame.clone(), cfg.clone()),
    };
    let bp = b_points(&f);
    let a = [0, 1, 2].map(|k| distance(&c.on_even[k], &bp[k]));
    let b = [0, 1, 2].map(|k| distance(&bp[k], &c.on_even[(k + 2) % 3]));
    let r = [0, 1, 2].map(|k| distance(&bp[k], &bp[(k + 1) % 3]));
    Ok(ChainValues {
        alpha: frame_angles(&f),
        a,
        b,
        r,
    })
}

/// Frame angles and triangle sides, with the remaining quantities forced by
/// the chain from the given `a_3`.
pub fn chain_from_frame(frame: &SixLineFrame, a3: Hp) -> ChainValues {
    let f = frame.standard();
    let bp = b_points(&f);
    let r = [0, 1, 2].map(|k| distance(&bp[k], &bp[(k + 1) % 3]));
    let alpha = frame_angles(&f);
    let forced = forced_chain(&sines(&alpha), &r, &a3);
    ChainValues {
        alpha,
        a: [forced.a1, forced.a2, a3],
        b: [forced.b1, forced.b2, forced.b3],
        r,
    }
}

#[derive(Debug, Clone)]
struct Forced {
    b3: Hp,
    a2: Hp,
    b2: Hp,
    a1: Hp,
    b1: Hp,
}

fn sines(alpha: &[Hp; 6]) -> [Hp; 6] {
    alpha.clone().map(|x| x.sin())
}

fn forced_chain(s: &[Hp; 6], r: &[Hp; 3], a3: &Hp) -> Forced {
    let b3 = &(&s[5] / &s[4]) * a3;
    let a2 = &b3 - &r[1];
    let b2 = &(&s[3] / &s[2]) * &a2;
    let a1 = &b2 - &r[0];
    let b1 = &(&s[1] / &s[0]) * &a1;
    Forced { b3, a2, b2, a1, b1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerdict {
    /// `b_1 - r_3 <= a_3`: the first inequality of the argument cannot hold.
    Contradiction,
    Consistent,
    /// Within the relative guard band.
    Indeterminate,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("sines are not monotone in either order; conclusion not certified")]
    HypothesisFail,
}

pub const GUARD_BAND: f64 = 1e-9;

/// Which sine ordering holds, if any: `sin a6 <= .. <= sin a2 <= sin a1` or
/// `sin a2 <= .. <= sin a6 <= sin a1`.
pub fn sine_hypothesis(alpha: &[Hp; 6]) -> Option<bool> {
    sines_ordered(&sines(alpha))
}

fn sines_ordered(s: &[Hp; 6]) -> Option<bool> {
    let descending = (1..5).all(|k| s[k + 1] <= s[k]) && s[1] <= s[0];
    let ascending = (1..5).all(|k| s[k] <= s[k + 1]) && s[5] <= s[0];
    if descending {
        Some(true)
    } else if ascending {
        Some(false)
    } else {
        None
    }
}

/// Recomputes the forced chain from `a_3`, `r` and the angles and compares
/// `b_1 - r_3` with `a_3`.
pub fn lemma24_check(cv: &ChainValues) -> Result<ChainVerdict, ChainError> {
    let s = sines(&cv.alpha);
    if sines_ordered(&s).is_none() {
        return Err(ChainError::HypothesisFail);
    }
    let f = forced_chain(&s, &cv.r, &cv.a[2]);
    let lhs = &f.b1 - &cv.r[2];
    Ok(match lhs.le_with_guard(&cv.a[2], GUARD_BAND) {
        Some(true) => ChainVerdict::Contradiction,
        Some(false) => ChainVerdict::Consistent,
        None => ChainVerdict::Indeterminate,
    })
}

/// The two regrouped sine products; both are at most 1 under the hypothesis.
pub fn sine_products(alpha: &[Hp; 6]) -> (Hp, Hp) {
    let s: Vec<Hp> = alpha.iter().map(|x| x.sin()).collect();
    let p1 = &(&(&s[1] / &s[0]) * &(&s[3] / &s[2])) * &(&s[5] / &s[4]);
    let p2 = &(&(&s[5] / &s[0]) * &(&s[1] / &s[2])) * &(&s[3] / &s[4]);
    (p1, p2)
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub samples: u64,
    pub seed: u64,
    pub check: CheckOptions,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub found: Option<TripleEdgeConfig>,
    pub evaluated: u64,
    pub exact_checks: u64,
    /// Smallest float violation seen (0 means a float-feasible candidate).
    pub best_violation: f64,
}

/// Independent randomized search for a configuration satisfying (i)-(iii).
/// `None` is what the argument predicts for a valid frame.
pub fn feasibility_search(
    frame: &SixLineFrame,
    samples: u64,
    seed: u64,
) -> Option<TripleEdgeConfig> {
    feasibility_search_with(
        frame,
        SearchOptions {
            samples,
            seed,
            check: CheckOptions::default(),
        },
    )
    .found
}

const SHARDS: u64 = 64;

pub fn feasibility_search_with(frame: &SixLineFrame, opts: SearchOptions) -> SearchReport {
    let mirrored = (frame.kind == CapCup::Cap) != opts.check.opposite;
    let std_frame = if mirrored {
        frame.reflected()
    } else {
        frame.clone()
    };
    let fast = FastFrame::new(&std_frame, opts.check.skip_hull);
    let per_shard = opts.samples.div_ceil(SHARDS);
    let results: Vec<(u64, Option<TripleEdgeConfig>, u64, u64, f64)> = (0..SHARDS)
        .into_par_iter()
        .map(|w| {
            let budget = per_shard.min(opts.samples.saturating_sub(w * per_shard));
            let mut rng =
                ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ w);
            run_shard(&fast, &std_frame, opts.check.skip_hull, budget, &mut rng, w)
        })
        .collect();
    let mut report = SearchReport {
        found: None,
        evaluated: 0,
        exact_checks: 0,
        best_violation: f64::INFINITY,
    };
    for (_, found, evaluated, exact, best) in results {
        report.evaluated += evaluated;
        report.exact_checks += exact;
        report.best_violation = report.best_violation.min(best);
        if report.found.is_none() {
            report.found = found;
        }
    }
    if let Some(cfg) = report.found.take() {
        let back = if mirrored { cfg.reflected() } else { cfg };
        let verdict = validate_config_with(frame, &back, opts.check);
        assert_eq!(
            verdict,
            Ok(ConfigVerdict::Valid),
            "search result failed the exact re-check"
        );
        report.found = Some(back);
    }
    report
}

/// Float image of a frame in standard orientation, for fast screening.
struct FastFrame {
    s: [f64; 6],
    b: [f64; 6],
    apex: [(f64, f64); 3],
    hull: Vec<(f64, f64)>,
    scale: f64,
    skip_hull: bool,
}

impl FastFrame {
    fn new(frame: &SixLineFrame, skip_hull: bool) -> Self {
        let s = frame.lines.clone().map(|l| l.slope.to_f64());
        let b = frame.lines.clone().map(|l| l.offset.to_f64());
        let apex = [1, 2, 3].map(|j| frame.apex(j).to_f64());
        let hull: Vec<(f64, f64)> = convex_hull(&frame.intersection_points())
            .iter()
            .map(|p| p.to_f64())
            .collect();
        let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &hull {
            lo_x = lo_x.min(x);
            hi_x = hi_x.max(x);
            lo_y = lo_y.min(y);
            hi_y = hi_y.max(y);
        }
        let scale = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
        FastFrame {
            s,
            b,
            apex,
            hull,
            scale,
            skip_hull,
        }
    }

    /// `k` is 1-based.
    fn y(&self, k: usize, x: f64) -> f64 {
        self.s[k - 1] * x - self.b[k - 1]
    }

    /// Total normalized violation of (i)-(iii); 0 when all hold with margin.
    fn violation(&self, even: &[f64; 3], odd: &[f64; 3]) -> f64 {
        let sc = self.scale;
        let mut v = 0.0;
        let pts: Vec<((f64, f64), (f64, f64))> = (0..3)
            .map(|k| {
                (
                    (even[k], self.y(2 * k + 2, even[k])),
                    (odd[k], self.y(2 * k + 1, odd[k])),
                )
            })
            .collect();
        for k in 0..3 {
            let (p, q) = pts[k];
            let (ax, ay) = self.apex[k];
            let lo = p.0.min(q.0);
            let hi = p.0.max(q.0);
            v += ((lo - ax).max(0.0) + (ax - hi).max(0.0)) / sc;
            let t = if hi > lo {
                ((ax - p.0) / (q.0 - p.0)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let yseg = p.1 + t * (q.1 - p.1);
            let want_below = k != 1;
            let gap = if want_below { ay - yseg } else { yseg - ay };
            v += (-gap).max(0.0) / sc + if gap == 0.0 { 1e-12 } else { 0.0 };
        }
        if !self.skip_hull {
            for &(p, q) in &pts {
                v += (-self.separation(p, q)).max(0.0) / sc;
            }
        }
        for k in 0..3 {
            let nk = (k + 1) % 3;
            let line = 2 * k + 2;
            let (p, q) = pts[nk];
            let fp = p.1 - self.y(line, p.0);
            let fq = q.1 - self.y(line, q.0);
            if fp * fq > 0.0 || fp == fq {
                v += fp.abs().min(fq.abs()) / sc + 1.0;
                continue;
            }
            let t = fp / (fp - fq);
            let qx = p.0 + t * (q.0 - p.0);
            let ax = self.apex[k].0;
            let lo = ax.min(qx);
            let hi = ax.max(qx);
            v += ((lo - even[k]).max(0.0) + (even[k] - hi).max(0.0)) / sc;
        }
        v
    }

    /// Signed distance separating the segment from the hull (positive when
    /// disjoint).
    fn separation(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        let h = &self.hull;
        let m = h.len();
        let mut best = f64::NEG_INFINITY;
        for i in 0..m {
            let a = h[i];
            let b = h[(i + 1) % m];
            let (ex, ey) = (b.0 - a.0, b.1 - a.1);
            let len = (ex * ex + ey * ey).sqrt();
            // outward normal of a CCW polygon edge
            let (nx, ny) = (ey / len, -ex / len);
            let dp = (p.0 - a.0) * nx + (p.1 - a.1) * ny;
            let dq = (q.0 - a.0) * nx + (q.1 - a.1) * ny;
            best = best.max(dp.min(dq));
        }
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let len = (dx * dx + dy * dy).sqrt();
        if len > 0.0 {
            let (nx, ny) = (-dy / len, dx / len);
            let d: Vec<f64> = h
                .iter()
                .map(|v| (v.0 - p.0) * nx + (v.1 - p.1) * ny)
                .collect();
            let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            best = best.max(lo).max(-hi);
        }
        best
    }

    /// A random point on line `k` at log-uniform distance from `x0`.
    fn offset_from(&self, rng: &mut ChaCha8Rng, x0: f64, sign: f64) -> f64 {
        let e: f64 = rng.gen_range(-6.0..3.0);
        x0 + sign * self.scale * 10f64.powf(e)
    }

    /// Crossing abscissa of the segment with line `k`, if any.
    fn cross_x(&self, p: (f64, f64), q: (f64, f64), k: usize) -> Option<f64> {
        let fp = p.1 - self.y(k, p.0);
        let fq = q.1 - self.y(k, q.0);
        if fp * fq > 0.0 || fp == fq {
            return None;
        }
        let t = fp / (fp - fq);
        Some(p.0 + t * (q.0 - p.0))
    }
}

fn run_shard(
    fast: &FastFrame,
    std_frame: &SixLineFrame,
    skip_hull: bool,
    budget: u64,
    rng: &mut ChaCha8Rng,
    shard: u64,
) -> (u64, Option<TripleEdgeConfig>, u64, u64, f64) {
    let mut used = 0u64;
    let mut exact = 0u64;
    let mut best = f64::INFINITY;
    let mut stratum = shard;
    while used < budget {
        stratum += 1;
        let (mut even, mut odd) = if stratum.is_multiple_of(2) {
            sample_free(fast, rng)
        } else {
            sample_chain(fast, rng, (stratum / 2 % 3) as usize)
        };
        let mut v = fast.violation(&even, &odd);
        used += 1;
        // short local refinement on promising candidates
        if v > 0.0 && v < 0.5 {
            let mut step = 0.5;
            for _ in 0..24 {
                if used >= budget {
                    break;
                }
                let mut e2 = even;
                let mut o2 = odd;
                let k = rng.gen_range(0..6);
                let (slot, x0) = if k < 3 {
                    (&mut e2[k], fast.apex[k].0)
                } else {
                    (&mut o2[k - 3], fast.apex[k - 3].0)
                };
                let d = *slot - x0;
                *slot = x0 + d * (1.0 + step * rng.gen_range(-1.0..1.0));
                let v2 = fast.violation(&e2, &o2);
                used += 1;
                if v2 < v {
                    even = e2;
                    odd = o2;
                    v = v2;
                } else {
                    step *= 0.85;
                }
                if v == 0.0 {
                    break;
                }
            }
        }
        best = best.min(v);
        if v <= 1e-9 {
            exact += 1;
            let cfg = TripleEdgeConfig::from_abscissae(
                std_frame,
                even.map(|x| Scalar::from_f64_dyadic(x, 48)),
                odd.map(|x| Scalar::from_f64_dyadic(x, 48)),
            );
            let verdict = check_standard_checked(std_frame, &cfg, skip_hull);
            if verdict {
                return (shard, Some(cfg), used, exact, best);
            }
        }
    }
    (shard, None, used, exact, best)
}

fn check_standard_checked(frame: &SixLineFrame, cfg: &TripleEdgeConfig, skip_hull: bool) -> bool {
    (1..=3).all(|j| cfg.on_even[j - 1] != cfg.on_odd[j - 1])
        && matches!(
            check_standard(frame, cfg, skip_hull),
            Ok(ConfigVerdict::Valid)
        )
}

fn sample_free(fast: &FastFrame, rng: &mut ChaCha8Rng) -> ([f64; 3], [f64; 3]) {
    let mut even = [0.0; 3];
    let mut odd = [0.0; 3];
    for k in 0..3 {
        let x0 = fast.apex[k].0;
        let se = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let so = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        even[k] = fast.offset_from(rng, x0, se);
        odd[k] = fast.offset_from(rng, x0, so);
    }
    (even, odd)
}

/// Builds the edges one after another so that each endpoint `A_j` is drawn
/// from the interval that (iii) allows, starting from edge `start`.
fn sample_chain(fast: &FastFrame, rng: &mut ChaCha8Rng, start: usize) -> ([f64; 3], [f64; 3]) {
    let (mut even, mut odd) = sample_free(fast, rng);
    // walk backwards: e_{j+1} fixes the interval for A_j
    let mut nk = start;
    for _ in 0..2 {
        let k = (nk + 2) % 3;
        let p = (even[nk], fast.y(2 * nk + 2, even[nk]));
        let q = (odd[nk], fast.y(2 * nk + 1, odd[nk]));
        if let Some(qx) = fast.cross_x(p, q, 2 * k + 2) {
            let ax = fast.apex[k].0;
            let u: f64 = rng.gen_range(0.0..1.0);
            even[k] = ax + u * (qx - ax);
            let so = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            odd[k] = fast.offset_from(rng, fast.apex[k].0, so);
        }
        nk = k;
    }
    (even, odd)
}

/// A random valid frame of the requested variant and kind, with dyadic
/// rational data. Angles are built by exact tangent addition.
pub fn random_frame<R: Rng>(rng: &mut R, variant: DoublingVariant, kind: CapCup) -> SixLineFrame {
    assert!(kind != CapCup::Neither);
    loop {
        let span: f64 = rng.gen_range(3.0..85.0);
        let mut gaps = vec![1.0f64];
        for _ in 0..4 {
            let sum: f64 = gaps.iter().sum();
            gaps.push(sum * rng.gen_range(1.05..1.8));
        }
        let total: f64 = gaps.iter().sum();
        let gaps: Vec<f64> = gaps.iter().map(|g| g * span / total).collect();
        let start: f64 = rng.gen_range(-88.0..(88.0 - span));
        let q = |d: f64| Scalar::from_f64_dyadic(d.to_radians().tan(), 40);
        let mut slopes = vec![q(start)];
        for g in &gaps {
            let s = slopes.last().unwrap();
            let u = q(*g);
            let denom = Scalar::one() - s * &u;
            slopes.push((s + &u) / denom);
        }
        if variant == DoublingVariant::Upper {
            slopes = slopes.iter().rev().map(|s| -s).collect();
        }
        let mut m = Scalar::from_f64_dyadic(rng.gen_range(-3.0..3.0), 20);
        let mut b = Scalar::from_f64_dyadic(rng.gen_range(-5.0..5.0), 20);
        let mut offsets = vec![b.clone()];
        for k in 1..6 {
            b = &b + &(&m * &(&slopes[k] - &slopes[k - 1]));
            offsets.push(b.clone());
            m = &m + &Scalar::from_f64_dyadic(rng.gen_range(0.1..2.0), 20);
        }
        let lines: Vec<Line> = (0..6)
            .map(|k| {
                let off = if kind == CapCup::Cap {
                    offsets[k].clone()
                } else {
                    -&offsets[k]
                };
                Line::new(slopes[k].clone(), off, k + 1)
            })
            .collect();
        let Ok(ls) = crate::lineset::verify_general_position(&lines) else {
            continue;
        };
        if let Ok(frame) = validate_frame(&ls, &[1, 2, 3, 4, 5, 6]) {
            if frame.variant == variant && frame.kind == kind {
                return frame;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(v: f64) -> Hp {
        Hp::from_f64(v)
    }

    fn deg(d: f64) -> Hp {
        &(&Hp::pi() / &Hp::from_i64(180)) * &hp(d)
    }

    #[test]
    fn ratios_one_chain() {
        // all six angles equal to pi/6 make every sine ratio 1
        let a = deg(30.0);
        let cv = ChainValues {
            alpha: [a.clone(), a.clone(), a.clone(), a.clone(), a.clone(), a],
            a: [hp(0.0), hp(0.0), hp(5.0)],
            b: [hp(0.0), hp(0.0), hp(0.0)],
            r: [hp(1.0), hp(1.0), hp(1.0)],
        };
        assert_eq!(lemma24_check(&cv), Ok(ChainVerdict::Contradiction));
        let f = forced_chain(&sines(&cv.alpha), &cv.r, &cv.a[2]);
        assert!(((&f.b1 - &cv.r[2]).to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ten_degree_chain() {
        let cv = ChainValues {
            alpha: [
                deg(130.0),
                deg(10.0),
                deg(10.0),
                deg(10.0),
                deg(10.0),
                deg(10.0),
            ],
            a: [hp(0.0), hp(0.0), hp(1.0)],
            b: [hp(0.0), hp(0.0), hp(0.0)],
            r: [hp(0.1), hp(0.1), hp(0.1)],
        };
        let f = forced_chain(&sines(&cv.alpha), &cv.r, &cv.a[2]);
        // independent f64 evaluation of the same five steps
        let s10 = 10f64.to_radians().sin();
        let s130 = 130f64.to_radians().sin();
        let b1 = s10 / s130 * (1.0 - 0.1 - 0.1);
        assert!((f.b1.to_f64() - b1).abs() < 1e-12);
        assert!(((&f.b1 - &cv.r[2]).to_f64() - (b1 - 0.1)).abs() < 1e-12);
        assert_eq!(lemma24_check(&cv), Ok(ChainVerdict::Contradiction));
    }

    #[test]
    fn hypothesis_failure_is_reported() {
        let cv = ChainValues {
            alpha: [
                deg(100.0),
                deg(10.0),
                deg(30.0),
                deg(5.0),
                deg(20.0),
                deg(15.0),
            ],
            a: [hp(0.0), hp(0.0), hp(1.0)],
            b: [hp(0.0), hp(0.0), hp(0.0)],
            r: [hp(0.1), hp(0.1), hp(0.1)],
        };
        assert_eq!(lemma24_check(&cv), Err(ChainError::HypothesisFail));
    }
}
