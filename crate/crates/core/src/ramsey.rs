//! Monochromatic paths in 2-colored 3-uniform hypergraphs, and the monotone
//! and doubling angle-gap subsets they yield for line sets.
//!
//! Vertex and triple indices here are 0-based positions; line subsets are
//! reported by line id.

use std::cmp::Ordering;

use thiserror::Error;

use crate::geometry::{AngleGap, GapClass};
use crate::lineset::LineSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RamseyError {
    #[error("at least 3 vertices are needed, got {0}")]
    TooFew(usize),
    #[error("doubling subsequence has only {0} lines")]
    ChainTooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Blue,
}

/// Two-coloring of all triples `i < j < k` of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleColoring {
    n: usize,
    colors: Vec<Color>,
}

impl TripleColoring {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Color) -> Self {
        let mut colors = vec![Color::Red; n * n * n];
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    colors[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
        TripleColoring { n, colors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Color of the triple; arguments must satisfy `i < j < k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Color {
        debug_assert!(i < j && j < k && k < self.n);
        self.colors[(i * self.n + j) * self.n + k]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperPath {
    pub vertices: Vec<usize>,
    pub color: Color,
}

impl HyperPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Increasing vertices and every consecutive triple in `self.color`.
    pub fn is_valid_in(&self, tc: &TripleColoring) -> bool {
        self.vertices.windows(2).all(|w| w[0] < w[1])
            && self.vertices.last().is_none_or(|&v| v < tc.n())
            && self
                .vertices
                .windows(3)
                .all(|w| tc.get(w[0], w[1], w[2]) == self.color)
    }
}

/// Lexicographically smallest longest path of one color.
///
/// `suffix[i][j]` is the number of vertices of the longest path of this color
/// that starts with the consecutive pair `(i, j)`.
fn best_path_of_color(tc: &TripleColoring, color: Color) -> Vec<usize> {
    let n = tc.n();
    let mut suffix = vec![vec![2u32; n]; n];
    for j in (0..n).rev() {
        for i in (0..j).rev() {
            let mut best = 2;
            for k in j + 1..n {
                if tc.get(i, j, k) == color {
                    best = best.max(suffix[j][k] + 1);
                }
            }
            suffix[i][j] = best;
        }
    }
    let mut start = (0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if suffix[i][j] > suffix[start.0][start.1] {
                start = (i, j);
            }
        }
    }
    let (mut i, mut j) = start;
    let mut path = vec![i, j];
    while suffix[i][j] > 2 {
        let need = suffix[i][j] - 1;
        let k = (j + 1..n)
            .find(|&k| tc.get(i, j, k) == color && suffix[j][k] == need)
            .expect("suffix table is consistent");
        path.push(k);
        i = j;
        j = k;
    }
    path
}

/// Longest monochromatic tight path, ties broken towards the lexicographically
/// smallest vertex sequence and then towards red.
pub fn longest_mono_path(tc: &TripleColoring) -> Result<HyperPath, RamseyError> {
    if tc.n() < 3 {
        return Err(RamseyError::TooFew(tc.n()));
    }
    let red = best_path_of_color(tc, Color::Red);
    let blue = best_path_of_color(tc, Color::Blue);
    let pick_blue = match blue.len().cmp(&red.len()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => blue < red,
    };
    Ok(if pick_blue {
        HyperPath {
            vertices: blue,
            color: Color::Blue,
        }
    } else {
        HyperPath {
            vertices: red,
            color: Color::Red,
        }
    })
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
    }
    acc
}

/// Largest `k` with `C(2k-4, k-2) + 1 <= n`: the guaranteed monochromatic path
/// length for any coloring of `n` vertices.
pub fn mono_path_bound(n: usize) -> usize {
    let mut k = 2usize;
    while binomial(2 * (k as u64 + 1) - 4, k as u64 + 1 - 2) < n as u128 {
        k += 1;
    }
    k
}

/// Red iff the later gap is strictly smaller than the earlier one.
pub fn color_by_gaps(ls: &LineSet) -> Result<TripleColoring, RamseyError> {
    let n = ls.len();
    if n < 3 {
        return Err(RamseyError::TooFew(n));
    }
    let slopes: Vec<_> = ls.lines().iter().map(|l| l.slope.clone()).collect();
    let mut gaps = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            gaps[i][j] = Some(AngleGap::between(&slopes[i], &slopes[j]));
        }
    }
    Ok(TripleColoring::from_fn(n, |i, j, k| {
        let earlier = gaps[i][j].as_ref().expect("filled");
        let later = gaps[j][k].as_ref().expect("filled");
        if later < earlier {
            Color::Red
        } else {
            Color::Blue
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapDirection {
    NonDecreasing,
    NonIncreasing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneGapChain {
    pub ids: Vec<usize>,
    pub direction: GapDirection,
}

/// Whether consecutive angle gaps of the given ids are monotone.
pub fn gaps_are_monotone(ls: &LineSet, ids: &[usize], direction: GapDirection) -> bool {
    let slopes: Vec<_> = ids
        .iter()
        .map(|&id| ls.line(id).map(|l| l.slope.clone()))
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    if slopes.len() != ids.len() || slopes.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let gaps: Vec<AngleGap> = slopes
        .windows(2)
        .map(|w| AngleGap::between(&w[0], &w[1]))
        .collect();
    gaps.windows(2).all(|w| match direction {
        GapDirection::NonDecreasing => w[0] <= w[1],
        GapDirection::NonIncreasing => w[0] >= w[1],
    })
}

pub fn extract_monotone_gaps(ls: &LineSet) -> Result<MonotoneGapChain, RamseyError> {
    let tc = color_by_gaps(ls)?;
    let path = longest_mono_path(&tc)?;
    let ids: Vec<usize> = path.vertices.iter().map(|&p| ls.at(p).id).collect();
    let direction = match path.color {
        Color::Red => GapDirection::NonIncreasing,
        Color::Blue => GapDirection::NonDecreasing,
    };
    assert!(
        gaps_are_monotone(ls, &ids, direction),
        "gap chain lost monotonicity"
    );
    Ok(MonotoneGapChain { ids, direction })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DoublingVariant {
    /// `a(j+1) - a(j) >= a(j) - a(1)`.
    Lower,
    /// `a(j) - a(j-1) >= a(k) - a(j)`.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoublingChain {
    pub ids: Vec<usize>,
    pub variant: DoublingVariant,
}

/// Checks the doubling inequalities on slopes sorted increasingly.
/// Returns the first failing 1-based `j`, or 0 when the span is not acute.
pub fn check_doubling(
    slopes: &[crate::scalar::Scalar],
    variant: DoublingVariant,
) -> Result<(), usize> {
    let k = slopes.len();
    if k >= 2 && AngleGap::between(&slopes[0], &slopes[k - 1]).class != GapClass::Acute {
        return Err(0);
    }
    let gap = |a: usize, b: usize| AngleGap::between(&slopes[a], &slopes[b]);
    // j runs over 2..=k-1 in 1-based terms
    for j in 1..k.saturating_sub(1) {
        let ok = match variant {
            DoublingVariant::Lower => gap(j, j + 1) >= gap(0, j),
            DoublingVariant::Upper => gap(j - 1, j) >= gap(j, k - 1),
        };
        if !ok {
            return Err(j + 1);
        }
    }
    Ok(())
}

pub fn extract_doubling(ls: &LineSet) -> Result<DoublingChain, RamseyError> {
    if ls.len() < 3 {
        return Err(RamseyError::TooFew(ls.len()));
    }
    let (neg, nonneg): (Vec<_>, Vec<_>) = ls.lines().iter().partition(|l| l.slope.is_negative());
    let majority: Vec<usize> = if neg.len() > nonneg.len() {
        neg
    } else {
        nonneg
    }
    .iter()
    .map(|l| l.id)
    .collect();
    if majority.len() < 3 {
        return Err(RamseyError::ChainTooShort(majority.len()));
    }
    let sub = ls.subset(&majority).expect("subset of a valid set");
    let chain = extract_monotone_gaps(&sub).map_err(|_| RamseyError::ChainTooShort(sub.len()))?;
    let len = chain.ids.len();
    let mut picks: Vec<usize> = Vec::new();
    let mut step = 1usize;
    while step <= len {
        picks.push(step - 1);
        step *= 2;
    }
    let (ids, variant) = match chain.direction {
        GapDirection::NonDecreasing => (
            picks.iter().map(|&p| chain.ids[p]).collect::<Vec<_>>(),
            DoublingVariant::Lower,
        ),
        GapDirection::NonIncreasing => {
            let mut ids: Vec<usize> = picks.iter().map(|&p| chain.ids[len - 1 - p]).collect();
            ids.reverse();
            (ids, DoublingVariant::Upper)
        }
    };
    if ids.len() < 3 {
        return Err(RamseyError::ChainTooShort(ids.len()));
    }
    let slopes: Vec<_> = ids
        .iter()
        .map(|&id| ls.line(id).expect("id").slope.clone())
        .collect();
    assert!(
        check_doubling(&slopes, variant).is_ok(),
        "doubling inequalities failed"
    );
    Ok(DoublingChain { ids, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Line;
    use crate::lineset::verify_general_position;
    use crate::scalar::Scalar;

    fn ls_from_slopes(slopes: &[Scalar]) -> LineSet {
        // offsets i^2 keep the lines in general position
        let lines: Vec<Line> = slopes
            .iter()
            .enumerate()
            .map(|(i, s)| Line::new(s.clone(), Scalar::from_int((i * i) as i64), i + 1))
            .collect();
        verify_general_position(&lines).unwrap()
    }

    fn tan_deg(d: f64) -> Scalar {
        Scalar::from_f64_dyadic(d.to_radians().tan(), 48)
    }

    #[test]
    fn bound_table() {
        assert_eq!(mono_path_bound(3), 3);
        assert_eq!(mono_path_bound(6), 3);
        assert_eq!(mono_path_bound(7), 4);
        assert_eq!(mono_path_bound(20), 4);
        assert_eq!(mono_path_bound(21), 5);
        assert_eq!(mono_path_bound(71), 6);
        assert_eq!(mono_path_bound(100), 6);
        assert_eq!(mono_path_bound(253), 7);
    }

    #[test]
    fn uniform_and_single_triple() {
        let all_red = TripleColoring::from_fn(6, |_, _, _| Color::Red);
        let p = longest_mono_path(&all_red).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(p.color, Color::Red);

        let one = TripleColoring::from_fn(3, |_, _, _| Color::Blue);
        let p = longest_mono_path(&one).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 2]);
        assert_eq!(p.color, Color::Blue);
    }

    #[test]
    fn gap_coloring_examples() {
        let tc = color_by_gaps(&ls_from_slopes(&[
            Scalar::zero(),
            Scalar::one(),
            Scalar::from_int(3),
        ]))
        .unwrap();
        assert_eq!(tc.get(0, 1, 2), Color::Red);
        // atan(1/2) on both sides of slope 0: exactly equal gaps
        let eq = color_by_gaps(&ls_from_slopes(&[
            Scalar::ratio(-1, 2),
            Scalar::zero(),
            Scalar::ratio(1, 2),
        ]))
        .unwrap();
        assert_eq!(eq.get(0, 1, 2), Color::Blue);
    }

    #[test]
    fn doubling_angles_form_nondecreasing_chain() {
        // angles 0, t, 2t, 4t, 8t, 16t exactly, through the tangent doubling formula
        let t = Scalar::ratio(1, 57);
        let mut slopes = vec![Scalar::zero(), t.clone()];
        let mut cur = t;
        for _ in 0..4 {
            cur = Scalar::from_int(2) * &cur / (Scalar::one() - &cur * &cur);
            slopes.push(cur.clone());
        }
        let ls = ls_from_slopes(&slopes);
        let ch = extract_monotone_gaps(&ls).unwrap();
        assert_eq!(ch.ids, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(ch.direction, GapDirection::NonDecreasing);
        let d = extract_doubling(&ls).unwrap();
        assert_eq!(d.ids, vec![1, 2, 4]);
        assert_eq!(d.variant, DoublingVariant::Lower);
    }

    #[test]
    fn reversed_angles_form_nonincreasing_chain() {
        let slopes: Vec<Scalar> = [0.0, 8.0, 12.0, 14.0, 15.0, 15.5]
            .iter()
            .map(|&d| tan_deg(d))
            .collect();
        let ls = ls_from_slopes(&slopes);
        let ch = extract_monotone_gaps(&ls).unwrap();
        assert_eq!(ch.ids.len(), 6);
        assert_eq!(ch.direction, GapDirection::NonIncreasing);
        let d = extract_doubling(&ls).unwrap();
        assert_eq!(d.variant, DoublingVariant::Upper);
        assert_eq!(d.ids, vec![3, 5, 6]);
    }

    #[test]
    fn equal_spacing_is_not_doubling() {
        // tan(k t) for k = 0..6 via the exact addition formula
        let t = Scalar::ratio(1, 11);
        let mut slopes = vec![Scalar::zero()];
        for _ in 0..5 {
            let last = slopes.last().unwrap().clone();
            slopes.push((&last + &t) / (Scalar::one() - &last * &t));
        }
        assert_eq!(check_doubling(&slopes, DoublingVariant::Lower), Err(3));
    }
}
