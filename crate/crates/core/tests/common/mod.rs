#![allow(dead_code)]

use rand::Rng;
use treelines::geometry::{Line, Point};
use treelines::lineset::{verify_general_position, LineSet};
use treelines::scalar::Scalar;

pub fn small_rational<R: Rng>(rng: &mut R, range: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(-range..=range), rng.gen_range(1..=9))
}

/// Random lines in general position, ids 1..n by slope. The coordinate range
/// grows with `n` so that retries stay rare.
pub fn random_lines<R: Rng>(rng: &mut R, n: usize) -> LineSet {
    let range = 6 * (n as i64).pow(2) + 60;
    loop {
        let lines: Vec<Line> = (0..n)
            .map(|i| {
                Line::new(
                    small_rational(rng, range),
                    small_rational(rng, range),
                    i + 1,
                )
            })
            .collect();
        if let Ok(ls) = verify_general_position(&lines) {
            return ls;
        }
    }
}

/// Lines dual to points on the parabola `y = x^2` at distinct random
/// abscissae: a cap.
pub fn random_cap<R: Rng>(rng: &mut R, n: usize) -> LineSet {
    loop {
        let mut xs: Vec<Scalar> = (0..n).map(|_| small_rational(rng, 200)).collect();
        xs.sort();
        xs.dedup();
        if xs.len() < n {
            continue;
        }
        let lines: Vec<Line> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| Line::new(x.clone(), x * x, i + 1))
            .collect();
        return verify_general_position(&lines)
            .expect("points on a parabola are in convex position");
    }
}

pub fn pt(x: i64, y: i64) -> Point {
    Point::from_ints(x, y)
}

pub fn line(s: (i64, i64), b: (i64, i64), id: usize) -> Line {
    Line::new(Scalar::ratio(s.0, s.1), Scalar::ratio(b.0, b.1), id)
}
