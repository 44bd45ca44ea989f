use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treelines::geometry::{convex_contains, convex_hull, line_intersection, Line, Point};
use treelines::hp::{angle_of_slope, distance, Hp};
use treelines::lineset::{CapCup, LineSet};
use treelines::ramsey::DoublingVariant;
use treelines::scalar::Scalar;
use treelines::unstretch::{
    chain_from_frame, derive_chain, edges_pairwise_disjoint, feasibility_search,
    feasibility_search_with, lemma24_check, random_frame, sine_hypothesis, sine_products,
    validate_config, validate_config_with, validate_frame, ChainError, ChainValues, ChainVerdict,
    CheckOptions, ConfigError, ConfigVerdict, FrameError, Property, SearchOptions, SixLineFrame,
    TripleEdgeConfig,
};

fn tan_add(a: &Scalar, b: &Scalar) -> Scalar {
    (a + b) / (Scalar::one() - a * b)
}

/// Frame lines with the given tangents, offsets on a parabola: `sign = 1`
/// makes a cap, `-1` a cup.
fn frame_from_slopes(slopes: &[Scalar], sign: i64) -> (LineSet, Vec<usize>) {
    let lines: Vec<Line> = slopes
        .iter()
        .enumerate()
        .map(|(i, s)| Line::new(s.clone(), s * s * Scalar::from_int(sign), i + 1))
        .collect();
    (LineSet::with_ids(&lines).unwrap(), (1..=6).collect())
}

/// Angles 0, t, 2t, 4t, 8t, 16t with `tan t = 1/57`, close to one degree.
fn doubling_slopes() -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(), Scalar::ratio(1, 57)];
    for _ in 0..4 {
        let last = out.last().unwrap().clone();
        out.push(tan_add(&last, &last));
    }
    out
}

fn hp_close(a: &Hp, b: &Hp, rel: f64) -> bool {
    let scale = a.abs().to_f64().max(b.abs().to_f64()).max(1e-300);
    (a - b).abs().to_f64() <= rel * scale
}

#[test]
fn doubling_frame_is_accepted() {
    let (ls, ids) = frame_from_slopes(&doubling_slopes(), 1);
    let f = validate_frame(&ls, &ids).unwrap();
    assert_eq!((f.variant, f.kind), (DoublingVariant::Lower, CapCup::Cap));
    let (ls, ids) = frame_from_slopes(&doubling_slopes(), -1);
    assert_eq!(validate_frame(&ls, &ids).unwrap().kind, CapCup::Cup);
}

#[test]
fn doubling_frame_admits_no_configuration() {
    let (ls, ids) = frame_from_slopes(&doubling_slopes(), 1);
    let f = validate_frame(&ls, &ids).unwrap();
    assert_eq!(feasibility_search(&f, 1_000_000, 42), None);
}

#[test]
fn frame_rejections() {
    // equal steps of about one degree: the third gap is smaller than the span so far
    let t = Scalar::ratio(1, 57);
    let mut equal = vec![Scalar::zero()];
    for _ in 0..5 {
        let last = equal.last().unwrap().clone();
        equal.push(tan_add(&last, &t));
    }
    let (ls, ids) = frame_from_slopes(&equal, 1);
    assert_eq!(validate_frame(&ls, &ids), Err(FrameError::NotDoubling(3)));

    let wide: Vec<Scalar> = [-2, -1, 0, 1, 2, 3]
        .iter()
        .map(|&v| Scalar::from_int(v))
        .collect();
    let (ls, ids) = frame_from_slopes(&wide, 1);
    assert_eq!(validate_frame(&ls, &ids), Err(FrameError::SpanTooWide));

    let (ls, _) = frame_from_slopes(&doubling_slopes(), 1);
    assert_eq!(
        validate_frame(&ls, &[1, 2, 3]),
        Err(FrameError::WrongCount(3))
    );
    assert_eq!(
        validate_frame(&ls, &[2, 1, 3, 4, 5, 6]),
        Err(FrameError::NotSlopeOrdered)
    );

    // a zigzag of offsets is neither cap nor cup
    let s = doubling_slopes();
    let lines: Vec<Line> = s
        .iter()
        .enumerate()
        .map(|(i, v)| Line::new(v.clone(), Scalar::from_int([0, 5, 1, 7, 2, 9][i]), i + 1))
        .collect();
    let ls = LineSet::with_ids(&lines).unwrap();
    assert_eq!(
        validate_frame(&ls, &[1, 2, 3, 4, 5, 6]),
        Err(FrameError::NotCapOrCup)
    );
}

fn cup_frame() -> SixLineFrame {
    let (ls, ids) = frame_from_slopes(&doubling_slopes(), -1);
    validate_frame(&ls, &ids).unwrap()
}

fn one() -> Scalar {
    Scalar::one()
}

/// Edges through the three apices, each on the side that property (i)
/// asks for in a cup frame.
fn xs_satisfying_i(f: &SixLineFrame) -> ([Scalar; 3], [Scalar; 3]) {
    let a = [1, 2, 3].map(|j| f.apex(j).x);
    (
        [&a[0] - &one(), &a[1] + &one(), &a[2] - &one()],
        [&a[0] + &one(), &a[1] - &one(), &a[2] + &one()],
    )
}

#[test]
fn edge_above_its_apex_violates_property_i() {
    let f = cup_frame();
    let (mut even, mut odd) = xs_satisfying_i(&f);
    let a1 = f.apex(1).x;
    even[0] = &a1 + &one();
    odd[0] = &a1 - &one();
    let cfg = TripleEdgeConfig::from_abscissae(&f, even, odd);
    assert_eq!(
        validate_config(&f, &cfg),
        Ok(ConfigVerdict::Violation(Property::BelowAbove, 1))
    );
}

#[test]
fn edge_into_the_hull_violates_property_ii() {
    let f = cup_frame();
    let hull = convex_hull(&f.intersection_points());
    let a1 = f.apex(1);
    // a point of L2 between the apex and another crossing on its left lies in the hull
    let left = (1..=6)
        .filter(|&k| k != 1 && k != 2)
        .map(|k| line_intersection(f.l(2), f.l(k)).unwrap())
        .filter(|p| p.x < a1.x)
        .min_by(|p, q| q.x.cmp(&p.x))
        .expect("a crossing left of the apex");
    let inside = a1.x.midpoint(&left.x);
    assert!(convex_contains(&hull, &f.l(2).point_at(&inside)));
    let (mut even, mut odd) = xs_satisfying_i(&f);
    even[0] = inside;
    odd[0] = &a1.x + &one();
    let cfg = TripleEdgeConfig::from_abscissae(&f, even, odd);
    assert_eq!(
        validate_config(&f, &cfg),
        Ok(ConfigVerdict::Violation(Property::HullDisjoint, 1))
    );
    let skip = CheckOptions {
        skip_hull: true,
        opposite: false,
    };
    assert_ne!(
        validate_config_with(&f, &cfg, skip),
        Ok(ConfigVerdict::Violation(Property::HullDisjoint, 1))
    );
}

#[test]
fn off_line_endpoint_is_an_error() {
    let f = cup_frame();
    let (even, odd) = xs_satisfying_i(&f);
    let mut cfg = TripleEdgeConfig::from_abscissae(&f, even, odd);
    cfg.on_odd[1] = Point::new(cfg.on_odd[1].x.clone(), &cfg.on_odd[1].y + &one());
    assert_eq!(validate_config(&f, &cfg), Err(ConfigError::Incidence(2)));
    assert!(matches!(
        derive_chain(&f, &cfg),
        Err(ConfigError::Incidence(2))
    ));
}

#[test]
fn angles_sum_to_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pi = Hp::pi();
    let tiny = Hp::from_f64(1e-60);
    for k in 0..8 {
        let variant = if k % 2 == 0 {
            DoublingVariant::Lower
        } else {
            DoublingVariant::Upper
        };
        let kind = if k < 4 { CapCup::Cap } else { CapCup::Cup };
        let f = random_frame(&mut rng, variant, kind);
        let cv = chain_from_frame(&f, Hp::from_i64(1));
        let sum = cv.alpha.iter().fold(Hp::zero(), |a, b| &a + b);
        assert!((&sum - &pi).abs() <= tiny);
        assert!(cv.alpha.iter().all(|a| !a.is_negative()));
    }
}

// the three B points form a triangle whose sides lie on L2, L4 and L6
#[test]
fn triangle_sides_follow_the_law_of_sines() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..8 {
        let variant = if k % 2 == 0 {
            DoublingVariant::Lower
        } else {
            DoublingVariant::Upper
        };
        let f = random_frame(&mut rng, variant, CapCup::Cup);
        let r = chain_from_frame(&f, Hp::from_i64(1)).r;
        let th = |k: usize| angle_of_slope(&f.l(k).slope);
        let s42 = (&th(4) - &th(2)).sin();
        let s64 = (&th(6) - &th(4)).sin();
        let s62 = (&th(6) - &th(2)).sin();
        assert!(hp_close(&(&r[0] * &s42), &(&r[2] * &s64), 1e-40));
        assert!(hp_close(&(&r[1] * &s42), &(&r[2] * &s62), 1e-40));
    }
}

fn incident_config(rng: &mut ChaCha8Rng, f: &SixLineFrame) -> TripleEdgeConfig {
    let mut x = || Scalar::ratio(rng.gen_range(-4000..4000), rng.gen_range(1..50));
    let even = [x(), x(), x()];
    let odd = [x(), x(), x()];
    TripleEdgeConfig::from_abscissae(f, even, odd)
}

fn translate(f: &SixLineFrame, dx: &Scalar, dy: &Scalar) -> SixLineFrame {
    let lines: Vec<Line> = f
        .lines()
        .iter()
        .map(|l| Line::new(l.slope.clone(), &l.offset + &(&(&l.slope * dx) - dy), l.id))
        .collect();
    let ids: Vec<usize> = lines.iter().map(|l| l.id).collect();
    validate_frame(&LineSet::with_ids(&lines).unwrap(), &ids).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_frames_validate(seed in any::<u64>(), upper in any::<bool>(), cap in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = if upper { DoublingVariant::Upper } else { DoublingVariant::Lower };
        let kind = if cap { CapCup::Cap } else { CapCup::Cup };
        let f = random_frame(&mut rng, variant, kind);
        let ls = LineSet::with_ids(f.lines()).unwrap();
        let ids: Vec<usize> = f.lines().iter().map(|l| l.id).collect();
        let g = validate_frame(&ls, &ids).unwrap();
        prop_assert_eq!(g.kind, kind);
        prop_assert_eq!(g, f);
    }

    #[test]
    fn verdicts_survive_translation(seed in any::<u64>(), dx in -50i64..50, dy in -50i64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if seed % 2 == 0 { CapCup::Cap } else { CapCup::Cup };
        let f = random_frame(&mut rng, DoublingVariant::Lower, kind);
        let (dx, dy) = (Scalar::from_int(dx), Scalar::from_int(dy));
        let g = translate(&f, &dx, &dy);
        for _ in 0..4 {
            let cfg = incident_config(&mut rng, &f);
            let moved = TripleEdgeConfig {
                on_even: cfg.on_even.clone().map(|p| p.translate(&dx, &dy)),
                on_odd: cfg.on_odd.clone().map(|p| p.translate(&dx, &dy)),
            };
            prop_assert_eq!(validate_config(&f, &cfg), validate_config(&g, &moved));
        }
    }

    #[test]
    fn measured_lengths_are_distances(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_frame(&mut rng, DoublingVariant::Upper, CapCup::Cup);
        let cfg = incident_config(&mut rng, &f);
        let cv = derive_chain(&f, &cfg).unwrap();
        let b = |j: usize, k: usize| line_intersection(f.l(j), f.l(k)).unwrap();
        let bp = [b(2, 6), b(4, 2), b(6, 4)];
        for j in 0..3 {
            prop_assert!(hp_close(&cv.a[j], &distance(&cfg.on_even[j], &bp[j]), 1e-60));
            prop_assert!(hp_close(&cv.b[j], &distance(&bp[j], &cfg.on_even[(j + 2) % 3]), 1e-60));
            prop_assert!(hp_close(&cv.r[j], &distance(&bp[j], &bp[(j + 1) % 3]), 1e-60));
            prop_assert!(!cv.a[j].is_negative() && !cv.b[j].is_negative() && !cv.r[j].is_negative());
        }
    }

    #[test]
    fn monotone_sines_force_the_contradiction(
        gaps in prop::collection::vec(0.001f64..0.3, 5),
        ascending in any::<bool>(),
        a3 in 0.01f64..100.0,
        r in prop::collection::vec(0.01f64..100.0, 3),
    ) {
        let mut g = gaps.clone();
        g.sort_by(f64::total_cmp);
        if !ascending {
            g.reverse();
        }
        let hp: Vec<Hp> = g.iter().map(|&v| Hp::from_f64(v)).collect();
        let sum = hp.iter().fold(Hp::zero(), |a, b| &a + b);
        let alpha = [&Hp::pi() - &sum, hp[0].clone(), hp[1].clone(), hp[2].clone(), hp[3].clone(), hp[4].clone()];
        prop_assert_eq!(sine_hypothesis(&alpha), Some(!ascending));
        let (p1, p2) = sine_products(&alpha);
        prop_assert!(p1 <= Hp::from_i64(1) && p2 <= Hp::from_i64(1));
        let cv = ChainValues {
            alpha,
            a: [Hp::zero(), Hp::zero(), Hp::from_f64(a3)],
            b: [Hp::zero(), Hp::zero(), Hp::zero()],
            r: [Hp::from_f64(r[0]), Hp::from_f64(r[1]), Hp::from_f64(r[2])],
        };
        prop_assert_eq!(lemma24_check(&cv), Ok(ChainVerdict::Contradiction));
    }
}

#[test]
fn unordered_sines_are_not_certified() {
    let a = |v: f64| Hp::from_f64(v);
    let rest = [0.1, 0.3, 0.1, 0.3, 0.1];
    let sum: f64 = rest.iter().sum();
    let alpha = [
        a(std::f64::consts::PI - sum),
        a(0.1),
        a(0.3),
        a(0.1),
        a(0.3),
        a(0.1),
    ];
    assert_eq!(sine_hypothesis(&alpha), None);
    let cv = ChainValues {
        alpha,
        a: [a(1.0), a(1.0), a(1.0)],
        b: [a(1.0), a(1.0), a(1.0)],
        r: [a(1.0), a(1.0), a(1.0)],
    };
    assert_eq!(lemma24_check(&cv), Err(ChainError::HypothesisFail));
}

// with the handedness flipped the argument does not apply, so the search
// finds configurations; all of them keep the three edges apart
#[test]
fn mirrored_configurations_have_disjoint_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = CheckOptions {
        skip_hull: true,
        opposite: true,
    };
    let mut found = 0;
    for k in 0..6 {
        let kind = if k % 2 == 0 { CapCup::Cap } else { CapCup::Cup };
        let f = random_frame(&mut rng, DoublingVariant::Lower, kind);
        let rep = feasibility_search_with(
            &f,
            SearchOptions {
                samples: 200_000,
                seed: k,
                check: opts,
            },
        );
        if let Some(cfg) = rep.found {
            assert_eq!(
                validate_config_with(&f, &cfg, opts),
                Ok(ConfigVerdict::Valid)
            );
            assert!(edges_pairwise_disjoint(&cfg));
            found += 1;
        }
    }
    assert!(found > 0);
}
