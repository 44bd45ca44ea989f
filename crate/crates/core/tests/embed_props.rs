mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_cap, random_lines};
use treelines::embed::{
    build_iota, build_theorem_tree, candidate_positions, check_embedding, color_type, comb_type,
    path_descriptor, scan_universality, solve, theorem_tree_size, Assignment, CombTuple,
    EmbedError, Embedding, RegionMap, SolveOutcome, Tree, Verdict, Warning,
};
use treelines::geometry::{segments_intersect, Point, Segment, SegmentContact, TouchKind};
use treelines::lineset::{region_of, ColorClasses, RegionIndex};
use treelines::scalar::Scalar;

/// Crossing-free by definition: distinct vertices, edges sharing a vertex
/// meet only there, all other edges are disjoint.
fn oracle(pts: &[Point], edges: &[(usize, usize)]) -> bool {
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i] == pts[j] {
                return false;
            }
        }
    }
    let seg = |e: (usize, usize)| Segment::new(pts[e.0].clone(), pts[e.1].clone());
    for (k, &e) in edges.iter().enumerate() {
        for &f in &edges[k + 1..] {
            let shared = [e.0, e.1].into_iter().find(|v| *v == f.0 || *v == f.1);
            match (segments_intersect(&seg(e), &seg(f)), shared) {
                (SegmentContact::Disjoint, None) => {}
                (SegmentContact::Touch(TouchKind::EndpointEndpoint, p), Some(v)) if p == pts[v] => {
                }
                _ => return false,
            }
        }
    }
    true
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Tree {
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    Tree::from_edges(n, &edges).unwrap()
}

fn identity(n: usize) -> Assignment {
    Assignment {
        iota: (1..=n).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn checker_agrees_with_definition(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = random_lines(&mut rng, n);
        let t = random_tree(&mut rng, n);
        let mut iota: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            iota.swap(i, rng.gen_range(0..=i));
        }
        let asg = Assignment { iota };
        // coarse grid so that contacts of every kind turn up
        let pos: Vec<Scalar> = (0..n).map(|_| Scalar::from_int(rng.gen_range(-3..4))).collect();
        let emb = Embedding { pos };
        let rep = check_embedding(&ls, &t, &asg, &emb).unwrap();
        let pts = emb.points(&ls, &asg).unwrap();
        prop_assert_eq!(rep.verdict == Verdict::CrossingFree, oracle(&pts, &t.edges()));
    }

    #[test]
    fn solutions_are_crossing_free(seed in any::<u64>(), n in 3usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = random_lines(&mut rng, n);
        let t = random_tree(&mut rng, n);
        let asg = identity(n);
        if let SolveOutcome::Found(emb) = solve(&ls, &t, &asg, 2, 1000, seed).unwrap() {
            let pts = emb.points(&ls, &asg).unwrap();
            prop_assert!(oracle(&pts, &t.edges()));
            let rep = check_embedding(&ls, &t, &asg, &emb).unwrap();
            prop_assert!(rep.warnings.is_empty());
        }
    }

    #[test]
    fn comb_type_reverses(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = random_lines(&mut rng, 6);
        let cc = ColorClasses::new(6, 3).unwrap();
        let map = RegionMap::new(&ls, &cc).unwrap();
        let mut pick = || (rng.gen_range(1..=6usize), Scalar::ratio(rng.gen_range(-900..900), rng.gen_range(1..9)));
        let (u, v) = (pick(), pick());
        if let (Ok(f), Ok(b)) = (comb_type(&map, (u.0, &u.1), (v.0, &v.1)), comb_type(&map, (v.0, &v.1), (u.0, &u.1))) {
            let back: Vec<CombTuple> =
                f.iter().rev().map(|c| CombTuple { region: c.region, entry: c.exit, exit: c.entry }).collect();
            prop_assert_eq!(b, back);
            prop_assert_eq!(f[0].region, region_of(&ls, &cc, u.0, &u.1).unwrap());
            prop_assert_eq!(f.last().unwrap().region, region_of(&ls, &cc, v.0, &v.1).unwrap());
        }
    }
}

#[test]
fn candidate_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 3..7 {
        let ls = random_lines(&mut rng, n);
        for refine in 1..4 {
            let c = candidate_positions(&ls, 1, refine).unwrap();
            // refine points in each of the n - 2 gaps, one beyond each end
            assert_eq!(c.len(), (n - 2) * refine + 2);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn every_bijection_of_a_three_path_embeds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ls = random_lines(&mut rng, 3);
    let rep = scan_universality(&ls, &Tree::path(3), 4, 1000, 0, false).unwrap();
    assert_eq!((rep.found_count(), rep.entries.len()), (6, 6));
    let firsts: Vec<Vec<usize>> = rep
        .entries
        .iter()
        .map(|e| e.assignment.iota.clone())
        .collect();
    assert_eq!(firsts[0], vec![1, 2, 3]);
    assert_eq!(firsts[5], vec![3, 2, 1]);
}

#[test]
fn scan_size_guard() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ls = random_lines(&mut rng, 8);
    assert_eq!(
        scan_universality(&ls, &Tree::path(8), 1, 10, 0, false).unwrap_err(),
        EmbedError::TooLarge(8)
    );
    let small = random_lines(&mut rng, 4);
    assert!(matches!(
        scan_universality(&small, &Tree::path(5), 1, 10, 0, false),
        Err(EmbedError::SizeMismatch { .. })
    ));
}

#[test]
fn solver_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ls = random_lines(&mut rng, 5);
    let t = Tree::star(5);
    let asg = Assignment {
        iota: vec![3, 1, 5, 2, 4],
    };
    let a = solve(&ls, &t, &asg, 4, 1000, 9).unwrap();
    assert!(a.is_found());
    assert_eq!(a, solve(&ls, &t, &asg, 4, 1000, 9).unwrap());
}

#[test]
fn assignment_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ls = random_lines(&mut rng, 3);
    let t = Tree::path(3);
    assert_eq!(
        Assignment {
            iota: vec![1, 1, 2]
        }
        .validate(&ls, &t),
        Err(EmbedError::NotInjective(1))
    );
    assert!(Assignment { iota: vec![1, 2] }.validate(&ls, &t).is_err());
    assert!(Assignment {
        iota: vec![1, 2, 9]
    }
    .validate(&ls, &t)
    .is_err());
    let emb = Embedding {
        pos: vec![Scalar::zero(); 2],
    };
    assert_eq!(
        check_embedding(&ls, &t, &identity(3), &emb).unwrap_err(),
        EmbedError::MissingPosition(2)
    );
}

#[test]
fn vertex_on_a_crossing_is_flagged() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ls = random_lines(&mut rng, 3);
    let (_, x) = ls.order_at(0)[0].clone();
    let emb = Embedding {
        pos: vec![x, Scalar::from_int(1000), Scalar::from_int(-1000)],
    };
    let rep = check_embedding(&ls, &Tree::star(3), &identity(3), &emb).unwrap();
    assert!(rep.warnings.contains(&Warning::VertexOnIntersection(0)));
}

#[test]
fn theorem_tree_and_quotas() {
    for (d, delta) in [(1, 2), (2, 2), (2, 4), (3, 3)] {
        let t = build_theorem_tree(d, delta).unwrap();
        let want = (0..=d).map(|k| delta.pow(k as u32)).sum::<usize>() - 1;
        assert_eq!(t.n(), want);
        assert_eq!(theorem_tree_size(d, delta), want);
    }
    assert_eq!(build_theorem_tree(0, 2).unwrap_err(), EmbedError::BadShape);

    let (d, delta, c) = (2, 4, 2);
    let t = build_theorem_tree(d, delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ls = random_lines(&mut rng, t.n());
    let cc = ColorClasses::new(t.n(), c).unwrap();
    let asg = build_iota(&t, &ls, &cc, delta, 1).unwrap();
    assert_eq!(asg.iota[0], ls.at(0).id);
    let last_parent = t.parent(t.n() - 1).unwrap();
    for v in 0..t.n() {
        let ch = t.children(v);
        if ch.is_empty() {
            continue;
        }
        for k in 1..=c {
            let got = ch
                .iter()
                .filter(|&&w| cc.class_of(&ls, asg.iota[w]).unwrap() == k)
                .count();
            let short = usize::from(v == last_parent && k == 1);
            assert_eq!(got, delta / c - short, "vertex {v} class {k}");
        }
    }
    assert_eq!(
        build_iota(&t, &ls, &cc, 3, 1).unwrap_err(),
        EmbedError::Divisibility { delta: 3, c: 2 }
    );
}

#[test]
fn color_type_reads_classes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ls = random_lines(&mut rng, 6);
    let cc = ColorClasses::new(6, 3).unwrap();
    let t = Tree::path(6);
    // classes of 2 lines each: {1, 2}, {3, 4}, {5, 6}
    let asg = Assignment {
        iota: vec![3, 4, 1, 2, 5, 6],
    };
    assert_eq!(color_type(&ls, &t, &asg, &cc, &[0, 1]).unwrap(), vec![2, 2]);
    assert_eq!(
        color_type(&ls, &t, &asg, &cc, &[1, 2, 3, 4]).unwrap(),
        vec![2, 1, 1, 3]
    );
    assert_eq!(
        color_type(&ls, &t, &asg, &cc, &[2, 1]).unwrap_err(),
        EmbedError::NotAPath
    );
}

#[test]
fn comb_type_inside_one_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ls = random_cap(&mut rng, 6);
    let cc = ColorClasses::new(6, 3).unwrap();
    let map = RegionMap::new(&ls, &cc).unwrap();
    let row = ls.order_at(0);
    let a = &row[0].1 - &Scalar::from_int(2);
    let b = &row[0].1 - &Scalar::one();
    let id = ls.at(0).id;
    let ct = comb_type(&map, (id, &a), (id, &b)).unwrap();
    assert_eq!(
        ct,
        vec![CombTuple {
            region: region_of(&ls, &cc, id, &a).unwrap(),
            entry: 0,
            exit: 0
        }]
    );
    // through a crossing of the arrangement
    let c = &row[0].1 + &Scalar::one();
    assert_eq!(
        comb_type(&map, (id, &a), (id, &c)).unwrap_err(),
        EmbedError::DegenerateContact
    );
}

#[test]
fn path_descriptor_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ls = random_cap(&mut rng, 6);
    let t = Tree::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
    let asg = identity(3);
    // far left of every crossing
    let far = |k: i64| Scalar::from_int(-100_000 * k);
    let emb = Embedding {
        pos: vec![far(1), far(2), far(3)],
    };
    let paths = [vec![0, 1], vec![0, 2]];

    // all three lines in the first class
    let two = ColorClasses::new(6, 2).unwrap();
    let map = RegionMap::new(&ls, &two).unwrap();
    let d = path_descriptor(&map, &t, &asg, &emb, &paths).unwrap();
    let start = ls.line(1).unwrap().point_at(&far(1));
    assert_eq!(d.visited[0], RegionIndex::new(1, 1));
    assert_eq!(d.visited.last(), Some(&RegionIndex::new(1, 1)));
    for p in &d.entry_points {
        assert_eq!(p.len(), d.visited.len());
        assert_eq!(p[0], start);
    }
    assert_eq!(d.doors.len(), d.visited.len());
    assert_eq!(d.doors[0], vec![start]);
    assert_eq!(
        path_descriptor(&map, &t, &asg, &emb, &[vec![0, 1], vec![1]]).unwrap_err(),
        EmbedError::MixedStart
    );
    assert_eq!(
        path_descriptor(&map, &t, &asg, &emb, &[vec![1, 2]]).unwrap_err(),
        EmbedError::NotAPath
    );

    // lines 1, 2 form the first class and line 3 the second, so the two
    // paths end in different regions
    let three = ColorClasses::new(6, 3).unwrap();
    let map = RegionMap::new(&ls, &three).unwrap();
    let single = path_descriptor(&map, &t, &asg, &emb, &paths[..1]).unwrap();
    assert_eq!(
        single.visited,
        vec![region_of(&ls, &three, 1, &far(1)).unwrap()]
    );
    assert_eq!(
        path_descriptor(&map, &t, &asg, &emb, &paths).unwrap_err(),
        EmbedError::NonUniform
    );
}

#[test]
fn tree_shapes_are_trees() {
    for n in 1..=6 {
        for t in Tree::all_shapes(n) {
            assert_eq!(t.n(), n);
            assert_eq!(t.edges().len(), n - 1);
            assert_eq!(t.bfs_order().len(), n);
        }
    }
}
