//! Trees drawn on line sets: exact validity, a search solver, universality
//! scans and the region-walk descriptors of embedded paths.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{convex_hull, segments_intersect, Point, Segment, SegmentContact, TouchKind};
use crate::lineset::{
    clip_segment, region_hull, region_of, ColorClasses, LineSet, LineSetError, RegionHull,
    RegionIndex,
};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("{edges} edges for {n} vertices")]
    WrongEdgeCount { n: usize, edges: usize },
    #[error("root 0 has a parent")]
    RootHasParent,
    #[error("vertex {0} has more than one parent")]
    MultipleParents(usize),
    #[error("vertex {0} is not reachable from the root")]
    Unreachable(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Lines(#[from] LineSetError),
    #[error("{vertices} vertices but {lines} lines")]
    SizeMismatch { vertices: usize, lines: usize },
    #[error("assignment is not total: vertex {0} has no line")]
    NotTotal(usize),
    #[error("assignment is not injective: line {0} used twice")]
    NotInjective(usize),
    #[error("embedding has no position for vertex {0}")]
    MissingPosition(usize),
    #[error("{0}! bijections is too many without --force")]
    TooLarge(usize),
    #[error("vertex sequence is not a directed path of the tree")]
    NotAPath,
    #[error("paths do not start at the same vertex")]
    MixedStart,
    #[error("paths visit different region sequences")]
    NonUniform,
    #[error("edge passes through an intersection point of the arrangement")]
    DegenerateContact,
    #[error("delta {delta} is not divisible by c = {c}")]
    Divisibility { delta: usize, c: usize },
    #[error("theorem tree needs d >= 1 and delta >= 2")]
    BadShape,
}

/// Rooted tree on vertices `0..n`, root 0, edges directed away from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl Tree {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() + 1 != n {
            return Err(TreeError::WrongEdgeCount {
                n,
                edges: edges.len(),
            });
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p >= n {
                return Err(TreeError::VertexOutOfRange(p));
            }
            if c >= n {
                return Err(TreeError::VertexOutOfRange(c));
            }
            if c == 0 {
                return Err(TreeError::RootHasParent);
            }
            if parent[c].is_some() {
                return Err(TreeError::MultipleParents(c));
            }
            parent[c] = Some(p);
            children[p].push(c);
        }
        for ch in children.iter_mut() {
            ch.sort_unstable();
        }
        let t = Tree { parent, children };
        let order = t.bfs_order();
        if order.len() != n {
            let mut seen = vec![false; n];
            for v in order {
                seen[v] = true;
            }
            let v = seen.iter().position(|s| !s).expect("some vertex unseen");
            return Err(TreeError::Unreachable(v));
        }
        Ok(t)
    }

    pub fn path(n: usize) -> Tree {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Tree::from_edges(n, &edges).expect("path")
    }

    pub fn star(n: usize) -> Tree {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Tree::from_edges(n, &edges).expect("star")
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Edges `(parent, child)` sorted by child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.n())
            .filter_map(|c| self.parent[c].map(|p| (p, c)))
            .collect()
    }

    pub fn bfs_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            out.push(v);
            q.extend(self.children[v].iter().copied());
        }
        out
    }

    pub fn is_directed_path(&self, path: &[usize]) -> bool {
        !path.is_empty()
            && path.iter().all(|&v| v < self.n())
            && path.windows(2).all(|w| self.parent[w[1]] == Some(w[0]))
    }

    /// One rooted representative of every unlabeled tree on `n` vertices.
    pub fn all_shapes(n: usize) -> Vec<Tree> {
        if n == 1 {
            return vec![Tree::from_edges(1, &[]).expect("single vertex")];
        }
        if n == 2 {
            return vec![Tree::path(2)];
        }
        let mut seen: BTreeMap<String, Tree> = BTreeMap::new();
        let mut seq = vec![0usize; n - 2];
        loop {
            let adj = prufer_decode(&seq, n);
            let key = (0..n)
                .map(|r| rooted_code(&adj, r, usize::MAX))
                .min()
                .expect("n >= 1");
            seen.entry(key).or_insert_with(|| root_at_zero(&adj));
            // next sequence in base n
            let mut k = 0;
            while k < seq.len() && seq[k] == n - 1 {
                seq[k] = 0;
                k += 1;
            }
            if k == seq.len() {
                break;
            }
            seq[k] += 1;
        }
        seen.into_values().collect()
    }
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut adj = vec![Vec::new(); n];
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        adj[leaf].push(s);
        adj[s].push(leaf);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    adj[rest[0]].push(rest[1]);
    adj[rest[1]].push(rest[0]);
    adj
}

fn rooted_code(adj: &[Vec<usize>], v: usize, from: usize) -> String {
    let mut parts: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| w != from)
        .map(|&w| rooted_code(adj, w, v))
        .collect();
    parts.sort();
    format!("({})", parts.concat())
}

fn root_at_zero(adj: &[Vec<usize>]) -> Tree {
    let n = adj.len();
    // relabel in BFS order from vertex 0
    let mut label = vec![usize::MAX; n];
    let mut order = vec![0usize];
    label[0] = 0;
    let mut edges = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let v = order[k];
        for &w in &adj[v] {
            if label[w] == usize::MAX {
                label[w] = order.len();
                order.push(w);
                edges.push((label[v], label[w]));
            }
        }
        k += 1;
    }
    Tree::from_edges(n, &edges).expect("relabeled tree")
}

/// Bijection from vertices to line ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub iota: Vec<usize>,
}

impl Assignment {
    pub fn validate(&self, ls: &LineSet, t: &Tree) -> Result<(), EmbedError> {
        if ls.len() != t.n() {
            return Err(EmbedError::SizeMismatch {
                vertices: t.n(),
                lines: ls.len(),
            });
        }
        if self.iota.len() != t.n() {
            return Err(EmbedError::NotTotal(self.iota.len().min(t.n())));
        }
        let mut used = vec![false; ls.len()];
        for &id in &self.iota {
            let pos = ls.position(id)?;
            if used[pos] {
                return Err(EmbedError::NotInjective(id));
            }
            used[pos] = true;
        }
        Ok(())
    }
}

/// Abscissa of every vertex; the point of `v` is on line `iota(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub pos: Vec<Scalar>,
}

impl Embedding {
    pub fn points(&self, ls: &LineSet, asg: &Assignment) -> Result<Vec<Point>, EmbedError> {
        self.pos
            .iter()
            .zip(&asg.iota)
            .map(|(x, &id)| Ok(ls.line(id)?.point_at(x)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    CoincidentVertices,
    VertexOnEdge,
    ProperCross,
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Vertices(usize, usize),
    VertexEdge(usize, (usize, usize)),
    Edges((usize, usize), (usize, usize)),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    CrossingFree,
    Violation(ViolationKind, Witness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    VertexOnIntersection(usize),
    EdgeThroughIntersection((usize, usize)),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub verdict: Verdict,
    pub warnings: Vec<Warning>,
}

fn edge_key(e: (usize, usize)) -> (usize, usize) {
    (e.0.min(e.1), e.0.max(e.1))
}

/// First violation between a set of vertex points and edges, in canonical
/// order so that enumeration order never matters.
fn first_violation(
    points: &[Option<Point>],
    edges: &[(usize, usize)],
) -> Option<(ViolationKind, Witness)> {
    let placed: Vec<usize> = (0..points.len()).filter(|&v| points[v].is_some()).collect();
    for (i, &a) in placed.iter().enumerate() {
        for &b in &placed[i + 1..] {
            if points[a] == points[b] {
                return Some((ViolationKind::CoincidentVertices, Witness::Vertices(a, b)));
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = edges.iter().map(|&e| edge_key(e)).collect();
    edges.sort_unstable();
    let seg = |e: (usize, usize)| {
        Segment::new(
            points[e.0].clone().expect("placed"),
            points[e.1].clone().expect("placed"),
        )
    };
    for (i, &e) in edges.iter().enumerate() {
        let s = seg(e);
        for &f in &edges[i + 1..] {
            let shares = e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1;
            let kind = match segments_intersect(&s, &seg(f)) {
                SegmentContact::Disjoint => None,
                SegmentContact::ProperCross(_) => Some(ViolationKind::ProperCross),
                SegmentContact::Overlap => Some(ViolationKind::Overlap),
                SegmentContact::Touch(TouchKind::EndpointEndpoint, _) if shares => None,
                SegmentContact::Touch(TouchKind::EndpointEndpoint, _) => {
                    Some(ViolationKind::CoincidentVertices)
                }
                SegmentContact::Touch(TouchKind::EndpointInterior, p) => {
                    let v = [e.0, e.1, f.0, f.1]
                        .into_iter()
                        .find(|&v| points[v].as_ref() == Some(&p))
                        .expect("touch point is a vertex");
                    let host = if v == e.0 || v == e.1 { f } else { e };
                    return Some((ViolationKind::VertexOnEdge, Witness::VertexEdge(v, host)));
                }
            };
            if let Some(k) = kind {
                return Some((k, Witness::Edges(e, f)));
            }
        }
    }
    for &e in &edges {
        let s = seg(e);
        for &v in &placed {
            if v != e.0 && v != e.1 && s.contains(points[v].as_ref().expect("placed")) {
                return Some((ViolationKind::VertexOnEdge, Witness::VertexEdge(v, e)));
            }
        }
    }
    None
}

/// Exact validity of a straight-line embedding, plus warnings where a vertex
/// or an edge meets an intersection point of the arrangement.
pub fn check_embedding(
    ls: &LineSet,
    t: &Tree,
    asg: &Assignment,
    emb: &Embedding,
) -> Result<EmbeddingReport, EmbedError> {
    asg.validate(ls, t)?;
    if emb.pos.len() != t.n() {
        return Err(EmbedError::MissingPosition(emb.pos.len().min(t.n())));
    }
    let pts = emb.points(ls, asg)?;
    let opt: Vec<Option<Point>> = pts.iter().cloned().map(Some).collect();
    let edges = t.edges();
    let verdict = match first_violation(&opt, &edges) {
        None => Verdict::CrossingFree,
        Some((k, w)) => Verdict::Violation(k, w),
    };
    let crossings = ls.intersection_points();
    let mut warnings = Vec::new();
    for (v, p) in pts.iter().enumerate() {
        if crossings.contains(p) {
            warnings.push(Warning::VertexOnIntersection(v));
        }
    }
    for &(a, b) in &edges {
        if pts[a] == pts[b] {
            continue;
        }
        let s = Segment::new(pts[a].clone(), pts[b].clone());
        if crossings.iter().any(|c| s.contains(c)) {
            warnings.push(Warning::EdgeThroughIntersection((a, b)));
        }
    }
    Ok(EmbeddingReport { verdict, warnings })
}

/// Solver candidates on one line: `refine` evenly spaced points strictly
/// inside every finite interval between consecutive intersection points,
/// plus one point beyond each extreme intersection.
pub fn candidate_positions(
    ls: &LineSet,
    line_id: usize,
    refine: usize,
) -> Result<Vec<Scalar>, EmbedError> {
    let refine = refine.max(1);
    let pos = ls.position(line_id)?;
    let xs: Vec<&Scalar> = ls.order_at(pos).iter().map(|(_, x)| x).collect();
    let Some(first) = xs.first() else {
        return Ok(vec![Scalar::zero()]);
    };
    let mut out = vec![*first - Scalar::one()];
    let den = Scalar::from_int(refine as i64 + 1);
    for w in xs.windows(2) {
        let step = (w[1] - w[0]) / &den;
        for k in 1..=refine {
            out.push(w[0] + &(&step * &Scalar::from_int(k as i64)));
        }
    }
    out.push(*xs.last().expect("nonempty") + Scalar::one());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Found(Embedding),
    NotFound { nodes: u64, restarts: u64 },
}

impl SolveOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SolveOutcome::Found(_))
    }
}

/// Cap on backtracking nodes before falling back to random restarts.
pub const NODE_LIMIT: u64 = 20_000;

/// Placement order: root-first BFS, children with more children first.
fn placement_order(t: &Tree) -> Vec<usize> {
    let mut out = Vec::with_capacity(t.n());
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        out.push(v);
        let mut ch = t.children(v).to_vec();
        ch.sort_by_key(|&c| (std::cmp::Reverse(t.children(c).len()), c));
        q.extend(ch);
    }
    out
}

struct Partial<'a> {
    t: &'a Tree,
    points: Vec<Option<Point>>,
    edges: Vec<(usize, usize)>,
}

impl Partial<'_> {
    /// Whether placing `v` at `p` keeps the partial drawing valid.
    fn fits(&self, v: usize, p: &Point) -> bool {
        if self.points.iter().flatten().any(|q| q == p) {
            return false;
        }
        let pt = |w: usize| self.points[w].as_ref().expect("placed");
        for &(a, b) in &self.edges {
            if Segment::new(pt(a).clone(), pt(b).clone()).contains(p) {
                return false;
            }
        }
        let Some(par) = self.t.parent(v) else {
            return true;
        };
        let s = Segment::new(pt(par).clone(), p.clone());
        for (w, q) in self.points.iter().enumerate() {
            if let Some(q) = q {
                if w != par && s.contains(q) {
                    return false;
                }
            }
        }
        self.edges.iter().all(|&(a, b)| {
            let shares = a == par || b == par;
            match segments_intersect(&s, &Segment::new(pt(a).clone(), pt(b).clone())) {
                SegmentContact::Disjoint => true,
                SegmentContact::Touch(TouchKind::EndpointEndpoint, _) => shares,
                _ => false,
            }
        })
    }

    fn place(&mut self, v: usize, p: Point) {
        self.points[v] = Some(p);
        if let Some(par) = self.t.parent(v) {
            self.edges.push((par, v));
        }
    }

    fn unplace(&mut self, v: usize) {
        self.points[v] = None;
        if self.t.parent(v).is_some() {
            self.edges.pop();
        }
    }
}

/// Semi-decision search for a crossing-free embedding. `NotFound` only means
/// the budget ran out.
pub fn solve(
    ls: &LineSet,
    t: &Tree,
    asg: &Assignment,
    refine: usize,
    budget: u64,
    seed: u64,
) -> Result<SolveOutcome, EmbedError> {
    asg.validate(ls, t)?;
    let n = t.n();
    let order = placement_order(t);
    let lines: Vec<_> = asg
        .iota
        .iter()
        .map(|&id| ls.line(id).cloned())
        .collect::<Result<_, _>>()?;
    let cands: Vec<Vec<Scalar>> = asg
        .iota
        .iter()
        .map(|&id| candidate_positions(ls, id, refine))
        .collect::<Result<_, _>>()?;
    let mut partial = Partial {
        t,
        points: vec![None; n],
        edges: Vec::new(),
    };
    let mut nodes = 0u64;
    if backtrack(&order, 0, &lines, &cands, &mut partial, &mut nodes) {
        let pos = partial
            .points
            .iter()
            .map(|p| p.as_ref().expect("placed").x.clone())
            .collect();
        return finish(ls, t, asg, Embedding { pos });
    }

    // random restarts with per-vertex resampling
    let xs: Vec<Scalar> = ls.intersection_points().into_iter().map(|p| p.x).collect();
    let lo = xs
        .iter()
        .min()
        .cloned()
        .unwrap_or_else(Scalar::zero)
        .to_f64();
    let hi = xs
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(Scalar::zero)
        .to_f64();
    let width = (hi - lo).max(1.0);
    let breaks: Vec<Vec<Scalar>> = asg
        .iota
        .iter()
        .map(|&id| {
            Ok(ls
                .order_at(ls.position(id)?)
                .iter()
                .map(|(_, x)| x.clone())
                .collect())
        })
        .collect::<Result<_, EmbedError>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let mut partial = Partial {
            t,
            points: vec![None; n],
            edges: Vec::new(),
        };
        let mut ok = true;
        for &v in &order {
            let line = &lines[v];
            let anchor = t
                .parent(v)
                .and_then(|p| partial.points[p].as_ref().map(|q| q.x.to_f64()));
            let mut placed = false;
            for _ in 0..40 {
                let x = match anchor {
                    Some(a) if rng.gen_bool(0.7) => {
                        a + rng.gen_range(-1.0..1.0) * width * 10f64.powf(rng.gen_range(-3.0..0.5))
                    }
                    _ => rng.gen_range(lo - width..hi + width),
                };
                let x = Scalar::from_f64_dyadic(x, 30);
                if breaks[v].contains(&x) {
                    continue;
                }
                let p = line.point_at(&x);
                if partial.fits(v, &p) {
                    partial.place(v, p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            let pos = partial
                .points
                .iter()
                .map(|p| p.as_ref().expect("placed").x.clone())
                .collect();
            if let SolveOutcome::Found(e) = finish(ls, t, asg, Embedding { pos })? {
                return Ok(SolveOutcome::Found(e));
            }
        }
    }
    Ok(SolveOutcome::NotFound {
        nodes,
        restarts: budget,
    })
}

fn finish(
    ls: &LineSet,
    t: &Tree,
    asg: &Assignment,
    emb: Embedding,
) -> Result<SolveOutcome, EmbedError> {
    let report = check_embedding(ls, t, asg, &emb)?;
    assert_eq!(
        report.verdict,
        Verdict::CrossingFree,
        "solver produced an invalid embedding"
    );
    Ok(SolveOutcome::Found(emb))
}

fn backtrack(
    order: &[usize],
    k: usize,
    lines: &[crate::geometry::Line],
    cands: &[Vec<Scalar>],
    partial: &mut Partial,
    nodes: &mut u64,
) -> bool {
    if k == order.len() {
        return true;
    }
    let v = order[k];
    let mut list: Vec<&Scalar> = cands[v].iter().collect();
    // short edges first
    if let Some(par) = partial.t.parent(v) {
        let px = partial.points[par]
            .as_ref()
            .expect("parent placed")
            .x
            .clone();
        list.sort_by_cached_key(|x| (*x - &px).abs());
    }
    for x in list {
        if *nodes >= NODE_LIMIT {
            return false;
        }
        *nodes += 1;
        let p = lines[v].point_at(x);
        if partial.fits(v, &p) {
            partial.place(v, p);
            if backtrack(order, k + 1, lines, cands, partial, nodes) {
                return true;
            }
            partial.unplace(v);
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub assignment: Assignment,
    pub found: bool,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub entries: Vec<ScanEntry>,
}

impl ScanReport {
    pub fn found_count(&self) -> usize {
        self.entries.iter().filter(|e| e.found).count()
    }

    /// Bijections the solver could not embed; candidates, not certificates.
    pub fn candidates(&self) -> Vec<&Assignment> {
        self.entries
            .iter()
            .filter(|e| !e.found)
            .map(|e| &e.assignment)
            .collect()
    }
}

pub const SCAN_LIMIT: usize = 7;

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = items.to_vec();
    cur.sort_unstable();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..cur.len().saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            break;
        };
        let j = (i + 1..cur.len())
            .rev()
            .find(|&j| cur[j] > cur[i])
            .expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Runs the solver on every bijection, in lexicographic order of the line-id
/// sequence.
pub fn scan_universality(
    ls: &LineSet,
    t: &Tree,
    refine: usize,
    budget: u64,
    seed: u64,
    force: bool,
) -> Result<ScanReport, EmbedError> {
    if ls.len() != t.n() {
        return Err(EmbedError::SizeMismatch {
            vertices: t.n(),
            lines: ls.len(),
        });
    }
    if t.n() > SCAN_LIMIT && !force {
        return Err(EmbedError::TooLarge(t.n()));
    }
    let perms = permutations(&ls.ids());
    let entries: Vec<ScanEntry> = perms
        .into_par_iter()
        .enumerate()
        .map(|(k, iota)| {
            let assignment = Assignment { iota };
            let found = solve(
                ls,
                t,
                &assignment,
                refine,
                budget,
                seed.wrapping_add(k as u64),
            )?
            .is_found();
            Ok(ScanEntry { assignment, found })
        })
        .collect::<Result<_, EmbedError>>()?;
    Ok(ScanReport { entries })
}

/// Region hulls of all `R_{a,b}`, computed once.
#[derive(Debug, Clone)]
pub struct RegionMap<'a> {
    pub ls: &'a LineSet,
    pub cc: ColorClasses,
    pub hulls: Vec<RegionHull>,
}

impl<'a> RegionMap<'a> {
    pub fn new(ls: &'a LineSet, cc: &ColorClasses) -> Result<Self, EmbedError> {
        let hulls = cc
            .regions()
            .into_iter()
            .map(|r| region_hull(ls, cc, r))
            .collect::<Result<_, _>>()?;
        Ok(RegionMap {
            ls,
            cc: cc.clone(),
            hulls,
        })
    }

    fn hull(&self, r: RegionIndex) -> &RegionHull {
        self.hulls
            .iter()
            .find(|h| h.region == r)
            .expect("all regions present")
    }
}

/// One traversed region with its entry and exit side labels (0 when the
/// edge starts or ends inside).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CombTuple {
    pub region: RegionIndex,
    pub entry: usize,
    pub exit: usize,
}

struct Visit {
    region: RegionIndex,
    t_in: Scalar,
    t_out: Scalar,
    entry: usize,
    exit: usize,
}

fn visits(
    map: &RegionMap,
    u: (usize, &Scalar),
    v: (usize, &Scalar),
) -> Result<(Segment, Vec<Visit>), EmbedError> {
    let pu = map.ls.line(u.0)?.point_at(u.1);
    let pv = map.ls.line(v.0)?.point_at(v.1);
    if pu == pv {
        return Err(EmbedError::DegenerateContact);
    }
    let seg = Segment::new(pu, pv);
    if map.ls.intersection_points().iter().any(|c| seg.contains(c)) {
        return Err(EmbedError::DegenerateContact);
    }
    let ru = region_of(map.ls, &map.cc, u.0, u.1)?;
    let rv = region_of(map.ls, &map.cc, v.0, v.1)?;
    let mut middle = Vec::new();
    let mut first = None;
    let mut last = None;
    for h in &map.hulls {
        let Some((t_in, t_out, entry, exit)) = clip_segment(h, &seg) else {
            continue;
        };
        if t_in == t_out && h.region != ru && h.region != rv {
            continue;
        }
        let visit = Visit {
            region: h.region,
            t_in,
            t_out,
            entry,
            exit,
        };
        if h.region == ru {
            first = Some(visit);
        } else if h.region == rv {
            last = Some(visit);
        } else {
            middle.push(visit);
        }
    }
    // traversal order by midpoint of the parameter interval, which is exactly
    // reversed when the edge is
    middle.sort_by(|a, b| {
        (&a.t_in + &a.t_out)
            .cmp(&(&b.t_in + &b.t_out))
            .then(a.region.cmp(&b.region))
    });
    let mut out = Vec::new();
    let first = first.expect("the start point lies in its own region");
    out.push(first);
    out.extend(middle);
    if ru != rv {
        out.push(last.expect("the end point lies in its own region"));
    } else if out.len() > 1 {
        // the edge never leaves R(u); close the walk there
        let h = map.hull(ru);
        let (t_in, t_out, entry, exit) = clip_segment(h, &seg).expect("inside");
        out.push(Visit {
            region: ru,
            t_in,
            t_out,
            entry,
            exit,
        });
    }
    Ok((seg, out))
}

/// Regions traversed by the edge from `u` to `v` (each given as line id and
/// abscissa), starting with the region of `u`.
pub fn comb_type(
    map: &RegionMap,
    u: (usize, &Scalar),
    v: (usize, &Scalar),
) -> Result<Vec<CombTuple>, EmbedError> {
    let (_, vs) = visits(map, u, v)?;
    Ok(vs
        .into_iter()
        .map(|w| CombTuple {
            region: w.region,
            entry: if w.t_in.is_zero() { 0 } else { w.entry },
            exit: if w.t_out == Scalar::one() { 0 } else { w.exit },
        })
        .collect())
}

/// Classes of the lines of the vertices along a directed path.
pub fn color_type(
    ls: &LineSet,
    t: &Tree,
    asg: &Assignment,
    cc: &ColorClasses,
    path: &[usize],
) -> Result<Vec<usize>, EmbedError> {
    if !t.is_directed_path(path) {
        return Err(EmbedError::NotAPath);
    }
    path.iter()
        .map(|&v| Ok(cc.class_of(ls, asg.iota[v])?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDescriptor {
    pub visited: Vec<RegionIndex>,
    /// Per path: the start vertex, then the point where each later region is
    /// entered.
    pub entry_points: Vec<Vec<Point>>,
    /// Door `i` is the convex hull of the `i`-th entry points.
    pub doors: Vec<Vec<Point>>,
}

pub fn path_descriptor(
    map: &RegionMap,
    t: &Tree,
    asg: &Assignment,
    emb: &Embedding,
    paths: &[Vec<usize>],
) -> Result<PathDescriptor, EmbedError> {
    let Some(start) = paths.first().and_then(|p| p.first()).copied() else {
        return Err(EmbedError::NotAPath);
    };
    let mut visited: Option<Vec<RegionIndex>> = None;
    let mut entry_points = Vec::new();
    for path in paths {
        if !t.is_directed_path(path) {
            return Err(EmbedError::NotAPath);
        }
        if path[0] != start {
            return Err(EmbedError::MixedStart);
        }
        let line = |v: usize| asg.iota[v];
        let mut regs = vec![region_of(map.ls, &map.cc, line(start), &emb.pos[start])?];
        let mut pts = vec![map.ls.line(line(start))?.point_at(&emb.pos[start])];
        for w in path.windows(2) {
            let (seg, vs) = visits(
                map,
                (line(w[0]), &emb.pos[w[0]]),
                (line(w[1]), &emb.pos[w[1]]),
            )?;
            for visit in vs.into_iter().skip(1) {
                regs.push(visit.region);
                pts.push(seg.at(&visit.t_in));
            }
        }
        match &visited {
            None => visited = Some(regs),
            Some(prev) if *prev != regs => return Err(EmbedError::NonUniform),
            _ => {}
        }
        entry_points.push(pts);
    }
    let visited = visited.expect("at least one path");
    let doors = (0..visited.len())
        .map(|i| {
            let pts: Vec<Point> = entry_points.iter().map(|p| p[i].clone()).collect();
            convex_hull(&pts)
        })
        .collect();
    Ok(PathDescriptor {
        visited,
        entry_points,
        doors,
    })
}

/// Complete `delta`-ary tree of depth `d` minus its last leaf, with vertices
/// numbered level by level.
pub fn build_theorem_tree(d: usize, delta: usize) -> Result<Tree, EmbedError> {
    if d == 0 || delta < 2 {
        return Err(EmbedError::BadShape);
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next_id = 1;
    for _ in 0..d {
        let mut next_level = Vec::new();
        for &p in &level {
            for _ in 0..delta {
                edges.push((p, next_id));
                next_level.push(next_id);
                next_id += 1;
            }
        }
        level = next_level;
    }
    edges.pop();
    Tree::from_edges(next_id - 1, &edges).map_err(EmbedError::from)
}

/// Vertex count of [`build_theorem_tree`]: `(delta^(d+1) - 1) / (delta - 1) - 1`.
pub fn theorem_tree_size(d: usize, delta: usize) -> usize {
    (delta.pow(d as u32 + 1) - 1) / (delta - 1) - 1
}

/// Root to the first line by slope, then for every internal vertex
/// `delta / c` children into each class, chosen at random. The parent of the
/// missing leaf is one short in class 1, the class of the root's line.
pub fn build_iota(
    t: &Tree,
    ls: &LineSet,
    cc: &ColorClasses,
    delta: usize,
    seed: u64,
) -> Result<Assignment, EmbedError> {
    if !delta.is_multiple_of(cc.c) {
        return Err(EmbedError::Divisibility { delta, c: cc.c });
    }
    if ls.len() != t.n() || cc.n != ls.len() {
        return Err(EmbedError::SizeMismatch {
            vertices: t.n(),
            lines: ls.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: Vec<Vec<usize>> = (1..=cc.c)
        .map(|k| cc.members(k).map(|pos| ls.at(pos).id).collect())
        .collect();
    for p in pools.iter_mut() {
        p.shuffle(&mut rng);
    }
    let mut iota = vec![0usize; t.n()];
    iota[0] = ls.at(0).id;
    pools[0].retain(|&id| id != iota[0]);
    let per = delta / cc.c;
    for v in t.bfs_order() {
        let ch = t.children(v);
        if ch.is_empty() {
            continue;
        }
        let mut quota = vec![per; cc.c];
        if ch.len() + 1 == delta {
            quota[0] -= 1;
        } else if ch.len() != delta {
            return Err(EmbedError::BadShape);
        }
        let mut slots: Vec<usize> = quota
            .iter()
            .enumerate()
            .flat_map(|(k, &q)| std::iter::repeat_n(k, q))
            .collect();
        slots.shuffle(&mut rng);
        for (&c, &k) in ch.iter().zip(&slots) {
            iota[c] = pools[k].pop().ok_or(EmbedError::SizeMismatch {
                vertices: t.n(),
                lines: ls.len(),
            })?;
        }
    }
    let asg = Assignment { iota };
    asg.validate(ls, t)?;
    Ok(asg)
}
