//! Text formats for instances and embeddings, and SVG output.
//!
//! An instance file has up to three sections, each opened by a bare header
//! word:
//!
//! ```text
//! # comment
//! lines
//! l 1 1/2 3        # id, slope, offset: y = slope * x - offset
//! tree
//! e 0 1            # parent, child; the root is vertex 0
//! assign
//! a 0 1            # vertex, line id
//! ```
//!
//! An embedding file has rows `p <vertex> <x>`. All numbers are integers or
//! `p/q` rationals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::embed::{Assignment, Embedding, Tree};
use crate::geometry::{Line, Point};
use crate::lineset::{LineSet, RegionHull};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("nothing to draw")]
    EmptyScene,
}

fn syntax(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn invalid(e: impl std::fmt::Display) -> IoError {
    IoError::Validation(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub lines: LineSet,
    pub tree: Option<Tree>,
    pub assignment: Option<Assignment>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Lines,
    Tree,
    Assign,
}

/// Non-empty rows with comments removed, as (1-based line number, tokens).
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((k + 1, toks))
    })
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, IoError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

fn scalar(line: usize, tok: &str) -> Result<Scalar, IoError> {
    tok.parse::<Scalar>()
        .map_err(|e| syntax(line, e.to_string()))
}

fn arity(line: usize, toks: &[&str], n: usize) -> Result<(), IoError> {
    if toks.len() != n {
        return Err(syntax(
            line,
            format!("`{}` takes {} fields", toks[0], n - 1),
        ));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let mut section = Section::None;
    let mut seen = Vec::new();
    let mut lines = Vec::new();
    let mut edges = Vec::new();
    let mut assign: BTreeMap<usize, usize> = BTreeMap::new();
    for (ln, toks) in rows(text) {
        let header = match toks[0] {
            "lines" => Some(Section::Lines),
            "tree" => Some(Section::Tree),
            "assign" => Some(Section::Assign),
            _ => None,
        };
        if let Some(h) = header {
            if toks.len() != 1 {
                return Err(syntax(ln, "section header takes no fields"));
            }
            if seen.contains(&h) {
                return Err(syntax(ln, format!("section `{}` repeated", toks[0])));
            }
            seen.push(h);
            section = h;
            continue;
        }
        match (toks[0], section) {
            ("l", Section::Lines) => {
                arity(ln, &toks, 4)?;
                let id: usize = num(ln, toks[1], "line id")?;
                lines.push(Line::new(scalar(ln, toks[2])?, scalar(ln, toks[3])?, id));
            }
            ("e", Section::Tree) => {
                arity(ln, &toks, 3)?;
                edges.push((num(ln, toks[1], "vertex")?, num(ln, toks[2], "vertex")?));
            }
            ("a", Section::Assign) => {
                arity(ln, &toks, 3)?;
                let v: usize = num(ln, toks[1], "vertex")?;
                if assign.insert(v, num(ln, toks[2], "line id")?).is_some() {
                    return Err(syntax(ln, format!("vertex {v} assigned twice")));
                }
            }
            ("l" | "e" | "a", _) => {
                return Err(syntax(ln, format!("`{}` row outside its section", toks[0])))
            }
            (other, _) => return Err(syntax(ln, format!("unknown directive `{other}`"))),
        }
    }
    if !seen.contains(&Section::Lines) {
        return Err(invalid("missing `lines` section"));
    }
    let ls = LineSet::with_ids(&lines).map_err(invalid)?;
    let tree = if seen.contains(&Section::Tree) {
        Some(Tree::from_edges(edges.len() + 1, &edges).map_err(invalid)?)
    } else {
        None
    };
    let assignment = if seen.contains(&Section::Assign) {
        let t = tree
            .as_ref()
            .ok_or_else(|| invalid("`assign` needs a `tree` section"))?;
        let iota: Vec<usize> = (0..t.n())
            .map(|v| {
                assign
                    .get(&v)
                    .copied()
                    .ok_or_else(|| invalid(format!("assignment not total: vertex {v} missing")))
            })
            .collect::<Result<_, _>>()?;
        if let Some(v) = assign.keys().find(|&&v| v >= t.n()) {
            return Err(invalid(format!("assignment names unknown vertex {v}")));
        }
        let asg = Assignment { iota };
        asg.validate(&ls, t).map_err(invalid)?;
        Some(asg)
    } else {
        None
    };
    Ok(Instance {
        lines: ls,
        tree,
        assignment,
    })
}

/// Canonical form: lines by id, edges by child, assignment by vertex.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::from("lines\n");
    let mut lines = inst.lines.lines().to_vec();
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        let _ = writeln!(out, "l {} {} {}", l.id, l.slope, l.offset);
    }
    if let Some(t) = &inst.tree {
        out.push_str("tree\n");
        for (p, c) in t.edges() {
            let _ = writeln!(out, "e {p} {c}");
        }
    }
    if let Some(a) = &inst.assignment {
        out.push_str("assign\n");
        for (v, id) in a.iota.iter().enumerate() {
            let _ = writeln!(out, "a {v} {id}");
        }
    }
    out
}

pub fn parse_embedding(text: &str) -> Result<Embedding, IoError> {
    let mut pos: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (ln, toks) in rows(text) {
        if toks[0] != "p" {
            return Err(syntax(ln, format!("unknown directive `{}`", toks[0])));
        }
        arity(ln, &toks, 3)?;
        let v: usize = num(ln, toks[1], "vertex")?;
        if pos.insert(v, scalar(ln, toks[2])?).is_some() {
            return Err(syntax(ln, format!("vertex {v} placed twice")));
        }
    }
    let n = pos.len();
    if let Some(v) = (0..n).find(|v| !pos.contains_key(v)) {
        return Err(invalid(format!("embedding has no row for vertex {v}")));
    }
    Ok(Embedding {
        pos: pos.into_values().collect(),
    })
}

pub fn serialize_embedding(emb: &Embedding) -> String {
    let mut out = String::new();
    for (v, x) in emb.pos.iter().enumerate() {
        let _ = writeln!(out, "p {v} {x}");
    }
    out
}

/// Everything a picture can contain. Empty layers are skipped.
#[derive(Debug, Clone, Default)]
pub struct SvgScene {
    pub lines: Vec<Line>,
    pub points: Vec<Point>,
    pub hulls: Vec<RegionHull>,
    pub edges: Vec<(Point, Point)>,
    pub vertices: Vec<(Point, String)>,
    pub doors: Vec<Vec<Point>>,
}

impl SvgScene {
    /// Lines and their intersection points.
    pub fn arrangement(ls: &LineSet) -> SvgScene {
        SvgScene {
            lines: ls.lines().to_vec(),
            points: ls.intersection_points(),
            ..SvgScene::default()
        }
    }
}

const WIDTH: f64 = 800.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

struct View {
    x0: f64,
    y1: f64,
    scale: f64,
    w: f64,
    h: f64,
}

impl View {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y1 - y) * self.scale)
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.x0,
            self.x0 + self.w / self.scale,
            self.y1 - self.h / self.scale,
            self.y1,
        )
    }
}

/// Clips the line to the box, returning the two visible end points.
fn clip_line(l: &Line, b: (f64, f64, f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let (s, o) = (l.slope.to_f64(), l.offset.to_f64());
    let (xa, xb, ya, yb) = b;
    let y = |x: f64| s * x - o;
    let mut lo = xa;
    let mut hi = xb;
    if s != 0.0 {
        let (p, q) = ((ya + o) / s, (yb + o) / s);
        lo = lo.max(p.min(q));
        hi = hi.min(p.max(q));
    } else if !(ya..=yb).contains(&y(xa)) {
        return None;
    }
    (lo < hi).then(|| ((lo, y(lo)), (hi, y(hi))))
}

/// Deterministic SVG 1.1 document. The viewport fits the finite objects with
/// a 10% margin; lines and unbounded hulls are clipped to it.
pub fn render_svg(scene: &SvgScene) -> Result<String, IoError> {
    let mut finite: Vec<(f64, f64)> = scene.points.iter().map(Point::to_f64).collect();
    finite.extend(scene.vertices.iter().map(|(p, _)| p.to_f64()));
    for (p, q) in &scene.edges {
        finite.push(p.to_f64());
        finite.push(q.to_f64());
    }
    for h in &scene.hulls {
        finite.extend(h.vertices.iter().map(Point::to_f64));
    }
    if finite.is_empty() && scene.lines.is_empty() {
        return Err(IoError::EmptyScene);
    }
    if finite.is_empty() {
        finite.push((0.0, 0.0));
    }
    let (mut xa, mut xb, mut ya, mut yb) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &finite {
        xa = xa.min(x);
        xb = xb.max(x);
        ya = ya.min(y);
        yb = yb.max(y);
    }
    let span = (xb - xa).max(yb - ya).max(1.0);
    let (mx, my) = (
        ((xb - xa).max(span * 0.2)) * 0.1,
        ((yb - ya).max(span * 0.2)) * 0.1,
    );
    let (xa, xb, ya, yb) = (xa - mx, xb + mx, ya - my, yb + my);
    let scale = WIDTH / (xb - xa);
    let view = View {
        x0: xa,
        y1: yb,
        scale,
        w: WIDTH,
        h: (yb - ya) * scale,
    };
    let bx = view.bounds();
    let far = 4.0 * ((xb - xa) + (yb - ya));

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        view.w, view.h, view.w, view.h
    );
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="view"><rect x="0" y="0" width="{:.3}" height="{:.3}"/></clipPath></defs>"#,
        view.w, view.h
    );
    let _ = writeln!(out, r#"<g clip-path="url(#view)">"#);

    if !scene.hulls.is_empty() {
        out.push_str("<g id=\"regions\" fill-opacity=\"0.15\" stroke-width=\"1\">\n");
        for (k, h) in scene.hulls.iter().enumerate() {
            let mut poly: Vec<(f64, f64)> = Vec::new();
            let ext = |p: &Point, d: &(Scalar, Scalar), sign: f64| {
                let (px, py) = p.to_f64();
                let (dx, dy) = (d.0.to_f64(), d.1.to_f64());
                let len = (dx * dx + dy * dy).sqrt();
                (px + sign * far * dx / len, py + sign * far * dy / len)
            };
            if let (Some(inc), Some(first)) = (&h.incoming, h.vertices.first()) {
                poly.push(ext(first, inc, -1.0));
            }
            poly.extend(h.vertices.iter().map(Point::to_f64));
            if let (Some(outg), Some(last)) = (&h.outgoing, h.vertices.last()) {
                poly.push(ext(last, outg, 1.0));
            }
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<String> = poly
                .iter()
                .map(|&(x, y)| {
                    let (u, v) = view.map(x, y);
                    format!("{u:.3},{v:.3}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polygon data-region="{},{}" points="{}" fill="{color}" stroke="{color}"/>"#,
                h.region.a,
                h.region.b,
                pts.join(" ")
            );
        }
        out.push_str("</g>\n");
    }
    if !scene.lines.is_empty() {
        out.push_str("<g id=\"lines\" stroke=\"#444444\" stroke-width=\"1\">\n");
        for l in &scene.lines {
            if let Some((p, q)) = clip_line(l, bx) {
                let (a, b) = view.map(p.0, p.1);
                let (c, d) = view.map(q.0, q.1);
                let _ = writeln!(
                    out,
                    r#"<line data-id="{}" x1="{a:.3}" y1="{b:.3}" x2="{c:.3}" y2="{d:.3}"/>"#,
                    l.id
                );
            }
        }
        out.push_str("</g>\n");
    }
    if !scene.points.is_empty() {
        out.push_str("<g id=\"intersections\" fill=\"#999999\">\n");
        for p in &scene.points {
            let (x, y) = p.to_f64();
            let (u, v) = view.map(x, y);
            let _ = writeln!(out, r#"<circle cx="{u:.3}" cy="{v:.3}" r="2"/>"#);
        }
        out.push_str("</g>\n");
    }
    if !scene.doors.is_empty() {
        out.push_str("<g id=\"doors\" stroke=\"#cc0000\" stroke-width=\"3\" fill=\"none\">\n");
        for d in &scene.doors {
            let pts: Vec<String> = d
                .iter()
                .map(|p| {
                    let (x, y) = p.to_f64();
                    let (u, v) = view.map(x, y);
                    format!("{u:.3},{v:.3}")
                })
                .collect();
            let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
        }
        out.push_str("</g>\n");
    }
    if !scene.edges.is_empty() {
        out.push_str("<g id=\"edges\" stroke=\"#000000\" stroke-width=\"2\">\n");
        for (p, q) in &scene.edges {
            let (a, b) = view.map(p.x.to_f64(), p.y.to_f64());
            let (c, d) = view.map(q.x.to_f64(), q.y.to_f64());
            let _ = writeln!(
                out,
                r#"<line x1="{a:.3}" y1="{b:.3}" x2="{c:.3}" y2="{d:.3}"/>"#
            );
        }
        out.push_str("</g>\n");
    }
    if !scene.vertices.is_empty() {
        out.push_str("<g id=\"vertices\" font-family=\"sans-serif\" font-size=\"12\">\n");
        for (p, label) in &scene.vertices {
            let (u, v) = view.map(p.x.to_f64(), p.y.to_f64());
            let _ = writeln!(
                out,
                r##"<circle cx="{u:.3}" cy="{v:.3}" r="4" fill="#0044aa"/>"##
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
                u + 5.0,
                v - 5.0,
                label
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
