use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use treelines::embed::{check_embedding, scan_universality, solve, SolveOutcome, Verdict};
use treelines::hp::Hp;
use treelines::io::{
    parse_embedding, parse_instance, render_svg, serialize_embedding, Instance, SvgScene,
};
use treelines::lineset::{
    classify_cap_cup, longest_cap_cup, region_hull, CapCup, ColorClasses, LineSet,
};
use treelines::ramsey::{extract_doubling, extract_monotone_gaps};
use treelines::unstretch::{
    chain_from_frame, derive_chain, feasibility_search_with, lemma24_check, sine_hypothesis,
    validate_frame, ChainVerdict, CheckOptions, SearchOptions,
};

/// Exact tools for drawing trees on line arrangements.
///
/// Exit status: 0 on success (found, crossing free, no configuration), 1 on a
/// negative outcome (not found, violation, configuration found), 2 on bad
/// input. Randomized commands take their default seed from TREELINES_SEED.
#[derive(Parser)]
#[command(name = "treelines", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// General position, slope order and cap/cup status of an instance.
    Analyze { instance: PathBuf },
    /// Longest cap or cup among the lines.
    ExtractCap { lines: PathBuf },
    /// Longest chain with monotone angle gaps.
    ExtractMonotone { lines: PathBuf },
    /// Chain satisfying the doubling inequalities.
    ExtractDoubling { lines: PathBuf },
    /// Exact validity of an embedding.
    Check {
        instance: PathBuf,
        embedding: PathBuf,
    },
    /// Search for a crossing-free embedding.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 4)]
        refine: usize,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
        /// Defaults to TREELINES_SEED, then 0.
        #[arg(long, env = "TREELINES_SEED", default_value_t = 0)]
        seed: u64,
        /// Write the embedding here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Try every bijection of vertices to lines.
    Scan {
        instance: PathBuf,
        #[arg(long, default_value_t = 4)]
        refine: usize,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
        #[arg(long, env = "TREELINES_SEED", default_value_t = 0)]
        seed: u64,
        /// Allow more than 7 vertices.
        #[arg(long)]
        force: bool,
    },
    /// Validate a six-line frame and search for an edge configuration.
    Unstretch {
        lines: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, env = "TREELINES_SEED", default_value_t = 0)]
        seed: u64,
        /// Drop the hull condition from the search (mutation control).
        #[arg(long)]
        no_hull: bool,
    },
    /// Region hulls for c color classes.
    Regions {
        lines: PathBuf,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Draw an instance and optionally an embedding.
    Render {
        instance: PathBuf,
        embedding: Option<PathBuf>,
        #[arg(long)]
        svg: PathBuf,
        /// Also draw region hulls for this many classes.
        #[arg(long)]
        c: Option<usize>,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn ids(ls: &LineSet) -> String {
    ls.ids()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn kind_name(k: CapCup) -> &'static str {
    match k {
        CapCup::Cap => "cap",
        CapCup::Cup => "cup",
        CapCup::Neither => "neither",
    }
}

fn analyze(path: &Path) -> Outcome {
    let inst = load(path)?;
    let ls = &inst.lines;
    println!("lines: {}", ls.len());
    println!("general position: yes");
    println!("slope order: {}", ids(ls));
    if ls.len() >= 3 {
        println!("cap/cup: {}", kind_name(classify_cap_cup(ls)?));
    }
    if let Some(t) = &inst.tree {
        println!("tree: {} vertices, {} edges", t.n(), t.edges().len());
    }
    if inst.assignment.is_some() {
        println!("assignment: total and injective");
    }
    Ok(true)
}

fn check(instance: &Path, embedding: &Path) -> Outcome {
    let inst = load(instance)?;
    let (t, asg) = tree_and_assignment(&inst)?;
    let emb = parse_embedding(&read(embedding)?)?;
    let report = check_embedding(&inst.lines, t, asg, &emb)?;
    for w in &report.warnings {
        println!("warning: {w:?}");
    }
    match report.verdict {
        Verdict::CrossingFree => {
            println!("CrossingFree");
            Ok(true)
        }
        Verdict::Violation(kind, witness) => {
            println!("Violation {kind:?} {witness:?}");
            Ok(false)
        }
    }
}

fn tree_and_assignment(
    inst: &Instance,
) -> Result<(&treelines::embed::Tree, &treelines::embed::Assignment), Failure> {
    let t = inst
        .tree
        .as_ref()
        .ok_or_else(|| Failure("instance has no tree".into()))?;
    let a = inst
        .assignment
        .as_ref()
        .ok_or_else(|| Failure("instance has no assignment".into()))?;
    Ok((t, a))
}

fn unstretch(path: &Path, samples: u64, seed: u64, no_hull: bool) -> Outcome {
    let inst = load(path)?;
    let frame = validate_frame(&inst.lines, &inst.lines.ids())?;
    println!(
        "frame: {:?} doubling, {}",
        frame.variant,
        kind_name(frame.kind)
    );
    let report = feasibility_search_with(
        &frame,
        SearchOptions {
            samples,
            seed,
            check: CheckOptions {
                skip_hull: no_hull,
                opposite: false,
            },
        },
    );
    println!(
        "samples: {}  exact checks: {}",
        report.evaluated, report.exact_checks
    );
    let chain = match &report.found {
        Some(cfg) => derive_chain(&frame, cfg)?,
        None => chain_from_frame(&frame, Hp::from_i64(1)),
    };
    match sine_hypothesis(&chain.alpha) {
        Some(true) => println!("sines: decreasing from alpha_2"),
        Some(false) => println!("sines: increasing from alpha_2"),
        None => println!("sines: not monotone"),
    }
    match lemma24_check(&chain) {
        Ok(ChainVerdict::Contradiction) => println!("chain: b1 - r3 <= a3"),
        Ok(ChainVerdict::Consistent) => println!("chain: b1 - r3 > a3"),
        Ok(ChainVerdict::Indeterminate) => println!("chain: within guard band"),
        Err(e) => println!("chain: {e}"),
    }
    match report.found {
        None => {
            println!("no configuration found");
            Ok(true)
        }
        Some(cfg) => {
            println!("configuration found");
            for j in 1..=3 {
                let e = cfg.edge(j);
                println!("e{j} ({}, {}) ({}, {})", e.p.x, e.p.y, e.q.x, e.q.y);
            }
            Ok(false)
        }
    }
}

fn regions(path: &Path, c: usize, svg: Option<&Path>) -> Outcome {
    let inst = load(path)?;
    let ls = &inst.lines;
    let cc = ColorClasses::new(ls.len(), c)?;
    let mut hulls = Vec::new();
    for r in cc.regions() {
        let h = region_hull(ls, &cc, r)?;
        let verts: Vec<String> = h
            .vertices
            .iter()
            .map(|p| format!("({}, {})", p.x, p.y))
            .collect();
        println!(
            "R({},{}) {} sides={} vertices: {}",
            r.a,
            r.b,
            if h.is_bounded() {
                "bounded"
            } else {
                "unbounded"
            },
            h.side_count(),
            verts.join(" ")
        );
        hulls.push(h);
    }
    if let Some(out) = svg {
        let scene = SvgScene {
            hulls,
            ..SvgScene::arrangement(ls)
        };
        fs::write(out, render_svg(&scene)?)?;
    }
    Ok(true)
}

fn render(instance: &Path, embedding: Option<&Path>, svg: &Path, c: Option<usize>) -> Outcome {
    let inst = load(instance)?;
    let ls = &inst.lines;
    let mut scene = SvgScene::arrangement(ls);
    if let Some(c) = c {
        let cc = ColorClasses::new(ls.len(), c)?;
        scene.hulls = cc
            .regions()
            .into_iter()
            .map(|r| region_hull(ls, &cc, r))
            .collect::<Result<_, _>>()?;
    }
    if let Some(path) = embedding {
        let (t, asg) = tree_and_assignment(&inst)?;
        let emb = parse_embedding(&read(path)?)?;
        let pts = emb.points(ls, asg)?;
        scene.edges = t
            .edges()
            .iter()
            .map(|&(p, q)| (pts[p].clone(), pts[q].clone()))
            .collect();
        scene.vertices = pts
            .iter()
            .enumerate()
            .map(|(v, p)| (p.clone(), v.to_string()))
            .collect();
    }
    fs::write(svg, render_svg(&scene)?)?;
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::Analyze { instance } => analyze(&instance),
        Cmd::ExtractCap { lines } => {
            let inst = load(&lines)?;
            let (kind, sub) = longest_cap_cup(&inst.lines)?;
            println!("{} of {}: {}", kind_name(kind), sub.len(), ids(&sub));
            Ok(true)
        }
        Cmd::ExtractMonotone { lines } => {
            let inst = load(&lines)?;
            let chain = extract_monotone_gaps(&inst.lines)?;
            let list: Vec<String> = chain.ids.iter().map(|i| i.to_string()).collect();
            println!(
                "{:?} of {}: {}",
                chain.direction,
                chain.ids.len(),
                list.join(" ")
            );
            Ok(true)
        }
        Cmd::ExtractDoubling { lines } => {
            let inst = load(&lines)?;
            let chain = extract_doubling(&inst.lines)?;
            let list: Vec<String> = chain.ids.iter().map(|i| i.to_string()).collect();
            println!(
                "{:?} of {}: {}",
                chain.variant,
                chain.ids.len(),
                list.join(" ")
            );
            Ok(true)
        }
        Cmd::Check {
            instance,
            embedding,
        } => check(&instance, &embedding),
        Cmd::Solve {
            instance,
            refine,
            budget,
            seed,
            out,
        } => {
            let inst = load(&instance)?;
            let (t, asg) = tree_and_assignment(&inst)?;
            match solve(&inst.lines, t, asg, refine, budget, seed)? {
                SolveOutcome::Found(emb) => {
                    println!("Found");
                    let text = serialize_embedding(&emb);
                    match out {
                        Some(p) => fs::write(p, text)?,
                        None => print!("{text}"),
                    }
                    Ok(true)
                }
                SolveOutcome::NotFound { nodes, restarts } => {
                    println!("NotFound after {nodes} nodes and {restarts} restarts (not a proof)");
                    Ok(false)
                }
            }
        }
        Cmd::Scan {
            instance,
            refine,
            budget,
            seed,
            force,
        } => {
            let inst = load(&instance)?;
            let t = inst
                .tree
                .as_ref()
                .ok_or_else(|| Failure("instance has no tree".into()))?;
            let report = scan_universality(&inst.lines, t, refine, budget, seed, force)?;
            println!("{}/{} Found", report.found_count(), report.entries.len());
            for a in report.candidates() {
                let list: Vec<String> = a.iota.iter().map(|i| i.to_string()).collect();
                println!("candidate: {}", list.join(" "));
            }
            Ok(report.candidates().is_empty())
        }
        Cmd::Unstretch {
            lines,
            samples,
            seed,
            no_hull,
        } => unstretch(&lines, samples, seed, no_hull),
        Cmd::Regions { lines, c, svg } => regions(&lines, c, svg.as_deref()),
        Cmd::Render {
            instance,
            embedding,
            svg,
            c,
        } => render(&instance, embedding.as_deref(), &svg, c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
