//! End-to-end runs and the files they produce.

mod gantt;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use gantt::{gantt_svg, gantt_text};

use crate::alloc::{count_feasible, enumerate_allocations, AllocError, AllocatorConfig};
use crate::cluster::{relation_matrix, transitive_closure};
use crate::dsl::{load_problem, ValidatedProblem};
use crate::mdp::{build_mdp, dump_mdp, BuildConfig, PlanViolation};
use crate::optimize::{nsga2_run, Evaluator, GaConfig, OptimizeError, ParetoEntry, SearchSpace};
use crate::tasks::TaskGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub allocations: usize,
    pub ga: GaConfig,
    pub build: BuildConfig,
    pub boundary_filter: bool,
    pub dump_allocations: bool,
    pub dump_mdp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            allocations: 30,
            ga: GaConfig::default(),
            build: BuildConfig::default(),
            boundary_filter: true,
            dump_allocations: false,
            dump_mdp: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}", render_input_error(.path, .source))]
    Input { path: PathBuf, source: crate::Error },
    #[error(transparent)]
    Allocation(#[from] AllocError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error("plan {index} is invalid: {source}")]
    Plan { index: usize, source: PlanViolation },
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit status: 2 when the problem is well formed but nothing is feasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Optimize(OptimizeError::NoFeasibleSolution { .. }) | RunError::Allocation(_) => 2,
            _ => 1,
        }
    }
}

fn render_input_error(path: &Path, e: &crate::Error) -> String {
    let p = path.display();
    match e {
        crate::Error::Syntax(s) => format!("{p}:{s}"),
        crate::Error::Validation(v) => {
            v.0.iter().map(|x| format!("{p}:{}: {}", x.span, x.message)).collect::<Vec<_>>().join("\n")
        }
    }
}

/// One row of the Pareto table; also the element type of `pareto.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    #[serde(rename = "Allocation")]
    pub allocation: usize,
    #[serde(rename = "Permutation")]
    pub permutation: usize,
    #[serde(rename = "Probability of failure")]
    pub p_fail: f64,
    #[serde(rename = "Idling")]
    pub idle: f64,
    #[serde(rename = "Travel")]
    pub travel: f64,
}

impl From<&ParetoEntry> for ParetoRow {
    fn from(e: &ParetoEntry) -> Self {
        ParetoRow {
            allocation: e.chromosome.alloc_idx,
            permutation: e.chromosome.perm_idx,
            p_fail: e.objectives.p_fail,
            idle: e.objectives.idle,
            travel: e.objectives.travel,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: RunConfig,
    pub feasible_allocations: String,
    pub allocations: usize,
    /// Robot names of each cluster, per allocation.
    pub clusters: Vec<Vec<Vec<String>>>,
    pub front: Vec<ParetoEntry>,
    pub evaluated: usize,
    pub infeasible: usize,
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunReport {
    pub fn rows(&self) -> Vec<ParetoRow> {
        self.front.iter().map(ParetoRow::from).collect()
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "config: allocations={} permutations={} pop={} gens={} seed={} crossover={} mutation={} state-cap={}",
            c.allocations,
            c.ga.permutations,
            c.ga.population,
            c.ga.generations,
            c.ga.seed,
            c.ga.crossover_rate,
            c.ga.mutation_rate,
            c.build.state_cap
        );
        let _ = writeln!(out, "feasible allocations: {} (using {})", self.feasible_allocations, self.allocations);
        let _ = writeln!(out, "evaluated chromosomes: {} ({} infeasible)", self.evaluated, self.infeasible);
        out.push_str("\nclusters per allocation\n");
        for (i, cs) in self.clusters.iter().enumerate() {
            let groups: Vec<String> = cs.iter().map(|g| format!("{{{}}}", g.join(", "))).collect();
            let _ = writeln!(out, "  {i:>3}: {}", groups.join(" "));
        }
        out.push_str("\nAllocation  Permutation  Probability of failure  Idling  Travel\n");
        for r in self.rows() {
            let _ = writeln!(out, "{:>10}  {:>11}  {:>22.6}  {:>6}  {:>6}", r.allocation, r.permutation, r.p_fail, r.idle, r.travel);
        }
        for (k, e) in self.front.iter().enumerate() {
            let _ = writeln!(out, "\nplan {k} (allocation {}, permutation {})", e.chromosome.alloc_idx, e.chromosome.perm_idx);
            out.push_str(&gantt_text(&e.plan));
        }
        out.push_str("\ntimings\n");
        for (stage, d) in &self.timings {
            let _ = writeln!(out, "  {stage:<10} {:>10.3} ms", d.as_secs_f64() * 1e3);
        }
        out
    }
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| RunError::Write { path, source })
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

/// `pareto.csv` contents.
pub fn pareto_csv(rows: &[ParetoRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["Allocation", "Permutation", "Probability of failure", "Idling", "Travel"]).expect("in-memory write");
    }
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn clusters_dump(v: &ValidatedProblem, graph: &TaskGraph, space: &SearchSpace) -> String {
    let name = |r: usize| v.robot(r).id.clone();
    let mut out = String::new();
    for (i, a) in space.allocations.iter().enumerate() {
        let _ = writeln!(out, "allocation {i}");
        for (k, rs) in a.assignments.iter().enumerate() {
            let names: Vec<String> = rs.iter().map(|&r| name(r)).collect();
            let _ = writeln!(out, "  {} -> {}", graph.instance(k).id, names.join(" "));
        }
        let m = relation_matrix(a, &graph.subtrees);
        out.push_str("  relation\n");
        for line in m.render(&name).lines() {
            let _ = writeln!(out, "    {line}");
        }
        out.push_str("  closure\n");
        for line in transitive_closure(&m).render(&name).lines() {
            let _ = writeln!(out, "    {line}");
        }
        for c in &space.clusters[i] {
            let names: Vec<String> = c.robots.iter().map(|&r| name(r)).collect();
            let _ = writeln!(out, "  cluster {{{}}}", names.join(", "));
        }
    }
    out
}

/// Runs the whole pipeline on already loaded source text and writes the artifacts into `out`.
pub fn run_source(src: &str, path: &Path, out: &Path, cfg: &RunConfig) -> Result<RunReport, RunError> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let v = load_problem(src).map_err(|source| RunError::Input { path: path.to_path_buf(), source })?;
    let graph = TaskGraph::new(&v);
    lap("parse", &mut timings);

    let alloc_cfg = AllocatorConfig { max_allocations: cfg.allocations, boundary_filter: cfg.boundary_filter };
    let allocations = enumerate_allocations(&v, graph.instances(), &alloc_cfg)?;
    let feasible_allocations = count_feasible(&v, graph.instances()).to_string();
    lap("allocate", &mut timings);

    let space = SearchSpace::new(&v, &graph, allocations, cfg.ga.permutations, cfg.ga.seed, cfg.build);
    lap("cluster", &mut timings);

    fs::create_dir_all(out).map_err(|source| RunError::Write { path: out.to_path_buf(), source })?;
    write(out, "tasks.json", to_json(&graph))?;
    write(out, "clusters.txt", clusters_dump(&v, &graph, &space))?;
    if cfg.dump_allocations {
        let named: Vec<_> = space.allocations.iter().map(|a| a.to_named(&v, graph.instances())).collect();
        write(out, "allocations.json", to_json(&named))?;
    }

    let eval = Evaluator::new(&space);
    let front = nsga2_run(&eval, &cfg.ga)?;
    lap("optimize", &mut timings);

    for (k, e) in front.entries.iter().enumerate() {
        e.plan.verify(&v, &graph).map_err(|source| RunError::Plan { index: k, source })?;
        write(out, &format!("plan_{k}.json"), to_json(e))?;
        let title = format!(
            "allocation {} permutation {}: p_fail {:.4}, idle {}, travel {}",
            e.chromosome.alloc_idx, e.chromosome.perm_idx, e.objectives.p_fail, e.objectives.idle, e.objectives.travel
        );
        write(out, &format!("plan_{k}.svg"), gantt_svg(&e.plan, &title))?;
        if cfg.dump_mdp {
            let a = &space.allocations[e.chromosome.alloc_idx];
            for (c, cluster) in space.clusters[e.chromosome.alloc_idx].iter().enumerate() {
                let p = space.permutation(e.chromosome).restrict(&cluster.robots);
                if let Ok(m) = build_mdp(&v, &graph, a, &p, v.time_available(), &cfg.build) {
                    write(out, &format!("mdp_{k}_{c}.txt"), dump_mdp(&m))?;
                }
            }
        }
    }
    let rows: Vec<ParetoRow> = front.entries.iter().map(ParetoRow::from).collect();
    write(out, "pareto.csv", pareto_csv(&rows))?;
    write(out, "pareto.json", to_json(&rows))?;
    lap("report", &mut timings);

    let report = RunReport {
        config: cfg.clone(),
        feasible_allocations,
        allocations: space.allocations.len(),
        clusters: space
            .clusters
            .iter()
            .map(|cs| cs.iter().map(|c| c.robots.iter().map(|&r| v.robot(r).id.clone()).collect()).collect())
            .collect(),
        front: front.entries,
        evaluated: front.evaluated,
        infeasible: front.infeasible,
        timings,
    };
    write(out, "report.txt", report.render())?;
    Ok(report)
}

/// Reads `input`, runs the pipeline and writes the artifacts into `out`.
pub fn run(input: &Path, out: &Path, cfg: &RunConfig) -> Result<RunReport, RunError> {
    let src = fs::read_to_string(input).map_err(|source| RunError::Read { path: input.to_path_buf(), source })?;
    run_source(&src, input, out, cfg)
}
