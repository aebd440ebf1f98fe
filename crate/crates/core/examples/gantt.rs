//! Plans a mission and writes one SVG Gantt chart per Pareto-optimal plan.
//!
//! `cargo run --example gantt [-- <file.kanoa> <out-dir>]`

use std::path::PathBuf;

use kanoa::alloc::{enumerate_allocations, AllocatorConfig};
use kanoa::dsl::load_problem;
use kanoa::optimize::{nsga2_run, Evaluator, GaConfig, SearchSpace};
use kanoa::report::{gantt_svg, gantt_text};
use kanoa::tasks::TaskGraph;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hospital.kanoa"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("kanoa-gantt"));
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);
    let allocs = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 10, boundary_filter: true })
        .unwrap_or_else(|e| panic!("{e}"));
    let cfg = GaConfig { population: 20, generations: 3, permutations: 10, ..GaConfig::default() };
    let space = SearchSpace::new(&v, &g, allocs, cfg.permutations, cfg.seed, Default::default());
    let front = nsga2_run(&Evaluator::new(&space), &cfg).unwrap_or_else(|e| panic!("{e}"));

    std::fs::create_dir_all(&out).expect("writable output directory");
    for (k, e) in front.entries.iter().enumerate() {
        let title = format!("plan {k}: p_fail {:.4}, idle {}, travel {}", e.objectives.p_fail, e.objectives.idle, e.objectives.travel);
        let file = out.join(format!("plan_{k}.svg"));
        std::fs::write(&file, gantt_svg(&e.plan, &title)).expect("writable chart");
        println!("{title}\n{}-> {}\n", gantt_text(&e.plan), file.display());
    }
}
