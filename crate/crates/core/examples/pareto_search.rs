//! Runs NSGA-II over allocations and task orders and compares the result
//! with an exhaustive evaluation of the same search space.
//!
//! `cargo run --release --example pareto_search [-- <file.kanoa>]`

use std::path::PathBuf;

use kanoa::alloc::{enumerate_allocations, AllocatorConfig};
use kanoa::dsl::load_problem;
use kanoa::mdp::BuildConfig;
use kanoa::optimize::{exhaustive_front, nsga2_run, Evaluator, GaConfig, ParetoFront, SearchSpace};
use kanoa::tasks::TaskGraph;

fn show(name: &str, front: &ParetoFront) {
    println!("{name}: {} evaluated, {} infeasible", front.evaluated, front.infeasible);
    println!("  alloc  perm     p_fail    idle  travel");
    for e in &front.entries {
        let o = &e.objectives;
        println!("  {:>5}  {:>4}  {:>9.6}  {:>6}  {:>6}", e.chromosome.alloc_idx, e.chromosome.perm_idx, o.p_fail, o.idle, o.travel);
    }
}

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/maximal.kanoa"));
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);
    let allocs = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 8, boundary_filter: true })
        .unwrap_or_else(|e| panic!("{e}"));
    let cfg = GaConfig { population: 16, generations: 10, permutations: 6, ..GaConfig::default() };
    let space = SearchSpace::new(&v, &g, allocs, cfg.permutations, cfg.seed, BuildConfig::default());
    println!("search space: {} chromosomes\n", space.size());

    match nsga2_run(&Evaluator::new(&space), &cfg) {
        Ok(front) => show("nsga-ii", &front),
        Err(e) => println!("nsga-ii: {e}"),
    }
    println!();
    match exhaustive_front(&Evaluator::new(&space)) {
        Ok(front) => show("exhaustive", &front),
        Err(e) => println!("exhaustive: {e}"),
    }
}
