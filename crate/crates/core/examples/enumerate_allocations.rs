//! Counts the feasible allocations of a mission and prints an evenly
//! spaced sample of them.
//!
//! `cargo run --example enumerate_allocations [-- <file.kanoa> [N]]`

use std::path::PathBuf;

use kanoa::alloc::{capable_robots, count_feasible, enumerate_allocations, AllocatorConfig};
use kanoa::dsl::load_problem;
use kanoa::tasks::TaskGraph;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hospital.kanoa"));
    let n: usize = args.next().map(|s| s.parse().expect("N is a count")).unwrap_or(5);
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);

    for inst in g.instances() {
        let names: Vec<&str> = capable_robots(&v, inst, true).iter().map(|&r| v.robot(r).id.as_str()).collect();
        println!("{:<14} needs {} of [{}]", inst.id, inst.robots_needed, names.join(", "));
    }
    println!("\n{} feasible allocations", count_feasible(&v, g.instances()));

    let cfg = AllocatorConfig { max_allocations: n, boundary_filter: true };
    let allocs = match enumerate_allocations(&v, g.instances(), &cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2)
        }
    };
    for (k, a) in allocs.iter().enumerate() {
        println!("\nallocation {k}");
        for (inst, robots) in a.to_named(&v, g.instances()).assignments {
            println!("  {inst:<14} {}", robots.join(" "));
        }
    }
}
