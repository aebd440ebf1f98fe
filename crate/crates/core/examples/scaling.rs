//! Measures how model size and solve time grow with the number of
//! cleaners sharing the same rooms.
//!
//! `cargo run --release --example scaling`

use std::path::PathBuf;
use std::time::Instant;

use kanoa::alloc::{enumerate_allocations, AllocatorConfig};
use kanoa::cluster::cluster_allocation;
use kanoa::dsl::load_problem;
use kanoa::mdp::{build_mdp, random_task_permutation, schedule_model, BuildConfig};
use kanoa::tasks::TaskGraph;

const REPEATS: usize = 5;

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    println!("{:<6} {:>6} {:>9} {:>8} {:>11} {:>10} {:>10} {:>9}", "file", "robots", "instances", "states", "transitions", "build ms", "solve ms", "feasible");
    for (name, size) in [("v3", 1), ("v4", 2), ("v5", 3)] {
        let src = std::fs::read_to_string(dir.join(format!("{name}.kanoa"))).expect("fixture");
        let v = load_problem(&src).expect("valid fixture");
        let g = TaskGraph::new(&v);
        let a = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: 300, boundary_filter: true })
            .expect("allocatable")
            .into_iter()
            .find(|a| {
                let cs = cluster_allocation(a, &g.subtrees);
                cs.len() == 1 && cs[0].robots.len() == size
            })
            .expect("an allocation using every cleaner");
        let c = cluster_allocation(&a, &g.subtrees).remove(0);
        let p = random_task_permutation(&a, &c, &g.precedence_closure(), 0);

        let (mut build, mut solve) = (Vec::new(), Vec::new());
        let mut last = None;
        for _ in 0..REPEATS {
            let t = Instant::now();
            let m = build_mdp(&v, &g, &a, &p, v.time_available(), &BuildConfig::default()).expect("within the state cap");
            build.push(t.elapsed().as_secs_f64() * 1e3);
            let t = Instant::now();
            let r = schedule_model(&m).expect("solvable");
            solve.push(t.elapsed().as_secs_f64() * 1e3);
            last = Some((m.num_states(), m.num_transitions(), r.feasible));
        }
        build.sort_by(f64::total_cmp);
        solve.sort_by(f64::total_cmp);
        let (states, transitions, feasible) = last.expect("at least one repeat");
        println!(
            "{name:<6} {size:>6} {:>9} {states:>8} {transitions:>11} {:>10.3} {:>10.3} {feasible:>9}",
            g.instances().len(),
            build[REPEATS / 2],
            solve[REPEATS / 2]
        );
    }
}
