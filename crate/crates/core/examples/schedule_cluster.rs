//! Builds the MDP of one robot cluster under a random task order, solves
//! it and prints the objectives and the resulting schedule.
//!
//! `cargo run --example schedule_cluster [-- <file.kanoa> [seed] [--dump]]`

use std::path::PathBuf;

use kanoa::alloc::{enumerate_allocations, AllocatorConfig};
use kanoa::cluster::cluster_allocation;
use kanoa::dsl::load_problem;
use kanoa::mdp::{build_mdp, dump_mdp, random_task_permutation, schedule_model, travel_cost, BuildConfig};
use kanoa::report::gantt_text;
use kanoa::tasks::TaskGraph;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dump = args.iter().any(|a| a == "--dump");
    let mut rest = args.iter().filter(|a| *a != "--dump");
    let path = rest
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/v3.kanoa"));
    let seed: u64 = rest.next().map(|s| s.parse().expect("seed is an integer")).unwrap_or(0);
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);
    let a = enumerate_allocations(&v, g.instances(), &AllocatorConfig::default()).unwrap_or_else(|e| panic!("{e}")).remove(0);
    let closure = g.precedence_closure();

    for c in cluster_allocation(&a, &g.subtrees) {
        let p = random_task_permutation(&a, &c, &closure, seed);
        let names: Vec<&str> = c.robots.iter().map(|&r| v.robot(r).id.as_str()).collect();
        println!("cluster {{{}}}", names.join(", "));
        for (r, order) in p.robots.iter().zip(&p.orders) {
            let ids: Vec<&str> = order.iter().map(|&i| g.instance(i).id.as_str()).collect();
            println!("  {}: {}", v.robot(*r).id, ids.join(" "));
        }
        let m = match build_mdp(&v, &g, &a, &p, v.time_available(), &BuildConfig::default()) {
            Ok(m) => m,
            Err(e) => {
                println!("  {e}");
                continue;
            }
        };
        println!("  {} states, {} choices, {} transitions", m.num_states(), m.num_choices(), m.num_transitions());
        let r = schedule_model(&m).expect("solvable");
        if !r.feasible {
            println!("  cannot finish within {} time units\n", v.time_available());
            continue;
        }
        println!(
            "  p_success {:.6}  idle {}  travel {} (order travel {})",
            r.p_success,
            r.idle,
            r.travel,
            travel_cost(&p, &v, g.instances())
        );
        if let Some(plan) = &r.plan {
            print!("{}", gantt_text(plan));
        }
        if dump {
            print!("{}", dump_mdp(&m));
        }
        println!();
    }
}
