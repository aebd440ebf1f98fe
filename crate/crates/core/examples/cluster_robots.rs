//! Shows how robots that share work are grouped: the relation matrix of an
//! allocation, its transitive closure, and the resulting clusters.
//!
//! `cargo run --example cluster_robots [-- <file.kanoa> [N]]`

use std::path::PathBuf;

use kanoa::alloc::{enumerate_allocations, AllocatorConfig};
use kanoa::cluster::{clusters, relation_matrix, transitive_closure};
use kanoa::dsl::load_problem;
use kanoa::tasks::TaskGraph;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hospital.kanoa"));
    let n: usize = args.next().map(|s| s.parse().expect("N is a count")).unwrap_or(3);
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);
    let allocs = enumerate_allocations(&v, g.instances(), &AllocatorConfig { max_allocations: n, boundary_filter: true })
        .unwrap_or_else(|e| panic!("{e}"));
    let name = |r: usize| v.robot(r).id.clone();

    for (k, a) in allocs.iter().enumerate() {
        let m = relation_matrix(a, &g.subtrees);
        let closed = transitive_closure(&m);
        println!("allocation {k}\nrelation\n{}closure\n{}", m.render(&name), closed.render(&name));
        for c in clusters(&closed, a) {
            let robots: Vec<String> = c.robots.iter().map(|&r| name(r)).collect();
            let tasks: Vec<&str> = c.instances.iter().map(|&i| g.instance(i).id.as_str()).collect();
            println!("cluster {{{}}}: {}", robots.join(", "), tasks.join(" "));
        }
        println!();
    }
}
