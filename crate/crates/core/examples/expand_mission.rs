//! Expands a mission into task instances and prints the instance tree,
//! the precedence pairs and the independent subtrees.
//!
//! `cargo run --example expand_mission [-- <file.kanoa>]`

use std::path::PathBuf;

use kanoa::dsl::load_problem;
use kanoa::tasks::{NodeKind, TaskGraph, TaskInstanceTree};

fn print_node(tree: &TaskInstanceTree, node: usize, depth: usize) {
    let pad = "  ".repeat(depth);
    match &tree.nodes[node].kind {
        NodeKind::Mission => println!("{pad}mission"),
        NodeKind::Compound { task, ordered } => {
            println!("{pad}{task}{}", if *ordered { " (ordered)" } else { "" })
        }
        NodeKind::Leaf { instance } => {
            let i = &tree.instances[*instance];
            println!("{pad}{} at {} needs {}", i.id, i.location_id, i.robots_needed)
        }
    }
    for &c in &tree.nodes[node].children {
        print_node(tree, c, depth + 1);
    }
}

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hospital.kanoa"));
    let src = std::fs::read_to_string(&path).expect("readable input");
    let v = load_problem(&src).unwrap_or_else(|e| panic!("{}:{e}", path.display()));
    let g = TaskGraph::new(&v);

    print_node(&g.tree, TaskInstanceTree::ROOT, 0);

    println!("\nprecedence");
    for p in &g.precedence {
        println!("  {} before {}", g.instance(p.before).id, g.instance(p.after).id);
    }
    println!("\nsubtrees");
    for s in &g.subtrees {
        let ids: Vec<&str> = s.leaves.iter().map(|&l| g.instance(l).id.as_str()).collect();
        println!("  {}: {}", s.id, ids.join(", "));
    }
    let order: Vec<&str> = g.topological_order().expect("acyclic").iter().map(|&i| g.instance(i).id.as_str()).collect();
    println!("\none valid order: {}", order.join(" "));
}
