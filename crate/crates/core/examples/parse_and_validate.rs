//! Parses a mission file, reports every problem with its position, and
//! prints the normalised source on success.
//!
//! `cargo run --example parse_and_validate [-- <file.kanoa>]`

use std::path::PathBuf;

use kanoa::dsl::{load_problem, parse_problem, pretty_print};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/maximal.kanoa"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| {
        eprintln!("{}: {e}", path.display());
        std::process::exit(1)
    });
    let v = match load_problem(&src) {
        Ok(v) => v,
        Err(e) => {
            for line in e.to_string().lines() {
                eprintln!("{}:{line}", path.display());
            }
            std::process::exit(1)
        }
    };
    let spec = v.spec();
    println!(
        "{}: {} locations, {} task types, {} robots, {} mission items, time budget {}",
        path.display(),
        spec.world.locations.len(),
        spec.tasks.atomic.len() + spec.tasks.compound.len(),
        spec.robots.len(),
        spec.mission.tasks.len(),
        v.time_available()
    );
    for r in 0..spec.robots.len() {
        let robot = v.robot(r);
        match v.max_idle(r) {
            Some(limit) => println!("  {} may idle at most {limit}", robot.id),
            None => println!("  {} has no idle limit", robot.id),
        }
    }
    println!();
    print!("{}", pretty_print(&parse_problem(&src).expect("already loaded")));
}
