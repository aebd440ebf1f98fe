//! Plans the hospital ward mission and prints the Pareto table.
//!
//! `cargo run --release --example hospital [-- <out-dir>]`

use std::path::PathBuf;
use std::time::Instant;

use kanoa::optimize::GaConfig;
use kanoa::report::{run, RunConfig};

fn main() {
    let input = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hospital.kanoa");
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("kanoa-hospital"));
    let cfg = RunConfig {
        allocations: 10,
        ga: GaConfig { population: 20, generations: 3, permutations: 10, seed: 0, ..GaConfig::default() },
        ..RunConfig::default()
    };
    let started = Instant::now();
    match run(&input, &out, &cfg) {
        Ok(report) => {
            print!("{}", report.render());
            println!("\nartifacts in {} ({:.2?})", out.display(), started.elapsed());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
