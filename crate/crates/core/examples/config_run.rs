//! Drives a run from a TOML file the same way the binary does.
//!
//! cargo run --release --example config_run -- configs/quartic_coherent.toml out/quartic

use std::path::PathBuf;

use wigner_flux::cli::{run, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/harmonic_null.toml".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/example".into()));
    let parsed = RunConfig::load(&config).and_then(RunConfig::into_dimensionless);
    let outcome = match parsed {
        Ok(c) => run(&c, &out, true).map_err(|e| e.line()),
        Err(e) => Err(e.to_string()),
    };
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
        }
        Err(line) => {
            eprintln!("{line}");
            std::process::exit(1);
        }
    }
}
