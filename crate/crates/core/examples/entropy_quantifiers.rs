//! Purity, von Neumann and Renyi entropies for the catalog states.

use std::f64::consts::PI;

use wigner_flux::grid::{CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::observables::{purity, renyi_entropy, von_neumann_entropy};
use wigner_flux::states::{evaluate_state, wigner_transform, StateSpec};

fn main() -> wigner_flux::Result<()> {
    let grid = PhaseSpaceGrid::square(8.0, 256)?;
    let coords = CoordinateGrid::matching(&grid, 512)?;
    let states = [
        StateSpec::HarmonicEigenstate { n: 0 },
        StateSpec::HarmonicEigenstate { n: 1 },
        StateSpec::Coherent { x0: 1.0, k0: 0.5 },
        StateSpec::Cat { x0: 2.0, k0: 0.0 },
    ];
    println!("{:<40} {:>10} {:>10} {:>10} {:>12} {:>10}", "state", "purity", "S_vN", "R_2", "R_0.5", "R_3");
    for spec in states {
        let w = wigner_transform(&evaluate_state(&spec, &coords, 0.0)?, &grid)?;
        let r05 = renyi_entropy(&w, 0.5).map(|v| format!("{v:.6}")).unwrap_or_else(|e| e.kind().to_string());
        println!(
            "{:<40} {:10.6} {:10.6} {:10.6} {:>12} {:10.6}",
            format!("{spec:?}"),
            purity(&w)?,
            von_neumann_entropy(&w, 1e-30)?,
            renyi_entropy(&w, 2.0)?,
            r05,
            renyi_entropy(&w, 3.0)?
        );
    }
    println!("ground-state closed forms: S = 1 + ln pi = {:.6}, R_2 = ln 2pi = {:.6}", 1.0 + PI.ln(), (2.0 * PI).ln());
    Ok(())
}
