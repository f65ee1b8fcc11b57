//! Split-step evolution of a displaced Gaussian in the pure quartic well:
//! norm, purity and negativity of W along the way.

use wigner_flux::currents::PotentialModel;
use wigner_flux::grid::{integrate_volume, CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::observables::purity;
use wigner_flux::states::{evaluate_state, evolve_to, wigner_transform, StateSpec};

fn main() -> wigner_flux::Result<()> {
    let grid = PhaseSpaceGrid::square(8.0, 256)?;
    let coords = CoordinateGrid::matching(&grid, 512)?;
    let potential = PotentialModel::pure_quartic();
    let mut phi = evaluate_state(&StateSpec::Coherent { x0: 1.0, k0: 0.0 }, &coords, 0.0)?;
    println!("{:>6} {:>14} {:>14} {:>12} {:>12}", "tau", "norm(psi)", "integral W", "purity", "min W");
    for step in 0..=8 {
        let tau = 0.5 * step as f64;
        phi = evolve_to(&phi, &potential, tau, 1e-3)?;
        let w = wigner_transform(&phi, &grid)?;
        let min = w.values().iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "{tau:6.2} {:14.10} {:14.10} {:12.8} {min:12.4e}",
            phi.norm(),
            integrate_volume(&grid, w.values(), None)?,
            purity(&w)?
        );
    }
    Ok(())
}
