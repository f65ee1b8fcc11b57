//! Residual of dW/dtau + div J = 0 for an evolving Gaussian in x^4/4 under
//! simultaneous refinement of the grid spacing and the time step.

use wigner_flux::currents::{continuity_residual, PotentialModel};
use wigner_flux::grid::{CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::states::{evaluate_state, evolve_to, wigner_transform, StateSpec};

fn main() -> wigner_flux::Result<()> {
    let potential = PotentialModel::pure_quartic();
    let spec = StateSpec::Coherent { x0: 1.0, k0: 0.0 };
    let tau = 0.25;
    let mut previous: Option<f64> = None;
    for (n, dtau) in [(65, 0.01), (129, 0.005), (257, 0.0025)] {
        let grid = PhaseSpaceGrid::square(8.0, n)?;
        let coords = CoordinateGrid::matching(&grid, 2 * (n - 1).next_power_of_two())?;
        let phi0 = evaluate_state(&spec, &coords, 0.0)?;
        let step = dtau / 10.0;
        let at = |t: f64| -> wigner_flux::Result<_> { wigner_transform(&evolve_to(&phi0, &potential, t, step)?, &grid) };
        let r = continuity_residual(&at(tau - dtau)?, &at(tau)?, &at(tau + dtau)?, &potential, 2, dtau)?;
        let ratio = previous.map(|p| p / r.interior_max).unwrap_or(f64::NAN);
        println!("n={n:4} h={:.4} dtau={dtau:.3}  residual={:.4e}  ratio={ratio:.2}", grid.h_x(), r.interior_max);
        previous = Some(r.interior_max);
    }
    Ok(())
}
