//! Wigner currents of a Gaussian in x^4/4: the Moyal correction, series
//! termination and the phase-velocity divergence.

use wigner_flux::currents::{current, current_k, delta_current, div_w, moyal_term, relative_epsilon, PotentialModel};
use wigner_flux::grid::{integrate_volume, PhaseSpaceGrid};
use wigner_flux::states::WignerField;

fn main() -> wigner_flux::Result<()> {
    let grid = PhaseSpaceGrid::square(8.0, 256)?;
    let w = WignerField::from_fn(grid, 0.0, |x, k| (-(x - 1.0).powi(2) - k * k).exp() / std::f64::consts::PI)?;
    for (name, p) in [("harmonic", PotentialModel::harmonic()), ("x^4/4", PotentialModel::pure_quartic())] {
        let j = current(&w, &p, 2)?;
        let dj = delta_current(&j, &w, &p)?;
        let nu2 = moyal_term(&w, &p, 2)?;
        let same = current_k(&w, &p, 1)? == current_k(&w, &p, 2)?;
        let d = div_w(&j, &w, relative_epsilon(&w, 1e-12))?;
        let max_abs = |a: &ndarray::Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("{name}:");
        println!("  max|dJ_k| = {:.3e}, max|nu=2 term| = {:.1e}, nu_max 1 == 2: {same}", max_abs(&dj.jk), max_abs(&nu2));
        println!("  max|div w| (interior) = {:.3e}, masked nodes = {}", d.interior_max_abs(&grid, 8), d.masked_count());
        println!("  integral div J = {:.2e}", integrate_volume(&grid, &wigner_flux::currents::divergence(&j)?, None)?);
    }
    Ok(())
}
