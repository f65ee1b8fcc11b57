//! Wigner functions of harmonic eigenstates against the Laguerre closed form.

use std::f64::consts::PI;

use wigner_flux::grid::{CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::states::{evaluate_state, wigner_point, wigner_transform, StateSpec};

fn laguerre(n: usize, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - u);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let next = ((2 * m + 1) as f64 - u) * cur / (m + 1) as f64 - m as f64 * prev / (m + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

fn main() -> wigner_flux::Result<()> {
    let grid = PhaseSpaceGrid::square(8.0, 256)?;
    let coords = CoordinateGrid::matching(&grid, 512)?;
    for n in 0..4 {
        let phi = evaluate_state(&StateSpec::HarmonicEigenstate { n }, &coords, 0.0)?;
        let w = wigner_transform(&phi, &grid)?;
        let mut err = 0.0f64;
        for ((i, j), v) in w.values().indexed_iter() {
            let r2 = grid.x(i).powi(2) + grid.k(j).powi(2);
            let exact = if n % 2 == 0 { 1.0 } else { -1.0 } * laguerre(n, 2.0 * r2) * (-r2).exp() / PI;
            err = err.max((v - exact).abs());
        }
        let (w00, residue) = wigner_point(&phi, 0.0, 0.0)?;
        println!("n={n}  max|W - W_exact| = {err:.2e}  W(0,0)*pi = {:+.9}  imag residue {residue:.1e}  max|W|*pi = {:.6}", w00 * PI, w.max_abs() * PI);
    }
    Ok(())
}
