//! Classical orbits for the catalog potentials, with the quartic period checked
//! against the turning-point quadrature.

use std::f64::consts::PI;

use wigner_flux::classical::solve_orbit;
use wigner_flux::currents::PotentialModel;

/// `T = (4 sqrt 2 / a) int_0^{pi/2} dtheta / sqrt(1 + sin^2 theta)` for `x^4/4` with amplitude `a`.
fn quartic_period(a: f64) -> f64 {
    let n = 20_000;
    let h = 0.5 * PI / n as f64;
    let f = |t: f64| 1.0 / (1.0 + t.sin().powi(2)).sqrt();
    let s: f64 = (0..=n).map(|i| {
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        w * f(i as f64 * h)
    }).sum();
    4.0 * 2f64.sqrt() / a * s * h / 3.0
}

fn main() -> wigner_flux::Result<()> {
    let cases = [
        (PotentialModel::harmonic(), (2.0, 0.0)),
        (PotentialModel::pure_quartic(), (1.0, 0.0)),
        (PotentialModel::quartic(0.1)?, (1.5, 0.5)),
        (PotentialModel::double_well(0.1)?, (2.0, 0.0)),
        (PotentialModel::double_well(0.1)?, (3.0, 0.0)),
    ];
    for (p, start) in cases {
        let o = solve_orbit(&p, start, 1e-4)?;
        println!(
            "{:<24} start={start:?}  E={:.6}  T={:.8}  L={:.6}  area={:.6}  drift={:.1e}  one-well={}",
            wigner_flux::currents::Potential::label(&p),
            o.energy,
            o.period,
            o.circumference(),
            o.enclosed_area(),
            o.max_energy_error(&p),
            o.is_parity_asymmetric()
        );
    }
    let o = solve_orbit(&PotentialModel::pure_quartic(), (1.0, 0.0), 1e-4)?;
    println!("x^4/4 from (1,0): T = {:.10}, quadrature {:.10}", o.period, quartic_period(1.0));
    Ok(())
}
