//! Loop fluxes through the E = 1/4 orbit of x^4/4 for a Gaussian released at
//! x = 1, compared with the finite-difference rate over the orbit interior.

use wigner_flux::classical::solve_orbit;
use wigner_flux::currents::PotentialModel;
use wigner_flux::fluxes::{AnalysisConfig, FluxAnalysis};
use wigner_flux::grid::{CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::states::StateSpec;

fn main() -> wigner_flux::Result<()> {
    let grid = PhaseSpaceGrid::square(8.0, 256)?;
    let potential = PotentialModel::pure_quartic();
    let orbit = solve_orbit(&potential, (1.0, 0.0), 1e-4)?;
    let config = AnalysisConfig { output_times: vec![0.25, 0.5, 1.0], betas: vec![2.0, 3.0], ..AnalysisConfig::default() };
    let analysis = FluxAnalysis {
        spec: &StateSpec::Coherent { x0: 1.0, k0: 0.0 },
        potential: &potential,
        grid,
        coordinates: CoordinateGrid::matching(&grid, 512)?,
        orbit: &orbit,
        config: &config,
    };
    let report = analysis.run()?.report;
    println!("orbit: E = {}, T = {:.6}", report.orbit.energy, report.orbit.period);
    for row in &report.instants {
        println!("tau = {}", row.tau);
        for (name, c) in [("sigma", row.sigma), ("S_vN", row.svn), ("purity", row.purity)] {
            println!(
                "  {name:<7} loop {:+.6e}  volume {:+.6e}  full {:+.6e}  oracle {:+.6e}  dev {:.2e}",
                c.loop_flux, c.volume_term, c.full_form, c.oracle, c.relative_deviation
            );
        }
        for r in &row.renyi {
            let c = r.comparison;
            println!(
                "  R_{:<5} loop {:+.6e}  volume {:+.6e}  full {:+.6e}  oracle {:+.6e}  dev {:.2e}",
                r.beta, c.loop_flux, c.volume_term, c.full_form, c.oracle, c.relative_deviation
            );
        }
    }
    if let Some(acc) = &report.accumulated {
        println!("one period from tau = {}: frozen sigma {:+.6e}, time-consistent {:+.6e}, net change {:+.6e}",
            acc.tau_start, acc.frozen.sigma, acc.time_consistent.sigma, acc.oracle_net_change.sigma);
    }
    Ok(())
}
