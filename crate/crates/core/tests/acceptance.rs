//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use wigner_flux::classical::solve_orbit;
use wigner_flux::currents::{
    continuity_residual, current, current_k, delta_current, div_w, moyal_term, relative_epsilon, Potential,
    PotentialModel,
};
use wigner_flux::fluxes::{AnalysisConfig, FluxAnalysis, LoopSamples};
use wigner_flux::grid::{integrate_volume, CoordinateGrid, PhaseSpaceGrid};
use wigner_flux::observables::{purity, renyi_entropy, von_neumann_entropy, DEFAULT_NEGATIVITY_FLOOR};
use wigner_flux::states::{evaluate_state, evolve_to, wigner_point, wigner_transform, StateSpec, WignerField};

type Outcome = Result<String, String>;

fn grid() -> PhaseSpaceGrid {
    PhaseSpaceGrid::square(8.0, 256).unwrap()
}

fn coords(g: &PhaseSpaceGrid) -> CoordinateGrid {
    CoordinateGrid::matching(g, 512).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_abs(a: &ndarray::Array2<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn catalog() -> Vec<StateSpec> {
    vec![
        StateSpec::HarmonicEigenstate { n: 0 },
        StateSpec::HarmonicEigenstate { n: 1 },
        StateSpec::HarmonicEigenstate { n: 2 },
        StateSpec::HarmonicEigenstate { n: 3 },
        StateSpec::Coherent { x0: 1.0, k0: 0.5 },
        StateSpec::Cat { x0: 2.0, k0: 0.0 },
        StateSpec::Cat { x0: 1.0, k0: 1.0 },
        StateSpec::superposition(&[(1.0.into(), 0), (num_complex::Complex64::new(0.0, 1.0), 1)]).unwrap(),
    ]
}

/// Ground and first excited Wigner functions against the closed forms.
fn criterion_1() -> Outcome {
    let g = grid();
    let c = coords(&g);
    let ground = wigner_transform(&evaluate_state(&StateSpec::HarmonicEigenstate { n: 0 }, &c, 0.0).unwrap(), &g).unwrap();
    let exact = WignerField::from_fn(g, 0.0, |x, k| (-x * x - k * k).exp() / PI).unwrap();
    let err = max_abs(&(ground.values() - exact.values()));
    let excited = evaluate_state(&StateSpec::HarmonicEigenstate { n: 1 }, &c, 0.0).unwrap();
    let (w00, _) = wigner_point(&excited, 0.0, 0.0).unwrap();
    let dev = (w00 + 1.0 / PI).abs();
    check(err < 1e-6 && dev < 1e-5, format!("ground max error {err:.2e} (< 1e-6); excited |W(0,0) + 1/pi| {dev:.2e} (< 1e-5)"))
}

/// Normalization, bound and purity for the catalog and evolved states.
fn criterion_2() -> Outcome {
    let g = grid();
    let c = coords(&g);
    let bound = 1.0 / PI + 1e-9;
    let (mut dn, mut dp, mut mx, mut count) = (0.0f64, 0.0f64, 0.0f64, 0);
    let mut record = |w: &WignerField| {
        dn = dn.max((integrate_volume(&g, w.values(), None).unwrap() - 1.0).abs());
        dp = dp.max((purity(w).unwrap() - 1.0).abs());
        mx = mx.max(w.max_abs());
        count += 1;
    };
    for spec in catalog() {
        record(&wigner_transform(&evaluate_state(&spec, &c, 0.0).unwrap(), &g).unwrap());
    }
    let evolutions = [
        (PotentialModel::harmonic(), StateSpec::Coherent { x0: 1.0, k0: 0.5 }),
        (PotentialModel::harmonic(), StateSpec::Cat { x0: 2.0, k0: 0.0 }),
        (PotentialModel::quartic(0.05).unwrap(), StateSpec::Coherent { x0: 1.0, k0: 0.5 }),
        (PotentialModel::quartic(0.05).unwrap(), StateSpec::HarmonicEigenstate { n: 2 }),
    ];
    for (pot, spec) in evolutions {
        let mut phi = evaluate_state(&spec, &c, 0.0).unwrap();
        for s in 1..=10 {
            phi = evolve_to(&phi, &pot, 0.3 * s as f64, 1e-3).unwrap();
            record(&wigner_transform(&phi, &g).unwrap());
        }
    }
    check(
        dn < 1e-6 && mx <= bound && dp < 1e-4,
        format!("{count} fields: max |int W - 1| {dn:.2e} (< 1e-6), max|W| - 1/pi {:.2e} (<= 1e-9), max |P - 1| {dp:.2e} (< 1e-4)", mx - 1.0 / PI),
    )
}

/// Harmonic potential: no quantum current, Liouvillian flow, vanishing loop fluxes.
fn criterion_3() -> Outcome {
    let g = grid();
    let c = coords(&g);
    let p = PotentialModel::harmonic();
    let orbit = solve_orbit(&p, (3.0, 0.0), 1e-4).unwrap();
    let (mut dj, mut dw, mut flux) = (0.0f64, 0.0f64, 0.0f64);
    for spec in [
        StateSpec::HarmonicEigenstate { n: 0 },
        StateSpec::HarmonicEigenstate { n: 1 },
        StateSpec::Cat { x0: 1.0, k0: 0.0 },
        StateSpec::Cat { x0: 2.0, k0: 0.0 },
    ] {
        let w = wigner_transform(&evaluate_state(&spec, &c, 0.0).unwrap(), &g).unwrap();
        let j = current(&w, &p, 2).unwrap();
        let d = delta_current(&j, &w, &p).unwrap();
        dj = dj.max(max_abs(&d.jx)).max(max_abs(&d.jk));
        let dv = div_w(&j, &w, relative_epsilon(&w, 1e-12)).unwrap();
        dw = dw.max(dv.values.iter().zip(dv.mask.iter()).filter(|(_, m)| **m).fold(0.0f64, |a, (v, _)| a.max(v.abs())));
        let l = LoopSamples::evaluate(&w, &orbit, &p, 2).unwrap();
        let mut values = vec![l.sigma(), l.svn(1e-30).unwrap(), l.purity()];
        for beta in [0.5, 2.0, 3.0] {
            values.push(l.renyi(beta, DEFAULT_NEGATIVITY_FLOOR).unwrap());
        }
        flux = values.iter().fold(flux, |m, v| m.max(v.abs()));
    }
    check(
        dj < 1e-14 && dw < 5e-6 && flux < 1e-10,
        format!("max|dJ| {dj:.1e} (< 1e-14), max unmasked |div w| {dw:.1e} (< 5e-6), max |flux| {flux:.1e} (< 1e-10)"),
    )
}

/// Quartic potentials: the nu = 2 Moyal term vanishes and nu_max = 1, 2 agree bit-for-bit.
fn criterion_4() -> Outcome {
    let g = grid();
    let w = wigner_transform(&evaluate_state(&StateSpec::Cat { x0: 1.5, k0: 0.5 }, &coords(&g), 0.0).unwrap(), &g).unwrap();
    let mut all = true;
    let mut parts = Vec::new();
    for p in [PotentialModel::pure_quartic(), PotentialModel::quartic(0.1).unwrap(), PotentialModel::double_well(0.1).unwrap()] {
        let nu2 = max_abs(&moyal_term(&w, &p, 2).unwrap());
        let same = current_k(&w, &p, 1).unwrap() == current_k(&w, &p, 2).unwrap();
        let nu1 = max_abs(&moyal_term(&w, &p, 1).unwrap());
        all &= nu2 == 0.0 && same && nu1 > 0.0;
        parts.push(format!("{}: nu2 {nu2:e}, bitwise {same}", p.label()));
    }
    check(all, parts.join("; "))
}

/// Continuity residual under simultaneous halving of h and dtau.
fn criterion_5() -> Outcome {
    let p = PotentialModel::pure_quartic();
    let spec = StateSpec::Coherent { x0: 1.0, k0: 0.0 };
    let tau = 0.25;
    let mut residuals = Vec::new();
    for (n, dtau) in [(65, 0.01), (129, 0.005), (257, 0.0025)] {
        let g = PhaseSpaceGrid::square(8.0, n).unwrap();
        let c = CoordinateGrid::matching(&g, 2 * (n - 1).next_power_of_two()).unwrap();
        let phi0 = evaluate_state(&spec, &c, 0.0).unwrap();
        let at = |t: f64| wigner_transform(&evolve_to(&phi0, &p, t, dtau / 10.0).unwrap(), &g).unwrap();
        let r = continuity_residual(&at(tau - dtau), &at(tau), &at(tau + dtau), &p, 2, dtau).unwrap();
        residuals.push(r.interior_max);
    }
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    check(
        ratios.iter().all(|r| *r >= 3.0),
        format!("residuals {:.3e} {:.3e} {:.3e}; ratios {:.2} {:.2} (>= 3)", residuals[0], residuals[1], residuals[2], ratios[0], ratios[1]),
    )
}

/// Loop fluxes against the finite-difference oracle for x^4/4.
fn criterion_6() -> Outcome {
    let g = grid();
    let p = PotentialModel::pure_quartic();
    let orbit = solve_orbit(&p, (1.0, 0.0), 1e-4).unwrap();
    let config = AnalysisConfig {
        output_times: vec![0.5],
        betas: vec![2.0],
        accumulation_segments: 0,
        ..AnalysisConfig::default()
    };
    let analysis = FluxAnalysis {
        spec: &StateSpec::Coherent { x0: 1.0, k0: 0.0 },
        potential: &p,
        grid: g,
        coordinates: coords(&g),
        orbit: &orbit,
        config: &config,
    };
    let row = analysis.run().unwrap().report.instants.remove(0);
    let r2 = row.renyi[0].comparison.loop_flux;
    let same = (r2 - row.purity.loop_flux).abs() <= 1e-14 * row.purity.loop_flux.abs();
    let devs = [row.sigma.relative_deviation, row.svn.relative_deviation, row.purity.relative_deviation];
    check(
        devs.iter().all(|d| *d < 0.05) && same && row.sigma.loop_flux.abs() > 1e-3,
        format!(
            "tau=0.5: sigma {:.5e} vs {:.5e} ({:.1e}); S_vN {:.5e} vs {:.5e} ({:.1e}); 2pi-purity {:.5e} vs {:.5e} ({:.1e}); renyi_2 == purity {same}",
            row.sigma.full_form, row.sigma.oracle, devs[0], row.svn.full_form, row.svn.oracle, devs[1],
            row.purity.full_form, row.purity.oracle, devs[2]
        ),
    )
}

/// Renyi-purity identity and the beta -> 1 bracket.
fn criterion_7() -> Outcome {
    let g = grid();
    let c = coords(&g);
    let mut worst = 0.0f64;
    for spec in catalog() {
        let w = wigner_transform(&evaluate_state(&spec, &c, 0.0).unwrap(), &g).unwrap();
        let p = purity(&w).unwrap();
        worst = worst.max(((-renyi_entropy(&w, 2.0).unwrap()).exp() - p / (2.0 * PI)).abs() / (p / (2.0 * PI)));
    }
    let w = wigner_transform(&evaluate_state(&StateSpec::Coherent { x0: 1.0, k0: 0.5 }, &c, 0.0).unwrap(), &g).unwrap();
    let s = von_neumann_entropy(&w, 1e-30).unwrap();
    let lo = renyi_entropy(&w, 1.0 - 1e-4).unwrap();
    let hi = renyi_entropy(&w, 1.0 + 1e-4).unwrap();
    let bracket = lo >= s && s >= hi && (lo - s).abs() < 1e-3 && (s - hi).abs() < 1e-3;
    check(
        worst < 1e-10 && bracket,
        format!("max rel |e^-R2 - P/2pi| {worst:.1e} (< 1e-10); R(1-1e-4) {lo:.7} >= S {s:.7} >= R(1+1e-4) {hi:.7}"),
    )
}

/// `T = (4 sqrt 2 / a) int_0^{pi/2} dtheta / sqrt(1 + sin^2 theta)` for x^4/4 by composite Simpson.
fn quartic_period_oracle(a: f64) -> f64 {
    let n = 20_000;
    let h = 0.5 * PI / n as f64;
    let f = |t: f64| 1.0 / (1.0 + t.sin().powi(2)).sqrt();
    let s: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        })
        .sum();
    4.0 * 2f64.sqrt() / a * s * h / 3.0
}

fn criterion_8() -> Outcome {
    let h = PotentialModel::harmonic();
    let o = solve_orbit(&h, (2.0, 0.0), 1e-4).unwrap();
    let dt = (o.period - 2.0 * PI).abs();
    let dl = (o.circumference() - 4.0 * PI).abs();
    let drift = o.max_energy_error(&h);
    let q = PotentialModel::pure_quartic();
    let oq = solve_orbit(&q, (1.0, 0.0), 1e-4).unwrap();
    let oracle = quartic_period_oracle(1.0);
    let rel = (oq.period - oracle).abs() / oracle;
    check(
        dt < 1e-5 && dl < 1e-4 && drift < 1e-8 && rel < 1e-4,
        format!("|T - 2pi| {dt:.1e}, |L - 4pi| {dl:.1e}, drift {drift:.1e}; quartic T {:.8} vs {oracle:.8} (rel {rel:.1e})", oq.period),
    )
}

const HARMONIC_NULL: &str = r#"
[potential]
kind = "harmonic"
[state]
kind = "harmonic_eigenstate"
n = 0
[orbit]
start = [2.0, 0.0]
[flux]
output_times = [0.0, 0.5]
accumulation_segments = 4
"#;

fn criterion_9() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_wigner-flux");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("null.toml");
    fs::write(&cfg, HARMONIC_NULL).map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    let mut codes = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(bin)
            .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
            .status()
            .map_err(|e| e.to_string())?;
        codes.push(status.code());
        csvs.push(fs::read(out.join("fluxes.csv")).unwrap_or_default());
    }
    let bad = dir.path().join("beta1.toml");
    fs::write(&bad, format!("{HARMONIC_NULL}betas = [1.0]\n")).map_err(|e| e.to_string())?;
    let rejected = Command::new(bin)
        .args(["--config", bad.to_str().unwrap(), "--out", dir.path().join("c").to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&rejected.stderr);
    let identical = !csvs[0].is_empty() && csvs[0] == csvs[1];
    check(
        identical && codes == [Some(0), Some(0)] && rejected.status.code() == Some(2) && stderr.contains("beta must differ from 1"),
        format!(
            "exit codes {codes:?}, fluxes.csv identical {identical} ({} bytes); beta = 1 exit {:?}: {}",
            csvs[0].len(),
            rejected.status.code(),
            stderr.trim()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 Wigner fidelity", criterion_1),
        ("2 normalization and bound", criterion_2),
        ("3 classical-limit nullity", criterion_3),
        ("4 series termination", criterion_4),
        ("5 continuity convergence", criterion_5),
        ("6 flux-oracle agreement", criterion_6),
        ("7 Renyi consistency", criterion_7),
        ("8 orbit quality", criterion_8),
        ("9 CLI determinism", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
