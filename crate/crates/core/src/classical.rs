//! Closed classical orbits of `H = k^2/2 + U(x)`: Stormer-Verlet integration,
//! period detection, uniform resampling, normals and line elements.

use serde::{Deserialize, Serialize};

use crate::currents::Potential;
use crate::error::{Error, Result};

/// Uniform samples per period.
pub const DEFAULT_ORBIT_SAMPLES: usize = 4096;
/// Period search horizon.
pub const DEFAULT_TAU_LIMIT: f64 = 1e3;
/// Closure tolerance after resampling.
pub const CLOSURE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub samples: usize,
    pub tau_limit: f64,
    /// Motion with `|x|` or `|k|` above this is rejected as unbounded.
    pub bound: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_ORBIT_SAMPLES, tau_limit: DEFAULT_TAU_LIMIT, bound: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub tau: f64,
    pub x: f64,
    pub k: f64,
    /// Phase-space velocity `(dx/dtau, dk/dtau) = (k, -U'(x))`.
    pub vx: f64,
    pub vk: f64,
    /// Unit normal `(-dk/dtau, dx/dtau) / |v|`; outward for the physical flow.
    pub nx: f64,
    pub nk: f64,
    /// Line element `|v| dtau`.
    pub dl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOrbit {
    pub samples: Vec<OrbitSample>,
    pub period: f64,
    pub energy: f64,
    /// Integrator step actually used for the resampled trajectory.
    pub step: f64,
    /// `|xi(T) - xi(0)|` of the resampled trajectory.
    pub closure: f64,
}

#[derive(Debug, Clone, Copy)]
struct State {
    x: f64,
    k: f64,
}

fn force(potential: &dyn Potential, x: f64) -> f64 {
    -potential.derivative(x, 1).unwrap_or(f64::NAN)
}

fn verlet(potential: &dyn Potential, s: State, dt: f64) -> State {
    let k_half = s.k + 0.5 * dt * force(potential, s.x);
    let x = s.x + dt * k_half;
    State { x, k: k_half + 0.5 * dt * force(potential, x) }
}

pub fn hamiltonian(potential: &dyn Potential, x: f64, k: f64) -> f64 {
    0.5 * k * k + potential.value(x)
}

/// Integrates `steps` Stormer-Verlet steps from `(x, k)`; negative `dt` runs backward.
pub fn integrate(potential: &dyn Potential, start: (f64, f64), dt: f64, steps: usize) -> (f64, f64) {
    let mut s = State { x: start.0, k: start.1 };
    for _ in 0..steps {
        s = verlet(potential, s, dt);
    }
    (s.x, s.k)
}

/// Integrates one period from `start` and resamples it uniformly in tau.
pub fn solve_orbit(potential: &dyn Potential, start: (f64, f64), dtau: f64) -> Result<ClassicalOrbit> {
    solve_orbit_with(potential, start, dtau, &OrbitOptions::default())
}

pub fn solve_orbit_with(
    potential: &dyn Potential,
    start: (f64, f64),
    dtau: f64,
    options: &OrbitOptions,
) -> Result<ClassicalOrbit> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::InvalidParameter(format!("orbit dtau = {dtau} must be positive")));
    }
    if options.samples < 8 {
        return Err(Error::InvalidParameter("orbit needs at least 8 samples".into()));
    }
    if potential.derivative(start.0, 1).is_none() {
        return Err(Error::MissingDerivative { label: potential.label().to_string(), order: 1 });
    }
    let (x0, k0) = start;
    let v0 = (k0, force(potential, x0));
    let grad = v0.0.hypot(v0.1);
    if !(grad > 1e-12) {
        return Err(Error::Equilibrium { x: x0, k: k0, grad });
    }
    // section through the start point, normal to the start velocity
    let section = |s: State| (s.x - x0) * v0.0 + (s.k - k0) * v0.1;

    let mut s = State { x: x0, k: k0 };
    let mut tau = 0.0;
    let mut left = false;
    let period = loop {
        let next = verlet(potential, s, dtau);
        if !(next.x.abs() <= options.bound && next.k.abs() <= options.bound) {
            return Err(Error::UnboundedOrbit { tau: tau + dtau, x: next.x, k: next.k, bound: options.bound });
        }
        let (g0, g1) = (section(s), section(next));
        if g1 < 0.0 {
            left = true;
        }
        if left && g0 < 0.0 && g1 >= 0.0 {
            // bisection on the partial step length
            let (mut lo, mut hi) = (0.0, dtau);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if section(verlet(potential, s, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + tau) {
                    break;
                }
            }
            break tau + 0.5 * (lo + hi);
        }
        s = next;
        tau += dtau;
        if tau > options.tau_limit {
            return Err(Error::NoPeriod { tau_limit: options.tau_limit });
        }
    };

    let n = options.samples;
    let per_sample = (period / (n as f64 * dtau)).ceil().max(1.0) as usize;
    let step = period / (n * per_sample) as f64;
    let energy = hamiltonian(potential, x0, k0);
    let mut s = State { x: x0, k: k0 };
    let mut samples = Vec::with_capacity(n);
    let dtau_sample = period / n as f64;
    for i in 0..n {
        let (vx, vk) = (s.k, force(potential, s.x));
        let speed = vx.hypot(vk);
        samples.push(OrbitSample {
            tau: i as f64 * dtau_sample,
            x: s.x,
            k: s.k,
            vx,
            vk,
            nx: -vk / speed,
            nk: vx / speed,
            dl: speed * dtau_sample,
        });
        for _ in 0..per_sample {
            s = verlet(potential, s, step);
        }
    }
    let closure = (s.x - x0).hypot(s.k - k0);
    if !(closure < CLOSURE_LIMIT) {
        return Err(Error::OrbitNotClosed { closure, limit: CLOSURE_LIMIT });
    }
    let orbit = ClassicalOrbit { samples, period, energy, step, closure };
    orbit_frame(&orbit)?;
    Ok(orbit)
}

/// Per-sample `(n, dl)` with `n = (-dk/dtau, dx/dtau)/|v|` and `dl = |v| dtau`.
pub fn orbit_frame(orbit: &ClassicalOrbit) -> Result<Vec<((f64, f64), f64)>> {
    let dtau = orbit.dtau();
    orbit
        .samples
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let speed = s.vx.hypot(s.vk);
            if !(speed >= 1e-12) {
                return Err(Error::DegenerateVelocity { index, speed });
            }
            Ok(((-s.vk / speed, s.vx / speed), speed * dtau))
        })
        .collect()
}

impl ClassicalOrbit {
    /// Uniform tau spacing between samples.
    pub fn dtau(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn polygon(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.x, s.k)).collect()
    }

    pub fn circumference(&self) -> f64 {
        self.samples.iter().map(|s| s.dl).sum()
    }

    /// `(1/2) loop xi . n dl`, the enclosed phase-space area.
    pub fn enclosed_area(&self) -> f64 {
        0.5 * self.samples.iter().map(|s| (s.x * s.nx + s.k * s.nk) * s.dl).sum::<f64>()
    }

    pub fn max_energy_error(&self, potential: &dyn Potential) -> f64 {
        self.samples
            .iter()
            .map(|s| (hamiltonian(potential, s.x, s.k) - self.energy).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coordinates(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0f64, 0.0f64), |(mx, mk), s| (mx.max(s.x.abs()), mk.max(s.k.abs())))
    }

    /// True when the orbit does not enclose the origin symmetrically
    /// (e.g. a single-well orbit of the double well).
    pub fn is_parity_asymmetric(&self) -> bool {
        let (lo, hi) = self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.x), hi.max(s.x)));
        (lo + hi).abs() > 1e-6 * (hi - lo).max(1.0)
    }

    /// Same loop traversed backward: samples reversed, velocities and normals negated.
    pub fn reversed(&self) -> ClassicalOrbit {
        let n = self.samples.len();
        let dt = self.dtau();
        let samples = self
            .samples
            .iter()
            .rev()
            .enumerate()
            .map(|(i, s)| OrbitSample {
                tau: i as f64 * dt,
                vx: -s.vx,
                vk: -s.vk,
                nx: -s.nx,
                nk: -s.nk,
                ..*s
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(samples.len(), n);
        ClassicalOrbit { samples, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::PotentialModel;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_circle() {
        let p = PotentialModel::harmonic();
        let o = solve_orbit(&p, (2.0, 0.0), 1e-4).unwrap();
        assert!((o.period - 2.0 * PI).abs() < 1e-5, "T = {}", o.period);
        assert!((o.circumference() - 4.0 * PI).abs() < 1e-4);
        assert!((o.enclosed_area() - 4.0 * PI).abs() < 1e-4);
        assert!(o.max_energy_error(&p) < 1e-8);
        for s in &o.samples {
            assert!((s.x.hypot(s.k) - 2.0).abs() < 1e-7);
            assert!((s.nx * s.vx + s.nk * s.vk).abs() < 1e-10);
            assert!((s.nx.hypot(s.nk) - 1.0).abs() < 1e-14);
        }
        let first = o.samples[0];
        assert_eq!((first.vx, first.vk), (0.0, -2.0));
        assert!((first.nx - 1.0).abs() < 1e-15 && first.nk.abs() < 1e-15);
        assert!(!o.is_parity_asymmetric());
    }

    #[test]
    fn equilibrium_and_unbounded_rejected() {
        let p = PotentialModel::harmonic();
        assert!(matches!(solve_orbit(&p, (0.0, 0.0), 1e-3), Err(Error::Equilibrium { .. })));
        let free = PotentialModel::polynomial("linear", vec![0.0, -1.0]).unwrap();
        assert!(matches!(solve_orbit(&free, (0.0, 1.0), 1e-2), Err(Error::UnboundedOrbit { .. })));
        let opts = OrbitOptions { tau_limit: 1.0, ..OrbitOptions::default() };
        assert!(matches!(solve_orbit_with(&p, (2.0, 0.0), 1e-3, &opts), Err(Error::NoPeriod { .. })));
    }

    #[test]
    fn quartic_energy_and_reproducible_period() {
        let p = PotentialModel::pure_quartic();
        let a = solve_orbit(&p, (1.0, 0.0), 2e-4).unwrap();
        let b = solve_orbit(&p, (1.0, 0.0), 1e-4).unwrap();
        assert_eq!(a.energy, 0.25);
        assert!(a.max_energy_error(&p) < 1e-8);
        assert!((a.period - b.period).abs() < 1e-5);
    }

    #[test]
    fn energy_error_is_second_order() {
        let p = PotentialModel::pure_quartic();
        let e = |dt: f64| solve_orbit(&p, (1.0, 0.0), dt).unwrap().max_energy_error(&p);
        let ratio = e(2e-3) / e(1e-3);
        assert!((ratio - 4.0).abs() < 1.2, "ratio {ratio}");
    }

    #[test]
    fn time_reversal_recovers_start() {
        let p = PotentialModel::double_well(0.1).unwrap();
        let start = (1.0, 0.5);
        let steps = 20_000;
        let end = integrate(&p, start, 1e-4, steps);
        let back = integrate(&p, end, -1e-4, steps);
        assert!((back.0 - start.0).hypot(back.1 - start.1) < 1e-8);
    }

    #[test]
    fn reversal_flips_orientation() {
        let p = PotentialModel::harmonic();
        let o = solve_orbit(&p, (1.5, 0.0), 1e-3).unwrap();
        let r = o.reversed();
        assert!((r.enclosed_area() + o.enclosed_area()).abs() < 1e-12);
        assert!((r.circumference() - o.circumference()).abs() < 1e-12);
    }

    #[test]
    fn double_well_single_well_orbit_is_flagged() {
        let p = PotentialModel::double_well(0.1).unwrap();
        // barrier U(0) = 0, wells at x = +-sqrt(5) with U = -0.625; U(2) = -0.4
        let o = solve_orbit(&p, (2.0, 0.0), 1e-3).unwrap();
        assert!(o.is_parity_asymmetric());
        assert!(o.samples.iter().all(|s| s.x > 0.0));
    }

    #[test]
    fn degenerate_speed_rejected_by_frame() {
        let p = PotentialModel::harmonic();
        let mut o = solve_orbit(&p, (1.0, 0.0), 1e-3).unwrap();
        o.samples[5].vx = 0.0;
        o.samples[5].vk = 0.0;
        assert!(matches!(orbit_frame(&o), Err(Error::DegenerateVelocity { index: 5, .. })));
    }
}
