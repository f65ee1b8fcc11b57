//! Catalog wavefunctions, the Wigner transform and the split-step propagator.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::currents::Potential;
use crate::error::{Error, Result};
use crate::grid::{CoordinateGrid, PhaseSpaceGrid};

/// Largest admissible wavefunction amplitude at either end of the coordinate grid.
pub const BOUNDARY_AMPLITUDE_LIMIT: f64 = 1e-12;
/// Largest admissible imaginary residue of the Wigner y-quadrature.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-10;
/// Largest admissible norm change over one call to [`evolve_wavefunction`].
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Harmonic-oscillator eigenfunction `psi_n(x)` by the stable three-term recurrence.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for m in 0..n {
        let next = (2.0 / (m as f64 + 1.0)).sqrt() * x * cur - (m as f64 / (m as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Concrete states with closed-form amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    HarmonicEigenstate { n: usize },
    /// Minimum-uncertainty Gaussian centred at `(x0, k0)`.
    Coherent { x0: f64, k0: f64 },
    /// Even superposition of the coherent states at `(x0, k0)` and `(-x0, -k0)`.
    Cat { x0: f64, k0: f64 },
    /// `sum_n c_n psi_n`; coefficients are normalized on construction.
    Superposition { terms: Vec<SuperpositionTerm> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl StateSpec {
    pub fn superposition(terms: &[(Complex64, usize)]) -> Result<Self> {
        let norm: f64 = terms.iter().map(|(c, _)| c.norm_sqr()).sum::<f64>().sqrt();
        if terms.is_empty() || !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("superposition needs a non-zero coefficient".into()));
        }
        Ok(Self::Superposition {
            terms: terms
                .iter()
                .map(|&(c, n)| SuperpositionTerm { n, re: c.re / norm, im: c.im / norm })
                .collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match self {
            StateSpec::HarmonicEigenstate { n } if *n > 150 => {
                Err(Error::InvalidState(format!("eigenstate index {n} too large")))
            }
            StateSpec::Coherent { x0, k0 } | StateSpec::Cat { x0, k0 } if !(finite(*x0) && finite(*k0)) => {
                Err(Error::InvalidState("displacement must be finite".into()))
            }
            StateSpec::Cat { x0, k0 } if x0.hypot(*k0) == 0.0 => {
                Err(Error::InvalidState("cat state needs a non-zero displacement".into()))
            }
            StateSpec::Superposition { terms } => {
                let norm: f64 = terms.iter().map(|t| t.re * t.re + t.im * t.im).sum();
                if terms.is_empty() || !(norm.is_finite() && norm > 0.0) {
                    Err(Error::InvalidState("superposition needs a non-zero coefficient".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Unnormalized closed-form amplitude at `x`, evolved to `tau` under the
    /// harmonic Hamiltonian `k^2/2 + x^2/2`.
    pub fn amplitude(&self, x: f64, tau: f64) -> Complex64 {
        match self {
            StateSpec::HarmonicEigenstate { n } => {
                hermite_function(*n, x) * Complex64::from_polar(1.0, -(*n as f64 + 0.5) * tau)
            }
            StateSpec::Coherent { x0, k0 } => coherent_amplitude(*x0, *k0, x, tau),
            StateSpec::Cat { x0, k0 } => {
                coherent_amplitude(*x0, *k0, x, tau) + coherent_amplitude(-*x0, -*k0, x, tau)
            }
            StateSpec::Superposition { terms } => {
                let norm: f64 = terms.iter().map(|t| t.re * t.re + t.im * t.im).sum::<f64>().sqrt();
                terms
                    .iter()
                    .map(|t| {
                        Complex64::new(t.re, t.im) / norm
                            * hermite_function(t.n, x)
                            * Complex64::from_polar(1.0, -(t.n as f64 + 0.5) * tau)
                    })
                    .sum()
            }
        }
    }

    /// True for states whose Wigner function is a single non-negative Gaussian.
    pub fn is_gaussian(&self) -> bool {
        matches!(self, StateSpec::Coherent { .. } | StateSpec::HarmonicEigenstate { n: 0 })
    }
}

/// `<x|alpha(tau)>` with `alpha = (x0 + i k0)/sqrt 2`, `alpha(tau) = alpha e^{-i tau}`
/// and the zero-point phase `e^{-i tau/2}`.
fn coherent_amplitude(x0: f64, k0: f64, x: f64, tau: f64) -> Complex64 {
    let alpha = Complex64::new(x0, k0) / 2f64.sqrt() * Complex64::from_polar(1.0, -tau);
    let exponent = Complex64::new(-0.5 * x * x, 0.0) + 2f64.sqrt() * alpha * x
        - 0.5 * alpha * alpha
        - 0.5 * alpha.norm_sqr()
        - Complex64::new(0.0, 0.5 * tau);
    PI.powf(-0.25) * exponent.exp()
}

/// Complex samples of `phi(x; tau)` on a [`CoordinateGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: CoordinateGrid,
    values: Vec<Complex64>,
    tau: f64,
}

impl Wavefunction {
    pub fn new(grid: CoordinateGrid, values: Vec<Complex64>, tau: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidState(format!("non-finite amplitude at node {i}")));
        }
        Ok(Self { grid, values, tau })
    }

    pub fn grid(&self) -> &CoordinateGrid {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Discrete norm `h sum |phi|^2`; this is the quantity kept at one.
    pub fn norm(&self) -> f64 {
        self.grid.h() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Wavefunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("wavefunctions live on different grids".into()));
        }
        let overlap: Complex64 =
            self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.grid.h();
        Ok(overlap.norm_sqr())
    }

    pub fn max_boundary_amplitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.values.len() - 1].norm())
    }

    fn normalize(&mut self) {
        let s = self.norm().sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= s);
    }
}

/// Samples and normalizes `spec` at time `tau` (harmonic time dependence).
pub fn evaluate_state(spec: &StateSpec, grid: &CoordinateGrid, tau: f64) -> Result<Wavefunction> {
    spec.validate()?;
    let values: Vec<Complex64> = grid.xs().into_iter().map(|x| spec.amplitude(x, tau)).collect();
    let mut phi = Wavefunction::new(*grid, values, tau)?;
    let norm = phi.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidState(format!("state has discrete norm {norm}")));
    }
    phi.normalize();
    let edge = phi.max_boundary_amplitude();
    if edge > BOUNDARY_AMPLITUDE_LIMIT {
        return Err(Error::InsufficientExtent { amplitude: edge, limit: BOUNDARY_AMPLITUDE_LIMIT });
    }
    Ok(phi)
}

/// Real Wigner quasi-probability samples on a [`PhaseSpaceGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    grid: PhaseSpaceGrid,
    values: Array2<f64>,
    tau: f64,
}

impl WignerField {
    pub fn new(grid: PhaseSpaceGrid, values: Array2<f64>, tau: f64) -> Result<Self> {
        grid.check_shape(&values, "Wigner samples")?;
        if let Some(((ix, ik), &value)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { ix, ik, value });
        }
        Ok(Self { grid, values, tau })
    }

    /// Closed-form field sampled on `grid` (used for oracles and tests).
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: PhaseSpaceGrid, tau: f64, f: F) -> Result<Self> {
        Self::new(grid, grid.sample(f), tau)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Same grid and time, values multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: &self.values * c, tau: self.tau }
    }

    /// Node-wise `(a W_1 + b W_2)`; both fields must share grid and time tag.
    pub fn combine(&self, a: f64, other: &WignerField, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(Self { grid: self.grid, values: &self.values * a + &other.values * b, tau: self.tau })
    }
}

/// Index offset `s = a + b` of coordinate nodes whose midpoint is `x`, if `x`
/// lies on the half-spacing lattice of `grid`.
fn pair_sum_index(grid: &CoordinateGrid, x: f64) -> Option<usize> {
    let s = 2.0 * x / grid.h() + (grid.len() as f64 - 1.0);
    let r = s.round();
    if (s - r).abs() > 1e-6 || r < 0.0 || r > 2.0 * (grid.len() as f64 - 1.0) {
        None
    } else {
        Some(r as usize)
    }
}

/// Products `phi(x - y) phi*(x + y)` for every node pair with midpoint index `s`,
/// with `q = b - a` so that `y = q h / 2`.
fn pair_products(phi: &Wavefunction, s: usize) -> Vec<(i64, Complex64)> {
    let n = phi.grid.len();
    let a_min = s.saturating_sub(n - 1);
    let a_max = s.min(n - 1);
    (a_min..=a_max)
        .map(|a| {
            let b = s - a;
            (b as i64 - a as i64, phi.values[a] * phi.values[b].conj())
        })
        .collect()
}

/// `W(x, k)` at a single point; `x` must be a node or a node midpoint of the
/// wavefunction grid. Returns the real part and the imaginary residue.
pub fn wigner_point(phi: &Wavefunction, x: f64, k: f64) -> Result<(f64, f64)> {
    let s = pair_sum_index(&phi.grid, x)
        .ok_or_else(|| Error::GridMismatch(format!("x = {x} is not on the half-node lattice")))?;
    let h = phi.grid.h();
    let sum: Complex64 = pair_products(phi, s)
        .into_iter()
        .map(|(q, p)| p * Complex64::from_polar(1.0, k * q as f64 * h))
        .sum();
    Ok((sum.re * h / PI, sum.im * h / PI))
}

/// Wigner transform by direct y-quadrature over every coordinate node pair
/// straddling each phase-space x node.
pub fn wigner_transform(phi: &Wavefunction, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let cg = phi.grid;
    if cg.h() > grid.h_x() * (1.0 + 1e-9) {
        return Err(Error::GridMismatch(format!(
            "coordinate spacing {} coarser than phase-space spacing {}",
            cg.h(),
            grid.h_x()
        )));
    }
    let sums: Vec<usize> = grid
        .xs()
        .into_iter()
        .map(|x| {
            pair_sum_index(&cg, x).ok_or_else(|| {
                Error::GridMismatch(format!("phase-space node x = {x} is not a pair midpoint of the coordinate grid"))
            })
        })
        .collect::<Result<_>>()?;
    let h = cg.h();
    let n = cg.len();
    let ks = grid.ks();
    // twiddle[j][q] = exp(i k_j q h) for q = 0..2n-1
    let twiddles: Vec<Vec<Complex64>> = ks
        .par_iter()
        .map(|&k| (0..2 * n).map(|q| Complex64::from_polar(1.0, k * q as f64 * h)).collect())
        .collect();

    let rows: Vec<(Vec<f64>, f64, usize)> = sums
        .par_iter()
        .map(|&s| {
            let pairs = pair_products(phi, s);
            let mut row = Vec::with_capacity(ks.len());
            let mut worst = 0.0f64;
            let mut worst_j = 0;
            for (j, tw) in twiddles.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(q, p) in &pairs {
                    let t = if q >= 0 { tw[q as usize] } else { tw[(-q) as usize].conj() };
                    acc += p * t;
                }
                row.push(acc.re * h / PI);
                let residue = (acc.im * h / PI).abs();
                if residue > worst {
                    worst = residue;
                    worst_j = j;
                }
            }
            (row, worst, worst_j)
        })
        .collect();

    let mut values = grid.zeros();
    for (i, (row, residue, j)) in rows.into_iter().enumerate() {
        if residue > IMAGINARY_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue { x: grid.x(i), k: ks[j], residue, limit: IMAGINARY_RESIDUE_LIMIT });
        }
        for (dst, v) in values.row_mut(i).iter_mut().zip(row) {
            *dst = v;
        }
    }
    WignerField::new(*grid, values, phi.tau)
}

/// Symmetric split-step (Strang) propagator for `k^2/2 + U(x)` on a fixed
/// coordinate grid and step.
pub struct SplitStepPropagator {
    grid: CoordinateGrid,
    dtau: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SplitStepPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStepPropagator").field("grid", &self.grid).field("dtau", &self.dtau).finish()
    }
}

impl SplitStepPropagator {
    pub fn new(grid: &CoordinateGrid, potential: &dyn Potential, dtau: f64) -> Result<Self> {
        if !(dtau.is_finite() && dtau != 0.0) {
            return Err(Error::InvalidEvolution(format!("dtau = {dtau} must be finite and non-zero")));
        }
        let xs = grid.xs();
        let u: Vec<f64> = xs.iter().map(|&x| potential.value(x)).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnboundedPotential { label: potential.label().to_string() });
        }
        let n = grid.len();
        let h = grid.h();
        let half_potential = u.iter().map(|&v| Complex64::from_polar(1.0, -0.5 * dtau * v)).collect();
        let kinetic = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                let p = 2.0 * PI * m / (n as f64 * h);
                Complex64::from_polar(1.0, -0.5 * dtau * p * p)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid: *grid,
            dtau,
            half_potential,
            kinetic,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// Applies `steps` Strang steps in place; adjacent half potential kicks are fused.
    pub fn advance(&self, phi: &mut Wavefunction, steps: usize) -> Result<()> {
        if phi.grid != self.grid {
            return Err(Error::GridMismatch("wavefunction grid differs from propagator grid".into()));
        }
        if steps == 0 {
            return Ok(());
        }
        let n = self.grid.len();
        let scale = 1.0 / n as f64;
        let full_potential: Vec<Complex64> = self.half_potential.iter().map(|v| v * v).collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        let psi = &mut phi.values;
        mul_assign(psi, &self.half_potential);
        for step in 0..steps {
            self.forward.process_with_scratch(psi, &mut scratch);
            mul_assign(psi, &self.kinetic);
            self.inverse.process_with_scratch(psi, &mut scratch);
            psi.iter_mut().for_each(|v| *v *= scale);
            if step + 1 < steps {
                mul_assign(psi, &full_potential);
            }
        }
        mul_assign(psi, &self.half_potential);
        phi.tau += self.dtau * steps as f64;
        Ok(())
    }
}

fn mul_assign(a: &mut [Complex64], b: &[Complex64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x *= y);
}

/// Propagates `phi` by `steps` split-step increments of `dtau` under `potential`.
///
/// Negative `dtau` propagates backward in time.
pub fn evolve_wavefunction(phi: &Wavefunction, potential: &dyn Potential, dtau: f64, steps: usize) -> Result<Wavefunction> {
    let mut out = phi.clone();
    if steps == 0 {
        return Ok(out);
    }
    let prop = SplitStepPropagator::new(&phi.grid, potential, dtau)?;
    let before = phi.norm();
    prop.advance(&mut out, steps)?;
    let drift = (out.norm() - before).abs();
    if !(drift <= NORM_DRIFT_LIMIT) {
        return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT });
    }
    Ok(out)
}

/// Evolves `phi` to time `target` using steps no longer than `max_dtau`.
pub fn evolve_to(phi: &Wavefunction, potential: &dyn Potential, target: f64, max_dtau: f64) -> Result<Wavefunction> {
    if !(max_dtau.is_finite() && max_dtau > 0.0) {
        return Err(Error::InvalidEvolution(format!("step bound {max_dtau} must be positive")));
    }
    let span = target - phi.tau;
    if span == 0.0 {
        return Ok(phi.clone());
    }
    let steps = (span.abs() / max_dtau).ceil().max(1.0) as usize;
    let mut out = evolve_wavefunction(phi, potential, span / steps as f64, steps)?;
    out.tau = target;
    Ok(out)
}
