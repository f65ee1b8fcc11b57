//! Loop fluxes of the quantum remainder `dJ` along a classical orbit, the
//! matching volume terms, and an independent finite-difference oracle that
//! differentiates region-restricted quantities of the evolved state.
//!
//! With `dJ_x = 0` and `n dl = (-dk_C, dx_C)`, every loop integral reduces to
//! `sum_i f_i dJ_k(x_i, k_i) dx_C/dtau dtau` over the uniformly resampled orbit.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalOrbit;
use crate::currents::{current, delta_current_k, div_w, relative_epsilon, Potential};
use crate::error::{Error, Result};
use crate::grid::{integrate_volume, CoordinateGrid, PhaseSpaceGrid, Region};
use crate::observables::{power_field, validate_beta, von_neumann_entropy_over, PowerRule};
use crate::states::{evaluate_state, evolve_to, wigner_transform, StateSpec, WignerField, Wavefunction};

/// Sub-columns per cell when rasterizing the orbit interior.
pub const DEFAULT_REGION_SUBSAMPLES: usize = 16;
/// Central-difference half step of the oracle.
pub const DEFAULT_DTAU_FD: f64 = 1e-3;
/// Values below this in magnitude count as zero when forming relative deviations.
pub const DEVIATION_NULL_FLOOR: f64 = 1e-12;

/// Lagrange cubic weights for nodes at offsets -1, 0, 1, 2 and fraction `t`.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Interpolates four values; written relative to the base node so constants are reproduced exactly.
fn cubic(w: &[f64; 4], f: [f64; 4]) -> f64 {
    f[1] + w[0] * (f[0] - f[1]) + w[2] * (f[2] - f[1]) + w[3] * (f[3] - f[1])
}

fn locate(x: f64, min: f64, h: f64) -> (usize, f64) {
    let s = (x - min) / h;
    let i = s.floor();
    (i as usize, s - i)
}

/// Bicubic (tensor Lagrange) interpolation of a grid field at `(x, k)`.
/// The point must sit at least two cells inside every edge.
pub fn interpolate_at(grid: &PhaseSpaceGrid, field: &Array2<f64>, x: f64, k: f64) -> Result<f64> {
    let (hx, hk) = (grid.h_x(), grid.h_k());
    let inside = |v: f64, lo: f64, hi: f64, h: f64| v >= lo + 2.0 * h && v <= hi - 2.0 * h;
    if !(inside(x, grid.x_min(), grid.x_max(), hx) && inside(k, grid.k_min(), grid.k_max(), hk)) {
        return Err(Error::OutsideInterior { x, k });
    }
    let (i, tx) = locate(x, grid.x_min(), hx);
    let (j, tk) = locate(k, grid.k_min(), hk);
    let (wx, wk) = (cubic_weights(tx), cubic_weights(tk));
    let mut rows = [0.0; 4];
    for (r, row) in rows.iter_mut().enumerate() {
        let ii = i + r - 1;
        *row = cubic(&wk, [field[[ii, j - 1]], field[[ii, j]], field[[ii, j + 1]], field[[ii, j + 2]]]);
    }
    Ok(cubic(&wx, rows))
}

/// Field values at every orbit sample.
pub fn interpolate_on_orbit(grid: &PhaseSpaceGrid, field: &Array2<f64>, orbit: &ClassicalOrbit) -> Result<Vec<f64>> {
    grid.check_shape(field, "field")?;
    orbit.samples.iter().map(|s| interpolate_at(grid, field, s.x, s.k)).collect()
}

/// `W` and `dJ_k` sampled along an orbit; all loop fluxes are folds over these.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSamples {
    pub w: Vec<f64>,
    pub delta_jk: Vec<f64>,
    pub xdot: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub dtau: f64,
}

impl LoopSamples {
    pub fn evaluate(w: &WignerField, orbit: &ClassicalOrbit, potential: &dyn Potential, nu_max: usize) -> Result<Self> {
        let djk = delta_current_k(w, potential, nu_max)?;
        Ok(Self {
            w: interpolate_on_orbit(w.grid(), w.values(), orbit)?,
            delta_jk: interpolate_on_orbit(w.grid(), &djk, orbit)?,
            xdot: orbit.samples.iter().map(|s| s.vx).collect(),
            points: orbit.samples.iter().map(|s| (s.x, s.k)).collect(),
            dtau: orbit.dtau(),
        })
    }

    /// `-sum_i weight_i dJ_k,i xdot_i dtau`.
    fn weighted(&self, weight: impl Fn(usize) -> f64) -> f64 {
        -self
            .delta_jk
            .iter()
            .zip(&self.xdot)
            .enumerate()
            .map(|(i, (dj, xd))| weight(i) * dj * xd * self.dtau)
            .sum::<f64>()
    }

    pub fn sigma(&self) -> f64 {
        self.weighted(|_| 1.0)
    }

    /// `+sum_i ln|W_i| dJ_k,i xdot_i dtau`; rejects samples with `|W| <= epsilon`.
    pub fn svn(&self, epsilon: f64) -> Result<f64> {
        let logs = self.log_weights(epsilon)?;
        Ok(-self.weighted(|i| logs[i]))
    }

    pub fn purity(&self) -> f64 {
        self.weighted(|i| self.w[i])
    }

    /// `-sum_i W_i^{beta-1} dJ_k,i xdot_i dtau`.
    pub fn renyi(&self, beta: f64, floor: f64) -> Result<f64> {
        validate_beta(beta)?;
        let rule = PowerRule::new(beta - 1.0, floor);
        let mut bad = 0;
        let weights: Vec<f64> = self
            .w
            .iter()
            .map(|&v| {
                rule.apply(v).unwrap_or_else(|| {
                    bad += 1;
                    0.0
                })
            })
            .collect();
        if bad > 0 {
            return Err(Error::NegativeForRealPower { beta, count: bad, floor });
        }
        Ok(self.weighted(|i| weights[i]))
    }

    fn log_weights(&self, epsilon: f64) -> Result<Vec<f64>> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
        }
        self.w
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                if v.abs() <= epsilon {
                    let (x, k) = self.points[index];
                    Err(Error::BelowEpsilon { index, x, k, value: v, epsilon })
                } else {
                    Ok(v.abs().ln())
                }
            })
            .collect()
    }
}

/// Probability flux through the orbit.
pub fn sigma_flux(w: &WignerField, orbit: &ClassicalOrbit, potential: &dyn Potential, nu_max: usize) -> Result<f64> {
    Ok(LoopSamples::evaluate(w, orbit, potential, nu_max)?.sigma())
}

/// Entropy loop flux with weight `ln|W|`.
pub fn svn_flux(
    w: &WignerField,
    orbit: &ClassicalOrbit,
    potential: &dyn Potential,
    nu_max: usize,
    epsilon: f64,
) -> Result<f64> {
    LoopSamples::evaluate(w, orbit, potential, nu_max)?.svn(epsilon)
}

/// Purity loop flux with weight `W` (no `2 pi`).
pub fn purity_flux(w: &WignerField, orbit: &ClassicalOrbit, potential: &dyn Potential, nu_max: usize) -> Result<f64> {
    Ok(LoopSamples::evaluate(w, orbit, potential, nu_max)?.purity())
}

/// Renyi loop flux with weight `W^{beta-1}`.
pub fn renyi_flux(
    w: &WignerField,
    orbit: &ClassicalOrbit,
    potential: &dyn Potential,
    nu_max: usize,
    beta: f64,
    floor: f64,
) -> Result<f64> {
    LoopSamples::evaluate(w, orbit, potential, nu_max)?.renyi(beta, floor)
}

/// Factor multiplying `W div w` in the volume integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeWeight {
    /// `integral W div w` (entropy).
    One,
    /// `integral W^2 div w` (purity).
    Wigner,
    /// `integral (beta - 1) W^beta div w`.
    Renyi { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeTerm {
    pub value: f64,
    /// Nodes inside the region skipped because `|W| <= epsilon`.
    pub masked_nodes: usize,
}

/// Node-wise `weight * W * div w` (zero on masked nodes).
pub fn volume_integrand(
    w: &WignerField,
    potential: &dyn Potential,
    nu_max: usize,
    epsilon: f64,
    weight: VolumeWeight,
    floor: f64,
) -> Result<(Array2<f64>, Array2<bool>)> {
    let j = current(w, potential, nu_max)?;
    let d = div_w(&j, w, epsilon)?;
    let factor = match weight {
        VolumeWeight::One => Array2::ones(w.grid().shape()),
        VolumeWeight::Wigner => w.values().clone(),
        VolumeWeight::Renyi { beta } => {
            validate_beta(beta)?;
            power_field(w, beta - 1.0, floor)? * (beta - 1.0)
        }
    };
    let integrand = &factor * w.values() * &d.values;
    Ok((integrand, d.mask))
}

pub fn volume_term(
    w: &WignerField,
    potential: &dyn Potential,
    nu_max: usize,
    epsilon: f64,
    region: &Region,
    weight: VolumeWeight,
    floor: f64,
) -> Result<VolumeTerm> {
    let (integrand, mask) = volume_integrand(w, potential, nu_max, epsilon, weight, floor)?;
    let masked_nodes = mask.iter().zip(region.weights().iter()).filter(|(m, r)| !**m && **r > 0.0).count();
    Ok(VolumeTerm { value: integrate_volume(w.grid(), &integrand, Some(region))?, masked_nodes })
}

/// Region-restricted quantity whose rate the oracle measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `sigma_C = integral_V W`.
    Sigma,
    /// `S_C = -integral_V W ln|W|`.
    VonNeumann,
    /// `P_C = 2 pi integral_V W^2`.
    Purity,
    /// `integral_V W^beta = e^{(1-beta) R_beta(V)}`.
    Renyi { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Time at which the rate is measured.
    pub tau: f64,
    pub dtau_fd: f64,
    /// Largest split-step increment.
    pub dtau_evolve: f64,
    pub svn_epsilon: f64,
    pub negativity_floor: f64,
    pub region_subsamples: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tau: 0.0,
            dtau_fd: DEFAULT_DTAU_FD,
            dtau_evolve: 1e-3,
            svn_epsilon: crate::observables::DEFAULT_SVN_EPSILON,
            negativity_floor: crate::observables::DEFAULT_NEGATIVITY_FLOOR,
            region_subsamples: DEFAULT_REGION_SUBSAMPLES,
        }
    }
}

pub fn region_quantity(w: &WignerField, region: &Region, quantity: Quantity, cfg: &OracleConfig) -> Result<f64> {
    match quantity {
        Quantity::Sigma => integrate_volume(w.grid(), w.values(), Some(region)),
        Quantity::VonNeumann => von_neumann_entropy_over(w, cfg.svn_epsilon, Some(region)),
        Quantity::Purity => crate::observables::purity_over(w, Some(region)),
        Quantity::Renyi { beta } => {
            validate_beta(beta)?;
            integrate_volume(w.grid(), &power_field(w, beta, cfg.negativity_floor)?, Some(region))
        }
    }
}

/// Central-difference rate of region quantities from two evolved snapshots.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub region: Region,
    pub w_minus: WignerField,
    pub w_plus: WignerField,
    pub config: OracleConfig,
}

impl Oracle {
    /// Evolves `spec` (prepared at tau = 0) to `tau -+ dtau_fd` under `potential`.
    pub fn new(
        spec: &StateSpec,
        potential: &dyn Potential,
        orbit: &ClassicalOrbit,
        grid: &PhaseSpaceGrid,
        coordinates: &CoordinateGrid,
        config: OracleConfig,
    ) -> Result<Self> {
        let phi0 = evaluate_state(spec, coordinates, 0.0)?;
        let region = Region::from_polygon(grid, &orbit.polygon(), config.region_subsamples)?;
        Self::from_wavefunction(&phi0, potential, region, grid, config)
    }

    pub fn from_wavefunction(
        phi: &Wavefunction,
        potential: &dyn Potential,
        region: Region,
        grid: &PhaseSpaceGrid,
        config: OracleConfig,
    ) -> Result<Self> {
        if !(config.dtau_fd.is_finite() && config.dtau_fd > 0.0) {
            return Err(Error::InvalidParameter(format!("dtau_fd = {} must be positive", config.dtau_fd)));
        }
        let minus = evolve_to(phi, potential, config.tau - config.dtau_fd, config.dtau_evolve)?;
        let plus = evolve_to(&minus, potential, config.tau + config.dtau_fd, config.dtau_evolve)?;
        Ok(Self {
            region,
            w_minus: wigner_transform(&minus, grid)?,
            w_plus: wigner_transform(&plus, grid)?,
            config,
        })
    }

    pub fn rate(&self, quantity: Quantity) -> Result<f64> {
        let a = region_quantity(&self.w_plus, &self.region, quantity, &self.config)?;
        let b = region_quantity(&self.w_minus, &self.region, quantity, &self.config)?;
        Ok((a - b) / (2.0 * self.config.dtau_fd))
    }
}

/// Instantaneous `d/dtau` of `quantity` over the orbit interior at `config.tau`.
pub fn oracle_flux(
    spec: &StateSpec,
    potential: &dyn Potential,
    orbit: &ClassicalOrbit,
    quantity: Quantity,
    grid: &PhaseSpaceGrid,
    coordinates: &CoordinateGrid,
    config: OracleConfig,
) -> Result<f64> {
    Oracle::new(spec, potential, orbit, grid, coordinates, config)?.rate(quantity)
}

/// `|a - b| / max(|a|, |b|)`, zero when both are below [`DEVIATION_NULL_FLOOR`].
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < DEVIATION_NULL_FLOOR {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Loop value, volume correction, their combination and the oracle rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxComparison {
    /// Loop integral as printed (purity without `2 pi`).
    pub loop_flux: f64,
    pub volume_term: f64,
    /// Loop plus volume term, scaled to the oracle's quantity.
    pub full_form: f64,
    pub oracle: f64,
    pub relative_deviation: f64,
}

impl FluxComparison {
    fn new(loop_flux: f64, volume_term: f64, full_form: f64, oracle: f64) -> Self {
        Self { loop_flux, volume_term, full_form, oracle, relative_deviation: relative_deviation(full_form, oracle) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiComparison {
    pub beta: f64,
    pub comparison: FluxComparison,
    /// `integral_V W^beta`, i.e. `e^{(1-beta) R_beta}` over the orbit interior.
    pub region_moment: f64,
    /// `loop_flux / region_moment`, the printed `dR_beta/dtau`.
    pub rate_as_printed: f64,
}

/// Every flux at one evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstantFluxes {
    pub tau: f64,
    /// `integral W` over the full grid.
    pub normalization: f64,
    pub sigma: FluxComparison,
    pub svn: FluxComparison,
    pub purity: FluxComparison,
    pub renyi: Vec<RenyiComparison>,
    pub masked_region_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopValues {
    pub sigma: f64,
    pub svn: f64,
    pub purity: f64,
    pub renyi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulatedFluxes {
    pub tau_start: f64,
    pub period: f64,
    /// W frozen at `tau_start`, integrated over one period.
    pub frozen: LoopValues,
    /// W regenerated along the orbit parameterization.
    pub time_consistent: LoopValues,
    pub segments: usize,
    /// `Q(tau_start + T) - Q(tau_start)` for sigma, S_vN, P and `integral W^beta`.
    pub oracle_net_change: LoopValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub start: (f64, f64),
    pub energy: f64,
    pub period: f64,
    pub samples: usize,
    pub circumference: f64,
    pub enclosed_area: f64,
    pub closure: f64,
    /// Orbit not centred on x = 0 (parity argument does not apply).
    pub parity_asymmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub nu_max: usize,
    pub svn_epsilon: f64,
    pub mask_relative: f64,
    pub negativity_floor: f64,
    pub betas: Vec<f64>,
    pub dtau_evolve: f64,
    pub dtau_fd: f64,
    pub output_times: Vec<f64>,
    pub region_subsamples: usize,
    /// Time slices for the time-consistent accumulated loop; 0 skips it.
    pub accumulation_segments: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            nu_max: crate::currents::DEFAULT_NU_MAX,
            svn_epsilon: crate::observables::DEFAULT_SVN_EPSILON,
            mask_relative: crate::currents::DEFAULT_MASK_RELATIVE,
            negativity_floor: crate::observables::DEFAULT_NEGATIVITY_FLOOR,
            betas: vec![0.5, 2.0, 3.0],
            dtau_evolve: 1e-3,
            dtau_fd: DEFAULT_DTAU_FD,
            output_times: vec![0.0],
            region_subsamples: DEFAULT_REGION_SUBSAMPLES,
            accumulation_segments: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    pub x_max: f64,
    pub k_max: f64,
    pub n_x: usize,
    pub n_k: usize,
    pub coordinate_nodes: usize,
    pub coordinate_extent: f64,
}

/// Full record of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub potential: String,
    pub state: StateSpec,
    pub grid: GridEcho,
    pub config: AnalysisConfig,
    pub orbit: OrbitSummary,
    pub instants: Vec<InstantFluxes>,
    pub accumulated: Option<AccumulatedFluxes>,
    pub notes: Vec<String>,
}

/// Everything needed to evaluate fluxes of one state and orbit.
pub struct FluxAnalysis<'a> {
    pub spec: &'a StateSpec,
    pub potential: &'a dyn Potential,
    pub grid: PhaseSpaceGrid,
    pub coordinates: CoordinateGrid,
    pub orbit: &'a ClassicalOrbit,
    pub config: &'a AnalysisConfig,
}

/// Output of [`FluxAnalysis::run`]: the report plus W at each output time.
pub struct AnalysisOutput {
    pub report: FluxReport,
    pub snapshots: Vec<WignerField>,
}

impl FluxAnalysis<'_> {
    fn oracle_config(&self, tau: f64) -> OracleConfig {
        OracleConfig {
            tau,
            dtau_fd: self.config.dtau_fd,
            dtau_evolve: self.config.dtau_evolve,
            svn_epsilon: self.config.svn_epsilon,
            negativity_floor: self.config.negativity_floor,
            region_subsamples: self.config.region_subsamples,
        }
    }

    /// Loop, volume and oracle values at one time from W(tau) and the oracle snapshots.
    pub fn instant(&self, w: &WignerField, region: &Region, oracle: &Oracle) -> Result<InstantFluxes> {
        let cfg = self.config;
        let pot = self.potential;
        let loops = LoopSamples::evaluate(w, self.orbit, pot, cfg.nu_max)?;
        let eps = relative_epsilon(w, cfg.mask_relative).max(f64::MIN_POSITIVE);
        let floor = cfg.negativity_floor;

        let sigma_loop = loops.sigma();
        let sigma = FluxComparison::new(sigma_loop, 0.0, sigma_loop, oracle.rate(Quantity::Sigma)?);

        let svn_loop = loops.svn(cfg.svn_epsilon)?;
        let vol_svn = volume_term(w, pot, cfg.nu_max, eps, region, VolumeWeight::One, floor)?;
        let svn = FluxComparison::new(svn_loop, vol_svn.value, svn_loop + vol_svn.value, oracle.rate(Quantity::VonNeumann)?);

        let purity_loop = loops.purity();
        let vol_p = volume_term(w, pot, cfg.nu_max, eps, region, VolumeWeight::Wigner, floor)?;
        let purity = FluxComparison::new(
            purity_loop,
            vol_p.value,
            2.0 * PI * (purity_loop - vol_p.value),
            oracle.rate(Quantity::Purity)?,
        );

        let renyi = cfg
            .betas
            .iter()
            .map(|&beta| {
                let lf = loops.renyi(beta, floor)?;
                let vol = volume_term(w, pot, cfg.nu_max, eps, region, VolumeWeight::Renyi { beta }, floor)?;
                let moment = region_quantity(w, region, Quantity::Renyi { beta }, &oracle.config)?;
                Ok(RenyiComparison {
                    beta,
                    comparison: FluxComparison::new(lf, vol.value, lf - vol.value, oracle.rate(Quantity::Renyi { beta })?),
                    region_moment: moment,
                    rate_as_printed: if moment != 0.0 { lf / moment } else { 0.0 },
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(InstantFluxes {
            tau: w.tau(),
            normalization: integrate_volume(w.grid(), w.values(), None)?,
            sigma,
            svn,
            purity,
            renyi,
            masked_region_nodes: vol_svn.masked_nodes,
        })
    }

    fn loop_values(&self, loops: &LoopSamples) -> Result<LoopValues> {
        Ok(LoopValues {
            sigma: loops.sigma(),
            svn: loops.svn(self.config.svn_epsilon)?,
            purity: loops.purity(),
            renyi: self
                .config
                .betas
                .iter()
                .map(|&b| loops.renyi(b, self.config.negativity_floor))
                .collect::<Result<_>>()?,
        })
    }

    fn region_values(&self, w: &WignerField, region: &Region, cfg: &OracleConfig) -> Result<LoopValues> {
        Ok(LoopValues {
            sigma: region_quantity(w, region, Quantity::Sigma, cfg)?,
            svn: region_quantity(w, region, Quantity::VonNeumann, cfg)?,
            purity: region_quantity(w, region, Quantity::Purity, cfg)?,
            renyi: self
                .config
                .betas
                .iter()
                .map(|&beta| region_quantity(w, region, Quantity::Renyi { beta }, cfg))
                .collect::<Result<_>>()?,
        })
    }

    /// One-period accumulated loops starting at `phi`'s time.
    pub fn accumulate(&self, phi: &Wavefunction, w_start: &WignerField, region: &Region) -> Result<AccumulatedFluxes> {
        let cfg = self.config;
        let period = self.orbit.period;
        let tau0 = phi.tau();
        let frozen = self.loop_values(&LoopSamples::evaluate(w_start, self.orbit, self.potential, cfg.nu_max)?)?;

        let m = cfg.accumulation_segments.max(1);
        let n = self.orbit.len();
        let mut merged = LoopSamples { w: vec![0.0; n], delta_jk: vec![0.0; n], ..LoopSamples::evaluate(w_start, self.orbit, self.potential, cfg.nu_max)? };
        let mut state = phi.clone();
        for seg in 0..m {
            let (lo, hi) = (seg * n / m, (seg + 1) * n / m);
            if lo == hi {
                continue;
            }
            let t_mid = tau0 + 0.5 * (self.orbit.samples[lo].tau + self.orbit.samples[hi - 1].tau);
            state = evolve_to(&state, self.potential, t_mid, cfg.dtau_evolve)?;
            let w = wigner_transform(&state, &self.grid)?;
            let djk = delta_current_k(&w, self.potential, cfg.nu_max)?;
            for i in lo..hi {
                let s = &self.orbit.samples[i];
                merged.w[i] = crate::fluxes::interpolate_at(&self.grid, w.values(), s.x, s.k)?;
                merged.delta_jk[i] = interpolate_at(&self.grid, &djk, s.x, s.k)?;
            }
        }
        let time_consistent = self.loop_values(&merged)?;

        let ocfg = self.oracle_config(tau0);
        let end = evolve_to(&state, self.potential, tau0 + period, cfg.dtau_evolve)?;
        let w_end = wigner_transform(&end, &self.grid)?;
        let q0 = self.region_values(w_start, region, &ocfg)?;
        let q1 = self.region_values(&w_end, region, &ocfg)?;
        let oracle_net_change = LoopValues {
            sigma: q1.sigma - q0.sigma,
            svn: q1.svn - q0.svn,
            purity: q1.purity - q0.purity,
            renyi: q1.renyi.iter().zip(&q0.renyi).map(|(a, b)| a - b).collect(),
        };
        Ok(AccumulatedFluxes { tau_start: tau0, period, frozen, time_consistent, segments: m, oracle_net_change })
    }

    /// Evolves the state through every output time and assembles the report.
    pub fn run(&self) -> Result<AnalysisOutput> {
        let cfg = self.config;
        for &b in &cfg.betas {
            validate_beta(b)?;
        }
        let mut times = cfg.output_times.clone();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.is_empty() {
            return Err(Error::InvalidParameter("at least one output time is required".into()));
        }
        let region = Region::from_polygon(&self.grid, &self.orbit.polygon(), cfg.region_subsamples)?;
        let mut phi = evaluate_state(self.spec, &self.coordinates, 0.0)?;
        let mut instants = Vec::with_capacity(times.len());
        let mut snapshots = Vec::with_capacity(times.len());
        let mut first: Option<(Wavefunction, WignerField)> = None;
        for &tau in &times {
            let minus = evolve_to(&phi, self.potential, tau - cfg.dtau_fd, cfg.dtau_evolve)?;
            let at = evolve_to(&minus, self.potential, tau, cfg.dtau_evolve)?;
            let plus = evolve_to(&at, self.potential, tau + cfg.dtau_fd, cfg.dtau_evolve)?;
            let oracle = Oracle {
                region: region.clone(),
                w_minus: wigner_transform(&minus, &self.grid)?,
                w_plus: wigner_transform(&plus, &self.grid)?,
                config: self.oracle_config(tau),
            };
            let w = wigner_transform(&at, &self.grid)?;
            instants.push(self.instant(&w, &region, &oracle)?);
            if first.is_none() {
                first = Some((at.clone(), w.clone()));
            }
            snapshots.push(w);
            phi = plus;
        }
        let accumulated = match (cfg.accumulation_segments, first) {
            (0, _) | (_, None) => None,
            (_, Some((phi0, w0))) => Some(self.accumulate(&phi0, &w0, &region)?),
        };
        let mut notes = Vec::new();
        if self.orbit.is_parity_asymmetric() {
            notes.push("orbit is not symmetric about x = 0; parity cancellation of volume terms does not apply".into());
        }
        notes.push("purity loop_flux is printed without 2*pi; full_form = 2*pi*(loop_flux - volume_term) matches dP_C/dtau".into());
        notes.push("renyi full_form = loop_flux - volume_term matches d/dtau of integral_V W^beta".into());
        let (x0, k0) = self.orbit.samples.first().map(|s| (s.x, s.k)).unwrap_or_default();
        let report = FluxReport {
            potential: self.potential.label().to_string(),
            state: self.spec.clone(),
            grid: GridEcho {
                x_max: self.grid.x_max(),
                k_max: self.grid.k_max(),
                n_x: self.grid.n_x(),
                n_k: self.grid.n_k(),
                coordinate_nodes: self.coordinates.len(),
                coordinate_extent: self.coordinates.x_max(),
            },
            config: cfg.clone(),
            orbit: OrbitSummary {
                start: (x0, k0),
                energy: self.orbit.energy,
                period: self.orbit.period,
                samples: self.orbit.len(),
                circumference: self.orbit.circumference(),
                enclosed_area: self.orbit.enclosed_area(),
                closure: self.orbit.closure,
                parity_asymmetric: self.orbit.is_parity_asymmetric(),
            },
            instants,
            accumulated,
            notes,
        };
        Ok(AnalysisOutput { report, snapshots })
    }
}
