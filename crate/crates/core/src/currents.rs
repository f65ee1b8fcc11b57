//! Wigner currents with the truncated Moyal series for the momentum component,
//! the quantum remainder `dJ`, the phase velocity `w = J / W` and its divergence.

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{partial_derivative, Axis, PhaseSpaceGrid, MAX_DERIVATIVE_ORDER};
use crate::states::WignerField;

/// Largest truncation order whose k-derivatives the stencils support.
pub const MAX_NU: usize = MAX_DERIVATIVE_ORDER / 2;

/// Default series truncation. Catalog potentials are at most quartic, so the
/// series ends at nu = 1 and the nu = 2 slot checks termination.
pub const DEFAULT_NU_MAX: usize = 2;

/// Default relative threshold for masking `|W|` in `w` and `div w`.
pub const DEFAULT_MASK_RELATIVE: f64 = 1e-12;

/// A dimensionless potential `U(x)` with analytic derivatives.
pub trait Potential: Send + Sync {
    fn label(&self) -> &str;
    fn value(&self, x: f64) -> f64;
    /// `d^order U / dx^order`, or `None` if the order is not available.
    fn derivative(&self, x: f64, order: usize) -> Option<f64>;
    fn parity_even(&self) -> bool;
    /// True when the derivative of this order vanishes identically in `x`.
    fn derivative_vanishes(&self, _order: usize) -> bool {
        false
    }
}

/// Catalog shapes of the dimensionless potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `x^2 / 2`
    Harmonic,
    /// `x^2 / 2 + lambda x^4`
    Quartic { lambda: f64 },
    /// `x^4 / 4`
    PureQuartic,
    /// `-x^2 / 2 + lambda x^4`
    DoubleWell { lambda: f64 },
}

/// Polynomial potential `U(x) = sum_n c_n x^n`; every derivative is analytic.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    label: String,
    coefficients: Vec<f64>,
}

impl PotentialModel {
    pub fn polynomial(label: impl Into<String>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("potential coefficients must be finite".into()));
        }
        let mut coefficients = coefficients;
        while coefficients.len() > 1 && coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Ok(Self { label: label.into(), coefficients })
    }

    pub fn from_kind(kind: PotentialKind) -> Result<Self> {
        match kind {
            PotentialKind::Harmonic => Ok(Self::harmonic()),
            PotentialKind::PureQuartic => Ok(Self::pure_quartic()),
            PotentialKind::Quartic { lambda } => Self::quartic(lambda),
            PotentialKind::DoubleWell { lambda } => Self::double_well(lambda),
        }
    }

    pub fn harmonic() -> Self {
        Self { label: "harmonic".into(), coefficients: vec![0.0, 0.0, 0.5] }
    }

    pub fn pure_quartic() -> Self {
        Self { label: "pure_quartic".into(), coefficients: vec![0.0, 0.0, 0.0, 0.0, 0.25] }
    }

    pub fn quartic(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("quartic lambda = {lambda} must be >= 0")));
        }
        Self::polynomial(format!("quartic(lambda={lambda})"), vec![0.0, 0.0, 0.5, 0.0, lambda])
    }

    pub fn double_well(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("double-well lambda = {lambda} must be > 0")));
        }
        Self::polynomial(format!("double_well(lambda={lambda})"), vec![0.0, 0.0, -0.5, 0.0, lambda])
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

impl Potential for PotentialModel {
    fn label(&self) -> &str {
        &self.label
    }

    fn value(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative(&self, x: f64, order: usize) -> Option<f64> {
        if order > self.degree() {
            return Some(0.0);
        }
        // Horner on the differentiated coefficients n!/(n-order)! c_n
        let mut acc = 0.0;
        for n in (order..self.coefficients.len()).rev() {
            let falling: f64 = ((n - order + 1)..=n).map(|m| m as f64).product();
            acc = acc * x + falling * self.coefficients[n];
        }
        Some(acc)
    }

    fn parity_even(&self) -> bool {
        self.coefficients.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    fn derivative_vanishes(&self, order: usize) -> bool {
        order > self.degree()
    }
}

/// `J = (J_x, J_k)` sampled on the phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub grid: PhaseSpaceGrid,
    pub jx: Array2<f64>,
    pub jk: Array2<f64>,
    pub tau: f64,
    pub nu_max: usize,
}

/// Real series coefficient `-(i/2)^{2 nu} / (2 nu + 1)! = -(-1/4)^nu / (2 nu + 1)!`.
pub fn moyal_coefficient(nu: usize) -> f64 {
    let factorial: f64 = (1..=2 * nu + 1).map(|m| m as f64).product();
    -(-0.25f64).powi(nu as i32) / factorial
}

/// `J_x = k W`.
pub fn current_x(w: &WignerField) -> Array2<f64> {
    let ks = w.grid().ks();
    let mut out = w.values().clone();
    for mut row in out.rows_mut() {
        row.iter_mut().zip(&ks).for_each(|(v, k)| *v *= k);
    }
    out
}

/// `dU^(order)/dx^(order)` at every x node, or the missing-order error.
fn derivative_column(grid: &PhaseSpaceGrid, potential: &dyn Potential, order: usize) -> Result<Vec<f64>> {
    grid.xs()
        .into_iter()
        .map(|x| {
            potential
                .derivative(x, order)
                .ok_or_else(|| Error::MissingDerivative { label: potential.label().to_string(), order })
        })
        .collect()
}

/// The `nu`-th series term `-(i/2)^{2nu}/(2nu+1)! U^(2nu+1)(x) d^{2nu}W/dk^{2nu}`.
pub fn moyal_term(w: &WignerField, potential: &dyn Potential, nu: usize) -> Result<Array2<f64>> {
    let grid = w.grid();
    let order = 2 * nu + 1;
    let du = derivative_column(grid, potential, order)?;
    let coeff = moyal_coefficient(nu);
    let mut term = if nu == 0 { w.values().clone() } else { partial_derivative(grid, w.values(), Axis::K, 2 * nu)? };
    for (mut row, d) in term.rows_mut().into_iter().zip(&du) {
        let c = coeff * d;
        row.iter_mut().for_each(|v| *v *= c);
    }
    Ok(term)
}

/// `J_k` truncated at `nu_max`. Terms whose potential derivative vanishes
/// identically are skipped, so any `nu_max` past the series end gives
/// bit-identical output.
pub fn current_k(w: &WignerField, potential: &dyn Potential, nu_max: usize) -> Result<Array2<f64>> {
    if nu_max > MAX_NU {
        return Err(Error::DerivativeOrder { order: 2 * nu_max, max: MAX_DERIVATIVE_ORDER });
    }
    let mut jk = moyal_term(w, potential, 0)?;
    for nu in 1..=nu_max {
        if potential.derivative_vanishes(2 * nu + 1) {
            continue;
        }
        jk += &moyal_term(w, potential, nu)?;
    }
    Ok(jk)
}

pub fn current(w: &WignerField, potential: &dyn Potential, nu_max: usize) -> Result<CurrentField> {
    Ok(CurrentField {
        grid: *w.grid(),
        jx: current_x(w),
        jk: current_k(w, potential, nu_max)?,
        tau: w.tau(),
        nu_max,
    })
}

fn check_pair(j: &CurrentField, w: &WignerField) -> Result<()> {
    if j.grid != *w.grid() {
        return Err(Error::GridMismatch("current and Wigner field grids differ".into()));
    }
    if j.tau != w.tau() {
        return Err(Error::TauMismatch(format!("current at tau={}, W at tau={}", j.tau, w.tau())));
    }
    Ok(())
}

/// `dJ = J - v_C W` with `v_C = (k, -U'(x))`: `dJ_x = 0`, `dJ_k = J_k + U'(x) W`.
pub fn delta_current(j: &CurrentField, w: &WignerField, potential: &dyn Potential) -> Result<CurrentField> {
    check_pair(j, w)?;
    let grid = w.grid();
    let force = derivative_column(grid, potential, 1)?;
    let mut djk = j.jk.clone();
    for ((mut row, wrow), f) in djk.rows_mut().into_iter().zip(w.values().rows()).zip(&force) {
        row.iter_mut().zip(wrow).for_each(|(d, wv)| *d += f * wv);
    }
    Ok(CurrentField { grid: *grid, jx: grid.zeros(), jk: djk, tau: j.tau, nu_max: j.nu_max })
}

/// The quantum remainder `dJ_k = sum_{nu=1}^{nu_max}` computed term by term
/// (no cancellation against the classical force term).
pub fn delta_current_k(w: &WignerField, potential: &dyn Potential, nu_max: usize) -> Result<Array2<f64>> {
    if nu_max > MAX_NU {
        return Err(Error::DerivativeOrder { order: 2 * nu_max, max: MAX_DERIVATIVE_ORDER });
    }
    let mut out = w.grid().zeros();
    for nu in 1..=nu_max {
        if potential.derivative_vanishes(2 * nu + 1) {
            continue;
        }
        out += &moyal_term(w, potential, nu)?;
    }
    Ok(out)
}

/// A field defined only where `mask` is true; other entries hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub values: Array2<f64>,
    pub mask: Array2<bool>,
}

impl MaskedField {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Largest `|value|` over unmasked nodes at least `margin` from the edges.
    pub fn interior_max_abs(&self, grid: &PhaseSpaceGrid, margin: usize) -> f64 {
        self.values
            .indexed_iter()
            .filter(|((i, j), _)| self.mask[[*i, *j]] && grid.is_interior(*i, *j, margin))
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVelocity {
    pub wx: Array2<f64>,
    pub wk: Array2<f64>,
    pub mask: Array2<bool>,
}

/// Mask threshold `relative * max|W|`.
pub fn relative_epsilon(w: &WignerField, relative: f64) -> f64 {
    relative * w.max_abs()
}

fn validate_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    Ok(())
}

/// `w = J / W` wherever `|W| > epsilon`.
pub fn phase_velocity(j: &CurrentField, w: &WignerField, epsilon: f64) -> Result<PhaseVelocity> {
    check_pair(j, w)?;
    validate_epsilon(epsilon)?;
    let mask = w.values().mapv(|v| v.abs() > epsilon);
    let divide = |num: &Array2<f64>| {
        let mut out = w.grid().zeros();
        Zip::from(&mut out).and(num).and(w.values()).and(&mask).for_each(|o, &n, &d, &m| {
            if m {
                *o = n / d;
            }
        });
        out
    };
    Ok(PhaseVelocity { wx: divide(&j.jx), wk: divide(&j.jk), mask })
}

/// `div w = (W div J - J . grad W) / W^2`, masked where `|W| <= epsilon`.
pub fn div_w(j: &CurrentField, w: &WignerField, epsilon: f64) -> Result<MaskedField> {
    let numerator = w_div_w_numerator(j, w)?;
    validate_epsilon(epsilon)?;
    let mask = w.values().mapv(|v| v.abs() > epsilon);
    let mut values = w.grid().zeros();
    Zip::from(&mut values).and(&numerator).and(w.values()).and(&mask).for_each(|o, &n, &wv, &m| {
        if m {
            *o = n / (wv * wv);
        }
    });
    Ok(MaskedField { values, mask })
}

/// `W div J - J . grad W`, the numerator of `div w`.
pub fn w_div_w_numerator(j: &CurrentField, w: &WignerField) -> Result<Array2<f64>> {
    check_pair(j, w)?;
    let grid = w.grid();
    let div_j = partial_derivative(grid, &j.jx, Axis::X, 1)? + partial_derivative(grid, &j.jk, Axis::K, 1)?;
    let dwx = partial_derivative(grid, w.values(), Axis::X, 1)?;
    let dwk = partial_derivative(grid, w.values(), Axis::K, 1)?;
    let mut flow = grid.zeros();
    Zip::from(&mut flow).and(&j.jx).and(&j.jk).and(&dwx).and(&dwk).for_each(|o, &jx, &jk, &gx, &gk| *o = jx * gx + jk * gk);
    let mut out = grid.zeros();
    Zip::from(&mut out).and(w.values()).and(&div_j).and(&flow).for_each(|o, &wv, &dj, &f| *o = wv * dj - f);
    Ok(out)
}

/// `div J` by the shared central stencils.
pub fn divergence(j: &CurrentField) -> Result<Array2<f64>> {
    Ok(partial_derivative(&j.grid, &j.jx, Axis::X, 1)? + partial_derivative(&j.grid, &j.jk, Axis::K, 1)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityResidual {
    pub field: Array2<f64>,
    /// Largest residual over nodes clear of every stencil's reach past the edge.
    pub interior_max: f64,
}

/// `(W(tau+dtau) - W(tau-dtau)) / (2 dtau) + div J(tau)`.
pub fn continuity_residual(
    w_minus: &WignerField,
    w_0: &WignerField,
    w_plus: &WignerField,
    potential: &dyn Potential,
    nu_max: usize,
    dtau: f64,
) -> Result<ContinuityResidual> {
    if !(dtau.is_finite() && dtau > 0.0) {
        return Err(Error::InvalidParameter(format!("dtau = {dtau} must be positive")));
    }
    let tol = 1e-9 * (1.0 + w_0.tau().abs());
    if ((w_0.tau() - w_minus.tau()) - dtau).abs() > tol || ((w_plus.tau() - w_0.tau()) - dtau).abs() > tol {
        return Err(Error::TauMismatch(format!(
            "snapshots at {}, {}, {} are not spaced by dtau = {dtau}",
            w_minus.tau(),
            w_0.tau(),
            w_plus.tau()
        )));
    }
    if w_minus.grid() != w_0.grid() || w_plus.grid() != w_0.grid() {
        return Err(Error::GridMismatch("continuity snapshots live on different grids".into()));
    }
    let j = current(w_0, potential, nu_max)?;
    let field = (w_plus.values() - w_minus.values()) / (2.0 * dtau) + divergence(&j)?;
    let margin = crate::grid::stencil_half_width(2 * nu_max.max(1)) + 1;
    let grid = w_0.grid();
    let interior_max = field
        .indexed_iter()
        .filter(|((i, k), _)| grid.is_interior(*i, *k, margin))
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    Ok(ContinuityResidual { field, interior_max })
}
