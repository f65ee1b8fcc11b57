//! Expectation values, purity and the entropy family of a Wigner field.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{integrate_volume, PhaseSpaceGrid, Region};
use crate::states::WignerField;

/// Default floor below which `|W|` is dropped from the von Neumann sum.
pub const DEFAULT_SVN_EPSILON: f64 = 1e-30;

/// Magnitude below which a negative W node counts as quadrature roundoff
/// rather than genuine negativity when raising W to a non-integer power.
pub const DEFAULT_NEGATIVITY_FLOOR: f64 = 1e-14;

/// Phase-space representative of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSymbol {
    pub label: String,
    pub values: Array2<f64>,
}

impl WeylSymbol {
    pub fn new(label: impl Into<String>, values: Array2<f64>) -> Result<Self> {
        if let Some(((ix, ik), &value)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { ix, ik, value });
        }
        Ok(Self { label: label.into(), values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(label: impl Into<String>, grid: &PhaseSpaceGrid, f: F) -> Result<Self> {
        Self::new(label, grid.sample(f))
    }

    pub fn identity(grid: &PhaseSpaceGrid) -> Self {
        Self { label: "1".into(), values: Array2::ones(grid.shape()) }
    }
}

/// `<Q> = integral W Q^W`.
pub fn expectation(w: &WignerField, symbol: &WeylSymbol) -> Result<f64> {
    w.grid().check_shape(&symbol.values, &format!("symbol '{}'", symbol.label))?;
    integrate_volume(w.grid(), &(w.values() * &symbol.values), None)
}

/// `2 pi integral W^2`.
pub fn purity(w: &WignerField) -> Result<f64> {
    purity_over(w, None)
}

pub fn purity_over(w: &WignerField, region: Option<&Region>) -> Result<f64> {
    Ok(2.0 * PI * integrate_volume(w.grid(), &w.values().mapv(|v| v * v), region)?)
}

/// `-integral W ln|W|` over nodes with `|W| > epsilon`.
pub fn von_neumann_entropy(w: &WignerField, epsilon: f64) -> Result<f64> {
    von_neumann_entropy_over(w, epsilon, None)
}

pub fn von_neumann_entropy_over(w: &WignerField, epsilon: f64, region: Option<&Region>) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let integrand = w.values().mapv(|v| if v.abs() > epsilon { -v * v.abs().ln() } else { 0.0 });
    integrate_volume(w.grid(), &integrand, region)
}

pub fn validate_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    if beta == 1.0 {
        return Err(Error::InvalidParameter("beta must differ from 1".into()));
    }
    Ok(())
}

/// How `W^p` is formed for a given exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerRule {
    /// Integer exponent: signed `powi`, always real.
    Integer(i32),
    /// Non-integer exponent: defined for `W >= 0`; `|W| <= floor` maps to 0.
    Real { exponent: f64, floor: f64 },
}

impl PowerRule {
    pub fn new(exponent: f64, floor: f64) -> Self {
        if exponent.fract() == 0.0 && exponent.abs() < i32::MAX as f64 {
            PowerRule::Integer(exponent as i32)
        } else {
            PowerRule::Real { exponent, floor }
        }
    }

    /// `None` marks a genuinely negative value under a non-integer exponent.
    pub fn apply(&self, v: f64) -> Option<f64> {
        match *self {
            PowerRule::Integer(n) => Some(v.powi(n)),
            PowerRule::Real { exponent, floor } => {
                if v.abs() <= floor {
                    Some(0.0)
                } else if v < 0.0 {
                    None
                } else {
                    Some(v.powf(exponent))
                }
            }
        }
    }

    fn floor(&self) -> f64 {
        match *self {
            PowerRule::Integer(_) => 0.0,
            PowerRule::Real { floor, .. } => floor,
        }
    }
}

/// Node-wise `W^exponent` under [`PowerRule`], or the count of offending nodes.
pub fn power_field(w: &WignerField, exponent: f64, floor: f64) -> Result<Array2<f64>> {
    let rule = PowerRule::new(exponent, floor);
    let mut negatives = 0usize;
    let out = w.values().mapv(|v| {
        rule.apply(v).unwrap_or_else(|| {
            negatives += 1;
            0.0
        })
    });
    if negatives > 0 {
        return Err(Error::NegativeForRealPower { beta: exponent, count: negatives, floor: rule.floor() });
    }
    Ok(out)
}

/// `integral W^beta` (region-restricted when `region` is given).
pub fn renyi_moment(w: &WignerField, beta: f64, floor: f64, region: Option<&Region>) -> Result<f64> {
    validate_beta(beta)?;
    integrate_volume(w.grid(), &power_field(w, beta, floor)?, region)
}

/// `R_beta = ln(integral W^beta) / (1 - beta)` in natural-log units.
pub fn renyi_entropy(w: &WignerField, beta: f64) -> Result<f64> {
    renyi_entropy_with(w, beta, DEFAULT_NEGATIVITY_FLOOR, None)
}

pub fn renyi_entropy_with(w: &WignerField, beta: f64, floor: f64, region: Option<&Region>) -> Result<f64> {
    let moment = renyi_moment(w, beta, floor, region)?;
    if !(moment > 0.0) {
        return Err(Error::NonPositiveIntegral { value: moment });
    }
    Ok(moment.ln() / (1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(grid: PhaseSpaceGrid) -> WignerField {
        WignerField::from_fn(grid, 0.0, |x, k| (-x * x - k * k).exp() / PI).unwrap()
    }

    fn excited(grid: PhaseSpaceGrid, n: usize) -> WignerField {
        // Laguerre form for n = 1, 2
        WignerField::from_fn(grid, 0.0, |x, k| {
            let u = 2.0 * (x * x + k * k);
            let l = match n {
                1 => 1.0 - u,
                2 => 1.0 - 2.0 * u + 0.5 * u * u,
                _ => unreachable!(),
            };
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign * l * (-0.5 * u).exp() / PI
        })
        .unwrap()
    }

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::square(8.0, 256).unwrap()
    }

    #[test]
    fn identity_expectation_is_normalization() {
        let g = grid();
        let w = excited(g, 1);
        let one = expectation(&w, &WeylSymbol::identity(&g)).unwrap();
        assert!((one - 1.0).abs() < 1e-6);
        assert_eq!(one, integrate_volume(&g, w.values(), None).unwrap());
    }

    #[test]
    fn ground_state_energy_and_parity() {
        let g = grid();
        let w = ground(g);
        let h = WeylSymbol::from_fn("H", &g, |x, k| 0.5 * (x * x + k * k)).unwrap();
        assert!((expectation(&w, &h).unwrap() - 0.5).abs() < 1e-4);
        let x = WeylSymbol::from_fn("x", &g, |x, _| x).unwrap();
        assert!(expectation(&w, &x).unwrap().abs() < 1e-8);
        let small = PhaseSpaceGrid::square(8.0, 64).unwrap();
        assert!(matches!(expectation(&w, &WeylSymbol::identity(&small)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn purity_values() {
        let g = grid();
        assert!((purity(&ground(g)).unwrap() - 1.0).abs() < 1e-4);
        assert!((purity(&excited(g, 1)).unwrap() - 1.0).abs() < 1e-4);
        let mix = excited(g, 1).combine(0.5, &excited(g, 2), 0.5).unwrap();
        assert!((purity(&mix).unwrap() - 0.5).abs() < 1e-3);
        assert_eq!(purity(&ground(g).scaled(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn ground_state_entropy_closed_form() {
        let g = grid();
        let s = von_neumann_entropy(&ground(g), 1e-30).unwrap();
        assert!((s - (1.0 + PI.ln())).abs() < 1e-3, "{s}");
        assert_eq!(von_neumann_entropy(&ground(g).scaled(0.0), 1e-30).unwrap(), 0.0);
        let s12 = von_neumann_entropy(&ground(g), 1e-12).unwrap();
        assert!((s - s12).abs() < 1e-6);
    }

    #[test]
    fn renyi_two_matches_purity() {
        let g = grid();
        for w in [ground(g), excited(g, 1), excited(g, 2)] {
            let r2 = renyi_entropy(&w, 2.0).unwrap();
            let p = purity(&w).unwrap();
            assert!(((-r2).exp() - p / (2.0 * PI)).abs() < 1e-10 * p);
        }
        assert!((renyi_entropy(&ground(g), 2.0).unwrap() - (2.0 * PI).ln()).abs() < 1e-4);
    }

    #[test]
    fn renyi_rejections() {
        let g = grid();
        assert!(matches!(renyi_entropy(&ground(g), 1.0), Err(Error::InvalidParameter(_))));
        assert!(renyi_entropy(&ground(g), -0.5).is_err());
        match renyi_entropy(&excited(g, 1), 0.5) {
            Err(Error::NegativeForRealPower { count, .. }) => assert!(count > 0),
            other => panic!("unexpected {other:?}"),
        }
        // odd integer power of a negative-dominated field
        let neg = ground(g).scaled(-1.0);
        assert!(matches!(renyi_entropy(&neg, 3.0), Err(Error::NonPositiveIntegral { .. })));
    }

    #[test]
    fn renyi_definition_roundtrip() {
        let g = grid();
        let w = excited(g, 2);
        for beta in [2.0, 3.0, 4.0] {
            let r = renyi_entropy(&w, beta).unwrap();
            let m = renyi_moment(&w, beta, DEFAULT_NEGATIVITY_FLOOR, None).unwrap();
            assert!((((1.0 - beta) * r).exp() - m).abs() <= 1e-14 * m.abs());
        }
    }

    #[test]
    fn renyi_near_one_brackets_shannon() {
        let g = grid();
        let w = ground(g);
        let s = von_neumann_entropy(&w, 1e-30).unwrap();
        let lo = renyi_entropy(&w, 1.0 - 1e-4).unwrap();
        let hi = renyi_entropy(&w, 1.0 + 1e-4).unwrap();
        assert!(lo >= hi);
        assert!((lo - s).abs() < 1e-3 && (hi - s).abs() < 1e-3);
    }
}
