//! Uniform phase-space and coordinate grids, trapezoidal quadrature, and
//! fourth-order central finite differences with zero extension past the edges.

use ndarray::{Array2, Axis as NdAxis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum node count per phase-space axis.
pub const MIN_NODES: usize = 16;

/// Highest derivative order the stencil builder supports. Four Moyal terms
/// beyond the classical one need `(d/dk)^8`.
pub const MAX_DERIVATIVE_ORDER: usize = 8;

/// Formal accuracy order of every central stencil.
pub const STENCIL_ACCURACY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    K,
}

/// Symmetric rectangular discretization of dimensionless `(x, k)`.
///
/// Field arrays are indexed `[ix, ik]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    x_max: f64,
    k_max: f64,
    n_x: usize,
    n_k: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x_max: f64, k_max: f64, n_x: usize, n_k: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0 && k_max.is_finite() && k_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extents must be finite and positive (x_max={x_max}, k_max={k_max})"
            )));
        }
        if n_x < MIN_NODES || n_k < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes per axis (n_x={n_x}, n_k={n_k})"
            )));
        }
        Ok(Self { x_max, k_max, n_x, n_k })
    }

    /// Square grid `[-extent, extent]^2` with `n` nodes per axis.
    pub fn square(extent: f64, n: usize) -> Result<Self> {
        Self::new(extent, extent, n, n)
    }

    pub fn x_min(&self) -> f64 {
        -self.x_max
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn k_min(&self) -> f64 {
        -self.k_max
    }
    pub fn k_max(&self) -> f64 {
        self.k_max
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_k(&self) -> usize {
        self.n_k
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_k)
    }
    pub fn h_x(&self) -> f64 {
        2.0 * self.x_max / (self.n_x - 1) as f64
    }
    pub fn h_k(&self) -> f64 {
        2.0 * self.k_max / (self.n_k - 1) as f64
    }

    /// Node coordinate; computed symmetrically so that `x(i) == -x(n_x-1-i)`
    /// holds bit-for-bit.
    pub fn x(&self, i: usize) -> f64 {
        symmetric_node(i, self.n_x, self.h_x())
    }
    pub fn k(&self, j: usize) -> f64 {
        symmetric_node(j, self.n_k, self.h_k())
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }
    pub fn ks(&self) -> Vec<f64> {
        (0..self.n_k).map(|j| self.k(j)).collect()
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.h_x(),
            Axis::K => self.h_k(),
        }
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros((self.n_x, self.n_k))
    }

    /// Samples `f(x, k)` at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> Array2<f64> {
        let xs = self.xs();
        let ks = self.ks();
        Array2::from_shape_fn((self.n_x, self.n_k), |(i, j)| f(xs[i], ks[j]))
    }

    /// True if `(i, j)` is at least `margin` nodes away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.n_x && j + margin < self.n_k
    }

    /// Nodes whose stencils of every order up to `order` never reach past the edge.
    pub fn interior_margin(order: usize) -> usize {
        stencil_half_width(order.max(1))
    }

    pub fn check_shape(&self, field: &Array2<f64>, what: &str) -> Result<()> {
        if field.dim() != self.shape() {
            return Err(Error::GridMismatch(format!(
                "{what} has shape {:?}, grid is {:?}",
                field.dim(),
                self.shape()
            )));
        }
        Ok(())
    }

    pub fn same_as(&self, other: &PhaseSpaceGrid) -> bool {
        self == other
    }
}

fn symmetric_node(i: usize, n: usize, h: f64) -> f64 {
    // (2i - (n-1)) * h / 2, evaluated so mirrored nodes are exact negatives
    let twice = 2 * i as i64 - (n as i64 - 1);
    twice as f64 * h * 0.5
}

/// Symmetric 1-D coordinate grid carrying wavefunction samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateGrid {
    x_max: f64,
    n: usize,
}

impl CoordinateGrid {
    pub fn new(x_max: f64, n: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::InvalidGrid(format!("coordinate extent {x_max} must be positive")));
        }
        if n < MIN_NODES || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "coordinate node count {n} must be a power of two >= {MIN_NODES}"
            )));
        }
        Ok(Self { x_max, n })
    }

    /// Coordinate grid with `n` nodes and the same spacing as the phase-space
    /// x-axis, so every x node of `grid` is a pair midpoint of this grid.
    pub fn matching(grid: &PhaseSpaceGrid, n: usize) -> Result<Self> {
        let h = grid.h_x();
        Self::new(0.5 * (n as f64 - 1.0) * h, n)
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h(&self) -> f64 {
        2.0 * self.x_max / (self.n - 1) as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        symmetric_node(i, self.n, self.h())
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Scale factors between physical `(q, p, t)` and dimensionless `(x, k, tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessMap {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl DimensionlessMap {
    pub fn new(m: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("m", m), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { m, omega, hbar })
    }

    pub fn unit() -> Self {
        Self { m: 1.0, omega: 1.0, hbar: 1.0 }
    }

    pub fn x_from_q(&self, q: f64) -> f64 {
        (self.m * self.omega / self.hbar).sqrt() * q
    }
    pub fn q_from_x(&self, x: f64) -> f64 {
        x / (self.m * self.omega / self.hbar).sqrt()
    }
    pub fn k_from_p(&self, p: f64) -> f64 {
        p / (self.m * self.omega * self.hbar).sqrt()
    }
    pub fn p_from_k(&self, k: f64) -> f64 {
        k * (self.m * self.omega * self.hbar).sqrt()
    }
    pub fn tau_from_t(&self, t: f64) -> f64 {
        self.omega * t
    }
    pub fn t_from_tau(&self, tau: f64) -> f64 {
        tau / self.omega
    }
    /// Dimensionless energy `H / (hbar omega)`.
    pub fn energy_to_dimensionless(&self, energy: f64) -> f64 {
        energy / (self.hbar * self.omega)
    }
    /// `W_dimensionless = (m omega hbar)^{1/2} W(q, p)`.
    pub fn wigner_to_dimensionless(&self, w: f64) -> f64 {
        (self.m * self.omega * self.hbar).sqrt() * w
    }
}

/// Node weights in `[0, 1]` selecting a region of the phase-space grid.
///
/// A plain mask has weights 0/1; regions cut out by a closed curve carry the
/// fraction of each node's cell lying inside the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    weights: Array2<f64>,
}

impl Region {
    pub fn full(grid: &PhaseSpaceGrid) -> Self {
        Self { weights: Array2::ones(grid.shape()) }
    }

    pub fn from_mask(mask: &Array2<bool>) -> Self {
        Self { weights: mask.mapv(|m| if m { 1.0 } else { 0.0 }) }
    }

    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        if let Some(((ix, ik), &value)) =
            weights.indexed_iter().find(|(_, &w)| !(w.is_finite() && (0.0..=1.0).contains(&w)))
        {
            return Err(Error::NonFinite { ix, ik, value });
        }
        Ok(Self { weights })
    }

    /// Interior of a closed polygon (vertices `(x, k)`, implicitly closed).
    ///
    /// Along k the cell overlap with the even-odd interior is exact; along x it
    /// is averaged over `subsamples` vertical lines per cell.
    pub fn from_polygon(grid: &PhaseSpaceGrid, polygon: &[(f64, f64)], subsamples: usize) -> Result<Self> {
        if polygon.len() < 3 {
            return Err(Error::InvalidParameter("polygon needs at least 3 vertices".into()));
        }
        let subsamples = subsamples.max(1);
        let (hx, hk) = (grid.h_x(), grid.h_k());
        let ks = grid.ks();
        let mut weights = grid.zeros();
        let mut crossings = Vec::new();
        for (i, mut row) in weights.axis_iter_mut(NdAxis(0)).enumerate() {
            let xc = grid.x(i);
            for s in 0..subsamples {
                let xs = xc + ((s as f64 + 0.5) / subsamples as f64 - 0.5) * hx;
                vertical_crossings(polygon, xs, &mut crossings);
                for pair in crossings.chunks_exact(2) {
                    let (lo, hi) = (pair[0], pair[1]);
                    let j0 = (((lo - grid.k_min()) / hk) - 0.5).floor().max(0.0) as usize;
                    for (j, &kj) in ks.iter().enumerate().skip(j0) {
                        let cell_lo = kj - 0.5 * hk;
                        if cell_lo >= hi {
                            break;
                        }
                        let overlap = (hi.min(kj + 0.5 * hk) - lo.max(cell_lo)).max(0.0);
                        row[j] += overlap / hk / subsamples as f64;
                    }
                }
            }
        }
        weights.mapv_inplace(|w| w.clamp(0.0, 1.0));
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Nodes with non-zero weight.
    pub fn node_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn area(&self, grid: &PhaseSpaceGrid) -> f64 {
        self.weights.sum() * grid.h_x() * grid.h_k()
    }
}

/// Sorted k-values where the vertical line `x = x0` crosses the polygon.
fn vertical_crossings(polygon: &[(f64, f64)], x0: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = polygon.len();
    for i in 0..n {
        let (xa, ka) = polygon[i];
        let (xb, kb) = polygon[(i + 1) % n];
        // half-open rule so shared vertices count once
        if (xa <= x0) != (xb <= x0) {
            let t = (x0 - xa) / (xb - xa);
            out.push(ka + t * (kb - ka));
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    if out.len() % 2 == 1 {
        out.pop();
    }
}

/// Even-odd point-in-polygon test.
pub fn polygon_contains(polygon: &[(f64, f64)], x: f64, k: f64) -> bool {
    let n = polygon.len();
    let mut inside = false;
    for i in 0..n {
        let (xa, ka) = polygon[i];
        let (xb, kb) = polygon[(i + 1) % n];
        if (xa <= x) != (xb <= x) {
            let kc = ka + (x - xa) / (xb - xa) * (kb - ka);
            if k < kc {
                inside = !inside;
            }
        }
    }
    inside
}

fn first_non_finite(field: &Array2<f64>) -> Option<(usize, usize, f64)> {
    field.indexed_iter().find(|(_, v)| !v.is_finite()).map(|((i, j), &v)| (i, j, v))
}

/// 2-D trapezoidal quadrature of `field`, optionally weighted by `region`.
///
/// Rows are reduced in index order, so the result does not depend on thread
/// scheduling.
pub fn integrate_volume(grid: &PhaseSpaceGrid, field: &Array2<f64>, region: Option<&Region>) -> Result<f64> {
    grid.check_shape(field, "field")?;
    if let Some((ix, ik, value)) = first_non_finite(field) {
        return Err(Error::NonFinite { ix, ik, value });
    }
    if let Some(r) = region {
        grid.check_shape(&r.weights, "region")?;
    }
    let (nx, nk) = grid.shape();
    let edge = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for i in 0..nx {
        let mut row = 0.0;
        for j in 0..nk {
            let mut v = field[[i, j]] * edge(j, nk);
            if let Some(r) = region {
                v *= r.weights[[i, j]];
            }
            row += v;
        }
        total += row * edge(i, nx);
    }
    Ok(total * grid.h_x() * grid.h_k())
}

/// Half-width of the fourth-order central stencil for derivative `order`.
pub fn stencil_half_width(order: usize) -> usize {
    (order + 1) / 2 + STENCIL_ACCURACY / 2 - 1
}

/// Central finite-difference weights on integer offsets `-p..=p` (unit spacing).
pub fn central_weights(order: usize) -> Result<Vec<f64>> {
    if order == 0 || order > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrder { order, max: MAX_DERIVATIVE_ORDER });
    }
    let p = stencil_half_width(order) as i64;
    let offsets: Vec<f64> = (-p..=p).map(|o| o as f64).collect();
    Ok(fornberg(0.0, &offsets, order))
}

/// Fornberg's recursion for finite-difference weights of derivative `m` at `x0`.
fn fornberg(x0: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[d][i] = c1 * (d as f64 * c[d - 1][i - 1] - c5 * c[d][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for d in (1..=mn).rev() {
                c[d][j] = (c4 * c[d][j] - d as f64 * c[d - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c.swap_remove(m)
}

/// `(d/d axis)^order field` by fourth-order central differences; the field is
/// taken as zero beyond the grid edge.
pub fn partial_derivative(grid: &PhaseSpaceGrid, field: &Array2<f64>, axis: Axis, order: usize) -> Result<Array2<f64>> {
    grid.check_shape(field, "field")?;
    let weights = central_weights(order)?;
    let p = stencil_half_width(order);
    let n = match axis {
        Axis::X => grid.n_x(),
        Axis::K => grid.n_k(),
    };
    if n < 2 * p + 1 {
        return Err(Error::StencilTooWide { nodes: n, needed: 2 * p + 1 });
    }
    let scale = grid.spacing(axis).powi(order as i32).recip();
    let ax = match axis {
        Axis::X => NdAxis(0),
        Axis::K => NdAxis(1),
    };
    let mut out = grid.zeros();
    Zip::from(out.lanes_mut(ax)).and(field.lanes(ax)).par_for_each(|mut o, f| {
        for i in 0..n {
            let mut acc = 0.0;
            for (w_idx, &w) in weights.iter().enumerate() {
                let src = i as i64 + w_idx as i64 - p as i64;
                if src >= 0 && (src as usize) < n {
                    acc += w * f[src as usize];
                }
            }
            o[i] = acc * scale;
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_interior_error(grid: &PhaseSpaceGrid, a: &Array2<f64>, b: &Array2<f64>, margin: usize) -> f64 {
        let mut m: f64 = 0.0;
        for ((i, j), v) in a.indexed_iter() {
            if grid.is_interior(i, j, margin) {
                m = m.max((v - b[[i, j]]).abs());
            }
        }
        m
    }

    #[test]
    fn grid_rejects_small_or_degenerate_input() {
        assert!(PhaseSpaceGrid::square(8.0, 15).is_err());
        assert!(PhaseSpaceGrid::square(0.0, 64).is_err());
        assert!(CoordinateGrid::new(8.0, 100).is_err());
        assert!(CoordinateGrid::new(8.0, 128).is_ok());
    }

    #[test]
    fn nodes_are_mirror_symmetric() {
        let g = PhaseSpaceGrid::new(8.0, 6.0, 256, 131).unwrap();
        for i in 0..g.n_x() {
            assert_eq!(g.x(i), -g.x(g.n_x() - 1 - i));
        }
        for j in 0..g.n_k() {
            assert_eq!(g.k(j), -g.k(g.n_k() - 1 - j));
        }
        assert_eq!(g.x(0), -8.0);
        assert_eq!(g.k(65), 0.0);
    }

    #[test]
    fn constant_field_integrates_to_area() {
        let g = PhaseSpaceGrid::square(1.0, 33).unwrap();
        let f = g.sample(|_, _| 1.0);
        assert!((integrate_volume(&g, &f, None).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(integrate_volume(&g, &g.zeros(), None).unwrap(), 0.0);
    }

    #[test]
    fn trapezoid_exact_for_bilinear() {
        let g = PhaseSpaceGrid::new(1.5, 0.75, 17, 40).unwrap();
        let f = g.sample(|x, k| 2.0 + 0.3 * x - 1.1 * k + 0.7 * x * k);
        // odd terms vanish on the symmetric box
        let exact = 2.0 * 3.0 * 1.5;
        assert!((integrate_volume(&g, &f, None).unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_normalization() {
        let g = PhaseSpaceGrid::square(8.0, 256).unwrap();
        let w = g.sample(|x, k| (-x * x - k * k).exp() / std::f64::consts::PI);
        assert!((integrate_volume(&g, &w, None).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_node_is_reported() {
        let g = PhaseSpaceGrid::square(1.0, 16).unwrap();
        let mut f = g.zeros();
        f[[3, 7]] = f64::NAN;
        match integrate_volume(&g, &f, None) {
            Err(Error::NonFinite { ix: 3, ik: 7, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stencil_weights_match_textbook() {
        let w1 = central_weights(1).unwrap();
        let ref1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w1.iter().zip(ref1) {
            assert!((a - b).abs() < 1e-14);
        }
        let w2 = central_weights(2).unwrap();
        let ref2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(ref2) {
            assert!((a - b).abs() < 1e-14);
        }
        let w3 = central_weights(3).unwrap();
        let ref3 = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];
        for (a, b) in w3.iter().zip(ref3) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(central_weights(0).is_err());
        assert!(matches!(central_weights(9), Err(Error::DerivativeOrder { order: 9, .. })));
    }

    #[test]
    fn quadratic_differentiated_exactly() {
        let g = PhaseSpaceGrid::square(2.0, 41).unwrap();
        let f = g.sample(|x, _| x * x);
        let d = partial_derivative(&g, &f, Axis::X, 1).unwrap();
        let exact = g.sample(|x, _| 2.0 * x);
        assert!(max_interior_error(&g, &d, &exact, 2) < 1e-10);
        let d2 = partial_derivative(&g, &f, Axis::X, 2).unwrap();
        assert!(max_interior_error(&g, &d2, &g.sample(|_, _| 2.0), 2) < 1e-10);
    }

    #[test]
    fn constant_has_zero_interior_derivatives() {
        let g = PhaseSpaceGrid::square(3.0, 32).unwrap();
        let f = g.sample(|_, _| 4.2);
        for axis in [Axis::X, Axis::K] {
            for order in 1..=MAX_DERIVATIVE_ORDER {
                let d = partial_derivative(&g, &f, axis, order).unwrap();
                let m = stencil_half_width(order);
                assert!(max_interior_error(&g, &d, &g.zeros(), m) < 1e-9 * 10f64.powi(order as i32));
            }
        }
    }

    #[test]
    fn higher_orders_exact_on_matching_polynomials() {
        let g = PhaseSpaceGrid::square(1.0, 41).unwrap();
        let f = g.sample(|_, k| k.powi(4));
        let d4 = partial_derivative(&g, &f, Axis::K, 4).unwrap();
        assert!(max_interior_error(&g, &d4, &g.sample(|_, _| 24.0), 3) < 1e-6);
        let d3 = partial_derivative(&g, &f, Axis::K, 3).unwrap();
        assert!(max_interior_error(&g, &d3, &g.sample(|_, k| 24.0 * k), 3) < 1e-7);
    }

    #[test]
    fn second_derivative_of_sine_converges_fourth_order() {
        let err = |n: usize| {
            let g = PhaseSpaceGrid::new(std::f64::consts::PI, 1.0, n, 16).unwrap();
            let f = g.sample(|x, _| x.sin());
            let d = partial_derivative(&g, &f, Axis::X, 2).unwrap();
            max_interior_error(&g, &d, &g.sample(|x, _| -x.sin()), 2)
        };
        let (e1, e2) = (err(33), err(65));
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 0.25 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn polygon_region_covers_disk_area() {
        let g = PhaseSpaceGrid::square(4.0, 128).unwrap();
        let poly: Vec<(f64, f64)> = (0..2000)
            .map(|i| {
                let t = i as f64 / 2000.0 * std::f64::consts::TAU;
                (2.0 * t.cos(), 2.0 * t.sin())
            })
            .collect();
        let r = Region::from_polygon(&g, &poly, 16).unwrap();
        let area = r.area(&g);
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-3, "area {area}");
        assert!(polygon_contains(&poly, 0.1, -0.3));
        assert!(!polygon_contains(&poly, 2.1, 0.0));
    }

    #[test]
    fn dimensionless_map_identity_and_roundtrip() {
        let u = DimensionlessMap::unit();
        assert_eq!(u.x_from_q(1.3), 1.3);
        assert_eq!(u.k_from_p(-0.4), -0.4);
        assert_eq!(u.tau_from_t(2.0), 2.0);
        let m = DimensionlessMap::new(2.0, 3.0, 0.5).unwrap();
        assert!((m.q_from_x(m.x_from_q(0.7)) - 0.7).abs() < 1e-15);
        assert!((m.p_from_k(m.k_from_p(0.7)) - 0.7).abs() < 1e-15);
        assert!((m.x_from_q(1.0) - (12.0f64).sqrt()).abs() < 1e-14);
        assert!(DimensionlessMap::new(1.0, -1.0, 1.0).is_err());
    }
}
