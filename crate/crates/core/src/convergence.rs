//! Grid refinement studies behind the finite-difference tolerances.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field2d::{hessian_fd, lift_radial, radial_hessian, Grid2D, DEFAULT_MARGIN};
use crate::identities::{classify, Status};
use crate::radial::{
    det_hessian_radial, det_hessian_radial_product_form, energy, RadialGrid, RadialProfile,
};
use crate::stationarity::Verdict;

/// Reference energies use this many times the finest radial grid.
pub const REFERENCE_FACTOR: usize = 16;
/// Nodes dropped at each end of the radial grid when comparing finite
/// difference determinants: there one-sided stencils are differenced twice
/// and only converge at first order.
pub const BOUNDARY_NODES: usize = 2;

#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    /// Coarsest radial grid `J`.
    pub cells: usize,
    /// Coarsest lattice, nodes per unit length.
    pub per_unit: usize,
    pub levels: usize,
    pub margin: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            cells: 512,
            per_unit: 64,
            levels: 3,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// `J` or nodes per unit length at each level.
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    pub orders: Vec<Option<f64>>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub profile: String,
    pub checks: Vec<CheckOutcome>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn interior_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let r = BOUNDARY_NODES..a.len() - BOUNDARY_NODES;
    a[r.clone()]
        .iter()
        .zip(&b[r])
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `v` resampled on `grid`, so derivatives come from finite differences.
fn sampled_copy(v: &RadialProfile, grid: &RadialGrid) -> Result<RadialProfile> {
    let values = grid.points().iter().map(|&t| v.jet(t)[0]).collect();
    RadialProfile::sampled(format!("{} (sampled)", v.name()), grid.clone(), values)
}

fn outcome(
    name: &'static str,
    resolutions: Vec<usize>,
    errors: Vec<f64>,
    scale: f64,
) -> CheckOutcome {
    let bounds = vec![f64::INFINITY; errors.len()];
    let (orders, status) = classify(&errors, &bounds, scale);
    CheckOutcome {
        name,
        resolutions,
        errors,
        orders,
        status,
    }
}

/// Runs the radial and lattice refinement checks on `v`.
///
/// * `det-fd`: `det ∇²V` from finite-difference derivatives of samples
///   against the closed form, away from the ends of the grid.
/// * `det-product-fd`: the same through the product form `((v′)²)′ / 2t`.
/// * `energy-quadrature`: midpoint energy against a much finer grid.
/// * `hessian-2d`: lattice Hessian of the lifted profile against the
///   closed-form radial Hessian.
pub fn run_convergence(v: &RadialProfile, cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    if cfg.levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "{} resolution level(s); an order needs at least 2",
            cfg.levels
        )));
    }
    let cells: Vec<usize> = (0..cfg.levels).map(|l| cfg.cells << l).collect();
    let mut det = Vec::new();
    let mut product = Vec::new();
    let mut quad = Vec::new();
    let mut det_scale = 0.0f64;
    let fine = RadialGrid::midpoint(cells[cfg.levels - 1] * REFERENCE_FACTOR)?;
    let e_ref = energy(v, &fine)?;
    for &j in &cells {
        let grid = RadialGrid::midpoint(j)?;
        let exact = det_hessian_radial(v, &grid)?;
        let s = sampled_copy(v, &grid)?;
        det_scale = det_scale.max(exact.max_abs());
        det.push(interior_max_diff(
            det_hessian_radial(&s, &grid)?.values(),
            exact.values(),
        ));
        product.push(interior_max_diff(
            det_hessian_radial_product_form(&s, &grid)?.values(),
            exact.values(),
        ));
        quad.push((energy(v, &grid)? - e_ref).abs());
    }
    let per_unit: Vec<usize> = (0..cfg.levels).map(|l| cfg.per_unit << l).collect();
    let mut hess = Vec::new();
    let mut hess_scale = 0.0f64;
    for &k in &per_unit {
        let grid = Grid2D::disk(k, cfg.margin)?;
        let fd = hessian_fd(&lift_radial(v, &grid)?)?;
        let exact = radial_hessian(v, fd.grid());
        hess_scale = hess_scale.max(
            exact
                .values()
                .iter()
                .fold(0.0, |m, s| m.max(s.norm_sq().sqrt())),
        );
        hess.push(fd.max_diff(&exact)?);
    }
    let checks = vec![
        outcome("det-fd", cells.clone(), det, det_scale),
        outcome("det-product-fd", cells.clone(), product, det_scale),
        outcome("energy-quadrature", cells, quad, e_ref.abs()),
        outcome("hessian-2d", per_unit, hess, hess_scale),
    ];
    let verdict = if checks.iter().all(|c| c.status != Status::Fail) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ConvergenceReport {
        profile: v.name().to_string(),
        checks,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let r =
            run_convergence(&RadialProfile::constant(1.5), &ConvergenceConfig::default()).unwrap();
        for c in &r.checks {
            assert!(c.errors.iter().all(|&e| e == 0.0), "{}", c.name);
            assert_eq!(c.status, Status::Exact);
        }
    }

    #[test]
    fn single_level_rejected() {
        let cfg = ConvergenceConfig {
            levels: 1,
            ..ConvergenceConfig::default()
        };
        assert!(matches!(
            run_convergence(&RadialProfile::paraboloid(), &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }
}
