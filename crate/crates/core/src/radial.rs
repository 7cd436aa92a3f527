//! Radial profiles `v` with `V(x) = v(|x|)` and the closed-form radial
//! operators: Hessian determinant, cofactor and Frobenius pairings, energy
//! density and disk integrals.
//!
//! For a radial `V` the Hessian at `x ≠ 0` has the radial eigenvalue `v″(t)`
//! and the tangential eigenvalue `v′(t)/t`, `t = |x|`. Every operator here is
//! built from those two numbers:
//!
//! | quantity               | formula                          |
//! |------------------------|----------------------------------|
//! | `det ∇²V`              | `v″ v′ / t`                      |
//! | `cof ∇²V : ∇²f`        | `v″ f′ / t + f″ v′ / t`          |
//! | `∇²V : ∇²f`            | `v″ f″ + v′ f′ / t²`             |
//! | `|∇²V|²`               | `(v″)² + (v′ / t)²`              |
//!
//! Quadrature grids are cell-centred, so `t = 0` is never evaluated.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// `[v(t), v′(t), v″(t)]`.
pub type Jet = [f64; 3];

/// Default number of radial cells.
pub const DEFAULT_CELLS: usize = 4096;

/// Tolerance for the `v′(0+) = 0` membership test.
pub const TOL_ORIGIN: f64 = 1e-6;

/// Quadrature grid on `(0, 1)`: strictly increasing nodes with weights that
/// sum to one. Uniform grids use the midpoint rule.
#[derive(Clone)]
pub struct RadialGrid {
    points: Arc<[f64]>,
    weights: Arc<[f64]>,
    cells: Option<usize>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("len", &self.points.len())
            .field("cells", &self.cells)
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points == other.points
    }
}

impl RadialGrid {
    /// Cell-centred grid `t_j = (j + 1/2)/J`, `j = 0..J`.
    pub fn midpoint(cells: usize) -> Result<Self> {
        if cells < 4 {
            return Err(Error::InvalidArgument(format!(
                "radial grid needs at least 4 cells, got {cells}"
            )));
        }
        let h = 1.0 / cells as f64;
        let points: Vec<f64> = (0..cells).map(|j| (j as f64 + 0.5) * h).collect();
        let weights = vec![h; cells];
        Ok(Self {
            points: points.into(),
            weights: weights.into(),
            cells: Some(cells),
        })
    }

    /// Arbitrary strictly increasing nodes in `(0, 1)`. Each node carries the
    /// width of its Voronoi cell in `[0, 1]` as weight, which reduces to the
    /// midpoint rule on cell-centred nodes.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty radial grid".into()));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "radial grid not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if !(points[0] > 0.0) || !(points[points.len() - 1] < 1.0) {
            return Err(Error::InvalidArgument(
                "radial grid points must lie in (0, 1)".into(),
            ));
        }
        let n = points.len();
        let mut weights = Vec::with_capacity(n);
        for j in 0..n {
            let lo = if j == 0 {
                0.0
            } else {
                0.5 * (points[j - 1] + points[j])
            };
            let hi = if j + 1 == n {
                1.0
            } else {
                0.5 * (points[j] + points[j + 1])
            };
            weights.push(hi - lo);
        }
        Ok(Self {
            points: points.into(),
            weights: weights.into(),
            cells: None,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of cells when the grid is uniform and cell-centred.
    pub fn cells(&self) -> Option<usize> {
        self.cells
    }

    /// Largest cell width.
    pub fn spacing(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }
}

/// Scalar function of the radius sampled on a [`RadialGrid`].
#[derive(Clone, Debug)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise map onto a new field on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &RadialField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "radial fields on different grids".into(),
            ));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(j) => Err(Error::NonFiniteValue {
                what,
                at: self.grid.points[j],
            }),
            None => Ok(()),
        }
    }
}

/// Whether a profile is given by closed-form evaluators or by samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Analytic,
    Sampled,
}

type Evaluator = dyn Fn(f64) -> Jet + Send + Sync;

#[derive(Clone)]
enum Repr {
    Analytic(Arc<Evaluator>),
    Sampled(Arc<SampledData>),
}

struct SampledData {
    grid: RadialGrid,
    v: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// A radial profile `v` on `[0, 1)` together with `v′` and `v″`.
#[derive(Clone)]
pub struct RadialProfile {
    name: String,
    repr: Repr,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("name", &self.name)
            .field("kind", &self.kind())
            .finish()
    }
}

/// Samples `v, v′, v″` of a profile on a grid.
#[derive(Clone, Debug)]
pub struct Samples {
    pub v: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl RadialProfile {
    /// Closed-form profile; `jet(t)` returns `[v, v′, v″]`.
    pub fn analytic(
        name: impl Into<String>,
        jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            repr: Repr::Analytic(Arc::new(jet)),
        }
    }

    /// Profile known only through samples `v_j` at the nodes of `grid`.
    /// Derivatives come from second-order finite differences.
    pub fn sampled(name: impl Into<String>, grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if grid.len() < 4 {
            return Err(Error::InvalidProfile(
                "sampled profile needs at least 4 points".into(),
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                what: "profile sample",
                at: grid.points()[j],
            });
        }
        let (d1, d2) = fd_derivatives(grid.points(), &values);
        Ok(Self {
            name: name.into(),
            repr: Repr::Sampled(Arc::new(SampledData {
                grid,
                v: values,
                d1,
                d2,
            })),
        })
    }

    /// `v(t) = t²/2`, the paraboloid `V(x) = |x|²/2` with `∇²V = I`.
    pub fn paraboloid() -> Self {
        Self::analytic("paraboloid", |t| [0.5 * t * t, t, 1.0])
    }

    /// `v(t) = t⁴/4`.
    pub fn quartic() -> Self {
        Self::analytic("quartic", |t| {
            let t2 = t * t;
            [0.25 * t2 * t2, t2 * t, 3.0 * t2]
        })
    }

    /// `v ≡ c`.
    pub fn constant(c: f64) -> Self {
        Self::analytic("constant", move |_| [c, 0.0, 0.0])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> ProfileKind {
        match self.repr {
            Repr::Analytic(_) => ProfileKind::Analytic,
            Repr::Sampled(_) => ProfileKind::Sampled,
        }
    }

    /// The sample grid of a sampled profile.
    pub fn native_grid(&self) -> Option<&RadialGrid> {
        match &self.repr {
            Repr::Analytic(_) => None,
            Repr::Sampled(d) => Some(&d.grid),
        }
    }

    /// `[v, v′, v″]` at an arbitrary radius. Sampled profiles use cubic
    /// Hermite interpolation of `(v, v′)` and `(v′, v″)`.
    pub fn jet(&self, t: f64) -> Jet {
        match &self.repr {
            Repr::Analytic(f) => f(t),
            Repr::Sampled(d) => d.jet(t),
        }
    }

    /// Samples on `grid`. Sampled profiles only accept their own grid.
    pub fn sample(&self, grid: &RadialGrid) -> Result<Samples> {
        match &self.repr {
            Repr::Analytic(f) => {
                let n = grid.len();
                let mut s = Samples {
                    v: Vec::with_capacity(n),
                    d1: Vec::with_capacity(n),
                    d2: Vec::with_capacity(n),
                };
                for &t in grid.points() {
                    let [a, b, c] = f(t);
                    s.v.push(a);
                    s.d1.push(b);
                    s.d2.push(c);
                }
                Ok(s)
            }
            Repr::Sampled(d) => {
                if &d.grid != grid {
                    return Err(Error::GridMismatch(format!(
                        "sampled profile '{}' evaluated off its sample grid",
                        self.name
                    )));
                }
                Ok(Samples {
                    v: d.v.clone(),
                    d1: d.d1.clone(),
                    d2: d.d2.clone(),
                })
            }
        }
    }

    /// `a · self`.
    pub fn scaled(&self, a: f64) -> Self {
        self.combine(a, None, 0.0, format!("{a}*{}", self.name))
    }

    /// `a · self + b · other`.
    pub fn linear_combination(&self, a: f64, other: &RadialProfile, b: f64) -> Result<Self> {
        if let (Some(g1), Some(g2)) = (self.native_grid(), other.native_grid()) {
            if g1 != g2 {
                return Err(Error::GridMismatch(
                    "linear combination of sampled profiles on different grids".into(),
                ));
            }
        }
        let name = format!("{a}*{}+{b}*{}", self.name, other.name);
        Ok(self.combine(a, Some(other), b, name))
    }

    fn combine(&self, a: f64, other: Option<&RadialProfile>, b: f64, name: String) -> Self {
        match (&self.repr, other.map(|o| &o.repr)) {
            (Repr::Sampled(d), None) => Self {
                name,
                repr: Repr::Sampled(Arc::new(d.scaled(a))),
            },
            (Repr::Sampled(d), Some(Repr::Sampled(e))) => Self {
                name,
                repr: Repr::Sampled(Arc::new(d.combined(a, e, b))),
            },
            _ => {
                let p = self.clone();
                let q = other.cloned();
                Self::analytic(name, move |t| {
                    let u = p.jet(t);
                    match &q {
                        Some(q) => {
                            let w = q.jet(t);
                            [
                                a * u[0] + b * w[0],
                                a * u[1] + b * w[1],
                                a * u[2] + b * w[2],
                            ]
                        }
                        None => [a * u[0], a * u[1], a * u[2]],
                    }
                })
            }
        }
    }

    /// Checks the membership invariants: `v′(0+) = 0` within
    /// `tol_origin · (1 + sup|v″|)` and finite energy on `grid`.
    pub fn validate(&self, grid: &RadialGrid, tol_origin: f64) -> Result<()> {
        let samples = self.sample(grid)?;
        let sup2 = samples.d2.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let slope0 = match &self.repr {
            Repr::Analytic(f) => f(0.0)[1],
            Repr::Sampled(_) => samples.d1[0],
        };
        if !(slope0.abs() <= tol_origin * (1.0 + sup2)) {
            return Err(Error::InvalidProfile(format!(
                "'{}': |v'(0+)| = {:.3e} exceeds {:.1e}·(1 + sup|v''|)",
                self.name,
                slope0.abs(),
                tol_origin
            )));
        }
        let e = energy(self, grid)?;
        if !e.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "'{}' has infinite energy",
                self.name
            )));
        }
        Ok(())
    }
}

impl SampledData {
    fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            v: self.v.iter().map(|x| a * x).collect(),
            d1: self.d1.iter().map(|x| a * x).collect(),
            d2: self.d2.iter().map(|x| a * x).collect(),
        }
    }

    fn combined(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(p, q)| a * p + b * q).collect()
        };
        Self {
            grid: self.grid.clone(),
            v: mix(&self.v, &other.v),
            d1: mix(&self.d1, &other.d1),
            d2: mix(&self.d2, &other.d2),
        }
    }

    fn jet(&self, t: f64) -> Jet {
        let p = self.grid.points();
        let n = p.len();
        let i = match p.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return [self.v[i], self.d1[i], self.d2[i]],
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let (t0, t1) = (p[i], p[i + 1]);
        let dt = t1 - t0;
        let u = (t - t0) / dt;
        let hermite = |y0: f64, y1: f64, m0: f64, m1: f64| -> (f64, f64) {
            let u2 = u * u;
            let u3 = u2 * u;
            let val = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
                + (u3 - 2.0 * u2 + u) * dt * m0
                + (-2.0 * u3 + 3.0 * u2) * y1
                + (u3 - u2) * dt * m1;
            let der = ((6.0 * u2 - 6.0 * u) * y0
                + (3.0 * u2 - 4.0 * u + 1.0) * dt * m0
                + (-6.0 * u2 + 6.0 * u) * y1
                + (3.0 * u2 - 2.0 * u) * dt * m1)
                / dt;
            (val, der)
        };
        let (v, _) = hermite(self.v[i], self.v[i + 1], self.d1[i], self.d1[i + 1]);
        let (d1, _) = hermite(self.d1[i], self.d1[i + 1], self.d2[i], self.d2[i + 1]);
        let d2 = self.d2[i] + u * (self.d2[i + 1] - self.d2[i]);
        [v, d1, d2]
    }
}

/// Finite-difference weights for the derivatives of order `0..=m` at `z`
/// from values at `xs` (Fornberg's recursion). Returns `w[k][j]`.
pub(crate) fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Second-order finite differences on a (possibly non-uniform) grid:
/// three-point central stencils inside, one-sided three-point (first
/// derivative) and four-point (second derivative) stencils at the ends.
pub fn fd_derivatives(t: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = t.len();
    assert!(n >= 4 && v.len() == n);
    let apply = |w: &[f64], idx: std::ops::Range<usize>| -> f64 {
        w.iter().zip(&v[idx]).map(|(a, b)| a * b).sum()
    };
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..n {
        if j == 0 || j + 1 == n {
            let r3 = if j == 0 { 0..3 } else { n - 3..n };
            let r4 = if j == 0 { 0..4 } else { n - 4..n };
            let w3 = fornberg_weights(t[j], &t[r3.clone()], 1);
            let w4 = fornberg_weights(t[j], &t[r4.clone()], 2);
            d1[j] = apply(&w3[1], r3);
            d2[j] = apply(&w4[2], r4);
        } else {
            let r = j - 1..j + 2;
            let w = fornberg_weights(t[j], &t[r.clone()], 2);
            d1[j] = apply(&w[1], r.clone());
            d2[j] = apply(&w[2], r);
        }
    }
    (d1, d2)
}

/// `det ∇²V` at radius `t` from a jet.
#[inline]
pub fn det_hessian_at(v: Jet, t: f64) -> f64 {
    v[2] * v[1] / t
}

/// `cof ∇²V : ∇²f` at radius `t`.
#[inline]
pub fn cof_pairing_at(v: Jet, f: Jet, t: f64) -> f64 {
    v[2] * f[1] / t + f[2] * v[1] / t
}

/// `∇²V : ∇²f` at radius `t`.
#[inline]
pub fn frobenius_pairing_at(v: Jet, f: Jet, t: f64) -> f64 {
    v[2] * f[2] + v[1] * f[1] / (t * t)
}

/// `|∇²V|²` at radius `t`.
#[inline]
pub fn energy_density_at(v: Jet, t: f64) -> f64 {
    let tangential = v[1] / t;
    v[2] * v[2] + tangential * tangential
}

fn field_from(
    grid: &RadialGrid,
    what: &'static str,
    f: impl Fn(usize, f64) -> f64,
) -> Result<RadialField> {
    let values = grid
        .points()
        .iter()
        .enumerate()
        .map(|(j, &t)| f(j, t))
        .collect();
    let out = RadialField {
        grid: grid.clone(),
        values,
    };
    out.check_finite(what)?;
    Ok(out)
}

/// `k(t) = v″(t) v′(t) / t` on `grid`.
pub fn det_hessian_radial(v: &RadialProfile, grid: &RadialGrid) -> Result<RadialField> {
    let s = v.sample(grid)?;
    field_from(grid, "det_hessian_radial", |j, t| {
        det_hessian_at([s.v[j], s.d1[j], s.d2[j]], t)
    })
}

/// `k(t) = (2t)⁻¹ d/dt[(v′)²]`. Analytic profiles differentiate `(v′)²` by
/// the product rule; sampled ones difference the samples of `(v′)²`.
pub fn det_hessian_radial_product_form(
    v: &RadialProfile,
    grid: &RadialGrid,
) -> Result<RadialField> {
    let s = v.sample(grid)?;
    let slope_sq: Vec<f64> = s.d1.iter().map(|d| d * d).collect();
    let derivative = match v.kind() {
        ProfileKind::Analytic => s.d1.iter().zip(&s.d2).map(|(a, b)| 2.0 * a * b).collect(),
        ProfileKind::Sampled => fd_derivatives(grid.points(), &slope_sq).0,
    };
    field_from(grid, "det_hessian_radial_product_form", |j, t| {
        derivative[j] / (2.0 * t)
    })
}

/// `cof ∇²V : ∇²f = v″ f′ / t + f″ v′ / t` on `grid`.
pub fn cof_pairing_radial(
    v: &RadialProfile,
    f: &RadialProfile,
    grid: &RadialGrid,
) -> Result<RadialField> {
    let (a, b) = (v.sample(grid)?, f.sample(grid)?);
    field_from(grid, "cof_pairing_radial", |j, t| {
        cof_pairing_at([a.v[j], a.d1[j], a.d2[j]], [b.v[j], b.d1[j], b.d2[j]], t)
    })
}

/// `(v′ f′)′ / t`: the cofactor pairing computed by differentiating the
/// product `v′ f′` instead of expanding it.
pub fn cof_pairing_radial_product_form(
    v: &RadialProfile,
    f: &RadialProfile,
    grid: &RadialGrid,
) -> Result<RadialField> {
    let (a, b) = (v.sample(grid)?, f.sample(grid)?);
    let derivative: Vec<f64> =
        if v.kind() == ProfileKind::Analytic && f.kind() == ProfileKind::Analytic {
            (0..grid.len())
                .map(|j| a.d2[j] * b.d1[j] + a.d1[j] * b.d2[j])
                .collect()
        } else {
            let product: Vec<f64> = a.d1.iter().zip(&b.d1).map(|(x, y)| x * y).collect();
            fd_derivatives(grid.points(), &product).0
        };
    field_from(grid, "cof_pairing_radial_product_form", |j, t| {
        derivative[j] / t
    })
}

/// `∇²V : ∇²f = v″ f″ + v′ f′ / t²` on `grid`.
pub fn frobenius_pairing_radial(
    v: &RadialProfile,
    f: &RadialProfile,
    grid: &RadialGrid,
) -> Result<RadialField> {
    let (a, b) = (v.sample(grid)?, f.sample(grid)?);
    field_from(grid, "frobenius_pairing_radial", |j, t| {
        frobenius_pairing_at([a.v[j], a.d1[j], a.d2[j]], [b.v[j], b.d1[j], b.d2[j]], t)
    })
}

/// `|∇²V|² = (v″)² + (v′/t)²` on `grid`.
pub fn energy_density_radial(v: &RadialProfile, grid: &RadialGrid) -> Result<RadialField> {
    let s = v.sample(grid)?;
    field_from(grid, "energy_density_radial", |j, t| {
        energy_density_at([s.v[j], s.d1[j], s.d2[j]], t)
    })
}

/// `∫_B g(|x|) dx = 2π ∫₀¹ g(t) t dt` by the grid's quadrature rule.
pub fn disk_integral(g: &RadialField) -> Result<f64> {
    g.check_finite("disk_integral")?;
    let grid = g.grid();
    let sum: f64 = g
        .values()
        .iter()
        .zip(grid.points())
        .zip(grid.weights())
        .map(|((v, t), w)| v * t * w)
        .sum();
    Ok(2.0 * std::f64::consts::PI * sum)
}

/// `‖g‖_{L²(B)}` for a radial integrand.
pub fn disk_l2_norm(g: &RadialField) -> Result<f64> {
    Ok(disk_integral(&g.map(|v| v * v))?.max(0.0).sqrt())
}

/// `∫_B |∇²V|²`.
pub fn energy(v: &RadialProfile, grid: &RadialGrid) -> Result<f64> {
    disk_integral(&energy_density_radial(v, grid)?)
}

/// Writes `t,v,v1,v2` rows for `profile` on `grid` with 17 significant
/// digits.
pub fn write_profile_csv<W: Write>(
    profile: &RadialProfile,
    grid: &RadialGrid,
    out: W,
) -> Result<()> {
    let s = profile.sample(grid)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "v", "v1", "v2"])?;
    for (j, t) in grid.points().iter().enumerate() {
        w.write_record([
            format!("{t:.16e}"),
            format!("{:.16e}", s.v[j]),
            format!("{:.16e}", s.d1[j]),
            format!("{:.16e}", s.d2[j]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,v,v1,v2` table into a sampled profile. The derivative columns
/// must parse but are recomputed from `v` by finite differences.
pub fn read_profile_csv<R: Read>(name: impl Into<String>, input: R) -> Result<RadialProfile> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let expected = ["t", "v", "v1", "v2"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Parse(format!(
            "expected header t,v,v1,v2, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut nums = [0.0; 4];
        for (k, field) in rec.iter().enumerate().take(4) {
            nums[k] = field.trim().parse().map_err(|e| {
                Error::Parse(format!("row {}: column {}: {e}", line + 2, expected[k]))
            })?;
        }
        t.push(nums[0]);
        v.push(nums[1]);
    }
    let grid = RadialGrid::from_points(t)?;
    RadialProfile::sampled(name, grid, v)
}
