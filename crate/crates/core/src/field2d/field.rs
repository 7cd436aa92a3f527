use std::f64::consts::TAU;

use super::grid::{Grid2D, Rect, MIN_NODES_ACROSS};
use crate::error::{Error, Result};
use crate::radial::RadialProfile;

/// Symmetric 2×2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };
    pub const IDENTITY: Sym2 = Sym2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    /// `cof [[a, b], [b, c]] = [[c, -b], [-b, a]]`.
    #[inline]
    pub fn cof(&self) -> Sym2 {
        Sym2::new(self.yy, -self.xy, self.xx)
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Frobenius product `A : B`.
    #[inline]
    pub fn frob(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.frob(self)
    }

    /// `Rᵀ A R` with `R = [[c, -s], [s, c]]`.
    #[inline]
    pub fn conjugate(&self, c: f64, s: f64) -> Sym2 {
        let (a, b, d) = (self.xx, self.xy, self.yy);
        let (cc, ss, cs) = (c * c, s * s, c * s);
        Sym2 {
            xx: a * cc + 2.0 * b * cs + d * ss,
            xy: (d - a) * cs + b * (cc - ss),
            yy: a * ss - 2.0 * b * cs + d * cc,
        }
    }

    #[inline]
    pub fn sub(&self, o: &Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Sym2 {
        Sym2::new(a * self.xx, a * self.xy, a * self.yy)
    }
}

/// Rotation angle in radians, reduced to `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub fn new(phi: f64) -> Self {
        let r = phi.rem_euclid(TAU);
        Self(if r >= TAU { 0.0 } else { r })
    }

    pub fn radians(&self) -> f64 {
        self.0
    }
}

/// Scalar field on the valid nodes of a [`Grid2D`].
#[derive(Clone, Debug)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
    support: Option<Rect>,
}

impl ScalarField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            support: None,
        })
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            support: None,
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .map(|(_, i, j)| {
                let (x, y) = grid.coords(i, j);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            support: None,
        }
    }

    /// Field that is exactly zero outside `support`; `f` is only called
    /// inside it. The rectangle is remembered and lets angular averaging
    /// skip samples that cannot contribute.
    pub fn from_fn_supported(grid: &Grid2D, support: Rect, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .map(|(_, i, j)| {
                let (x, y) = grid.coords(i, j);
                if support.contains(x, y) {
                    f(x, y)
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            support: Some(support),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rectangle outside which the field is known to vanish.
    pub fn support(&self) -> Option<Rect> {
        self.support
    }

    pub(crate) fn with_support(mut self, support: Option<Rect>) -> Self {
        self.support = support;
        self
    }

    pub fn value_at(&self, i: i64, j: i64) -> Option<f64> {
        self.grid.index(i, j).map(|k| self.values[k])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            support: None,
        }
    }

    /// `a · self + b · other` on the common valid nodes.
    pub fn linear_combination(&self, a: f64, other: &ScalarField2D, b: f64) -> Result<Self> {
        let support = match (self.support, other.support) {
            (Some(p), Some(q)) => Some(p.union(&q)),
            _ => None,
        };
        Ok(zip_scalar(self, other, |x, y| a * x + b * y)?.with_support(support))
    }

    /// `sup |self - other|` over the common valid nodes.
    pub fn max_abs_diff(&self, other: &ScalarField2D) -> Result<f64> {
        Ok(zip_scalar(self, other, |x, y| x - y)?.max_abs())
    }

    /// Restriction to a sub-band of the same lattice.
    pub fn restrict(&self, grid: &Grid2D) -> Result<Self> {
        if grid == &self.grid {
            return Ok(self.clone());
        }
        let values = gather(&self.grid, grid, &self.values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            support: self.support,
        })
    }
}

/// Field of symmetric 2×2 matrices on a [`Grid2D`].
#[derive(Clone, Debug)]
pub struct SymMatrixField2D {
    grid: Grid2D,
    values: Vec<Sym2>,
    support: Option<Rect>,
}

impl SymMatrixField2D {
    pub fn new(grid: Grid2D, values: Vec<Sym2>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} matrices for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            support: None,
        })
    }

    pub fn constant(grid: &Grid2D, m: Sym2) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![m; grid.len()],
            support: None,
        }
    }

    pub fn from_fn(grid: &Grid2D, f: impl Fn(f64, f64) -> Sym2) -> Self {
        let values = grid
            .nodes()
            .map(|(_, i, j)| {
                let (x, y) = grid.coords(i, j);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            support: None,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn support(&self) -> Option<Rect> {
        self.support
    }

    pub(crate) fn with_support(mut self, support: Option<Rect>) -> Self {
        self.support = support;
        self
    }

    pub fn values(&self) -> &[Sym2] {
        &self.values
    }

    pub fn value_at(&self, i: i64, j: i64) -> Option<Sym2> {
        self.grid.index(i, j).map(|k| self.values[k])
    }

    /// `sup ‖self - other‖_F` over the common valid nodes.
    pub fn max_diff(&self, other: &SymMatrixField2D) -> Result<f64> {
        let (grid, a, b) = common(&self.grid, &other.grid)?;
        let mut m = 0.0f64;
        for (k, _, _) in grid.nodes() {
            let d = self.values[a(k)].sub(&other.values[b(k)]);
            m = m.max(d.norm_sq().sqrt());
        }
        Ok(m)
    }

    pub fn restrict(&self, grid: &Grid2D) -> Result<Self> {
        if grid == &self.grid {
            return Ok(self.clone());
        }
        let values = gather(&self.grid, grid, &self.values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            support: self.support,
        })
    }
}

fn gather<T: Copy>(from: &Grid2D, to: &Grid2D, values: &[T]) -> Result<Vec<T>> {
    if !from.same_lattice(to) {
        return Err(Error::GridMismatch("different lattices".into()));
    }
    to.nodes()
        .map(|(_, i, j)| {
            from.index(i, j)
                .map(|k| values[k])
                .ok_or_else(|| Error::GridMismatch(format!("node ({i}, {j}) missing")))
        })
        .collect()
}

type IndexMap = Box<dyn Fn(usize) -> usize>;

/// Common valid nodes of two grids on the same lattice, with index maps
/// from the common grid into each operand.
fn common(a: &Grid2D, b: &Grid2D) -> Result<(Grid2D, IndexMap, IndexMap)> {
    if !a.same_lattice(b) {
        return Err(Error::GridMismatch(format!(
            "lattice spacing 1/{} vs 1/{}",
            a.per_unit(),
            b.per_unit()
        )));
    }
    if a == b {
        return Ok((a.clone(), Box::new(|k| k), Box::new(|k| k)));
    }
    let grid = a.with_band(a.band().intersect(&b.band()))?;
    let map_for = |src: &Grid2D| -> IndexMap {
        let table: Vec<usize> = grid
            .nodes()
            .map(|(_, i, j)| {
                src.index(i, j)
                    .expect("intersection node exists in operand")
            })
            .collect();
        Box::new(move |k| table[k])
    };
    let (ma, mb) = (map_for(a), map_for(b));
    Ok((grid, ma, mb))
}

fn zip_scalar(
    a: &ScalarField2D,
    b: &ScalarField2D,
    f: impl Fn(f64, f64) -> f64,
) -> Result<ScalarField2D> {
    let (grid, ia, ib) = common(&a.grid, &b.grid)?;
    let values = (0..grid.len())
        .map(|k| f(a.values[ia(k)], b.values[ib(k)]))
        .collect();
    ScalarField2D::new(grid, values)
}

/// Support of a product: it vanishes wherever either factor does.
fn meet(a: Option<Rect>, b: Option<Rect>) -> Option<Rect> {
    match (a, b) {
        (Some(p), Some(q)) => Some(p.intersect(&q)),
        (p, q) => p.or(q),
    }
}

/// `V(x) = v(|x|)` on the valid nodes.
pub fn lift_radial(v: &RadialProfile, grid: &Grid2D) -> Result<ScalarField2D> {
    if grid.nodes_across() < MIN_NODES_ACROSS {
        return Err(Error::ResolutionTooCoarse {
            nodes: grid.nodes_across(),
            required: MIN_NODES_ACROSS,
        });
    }
    let out = ScalarField2D::from_fn(grid, |x, y| v.jet(x.hypot(y))[0]);
    if let Some(k) = out.values.iter().position(|x| !x.is_finite()) {
        let (_, i, j) = grid.nodes().nth(k).expect("index in range");
        let (x, y) = grid.coords(i, j);
        return Err(Error::NonFiniteValue {
            what: "lift_radial",
            at: x.hypot(y),
        });
    }
    Ok(out)
}

/// Closed-form Hessian of a radial profile,
/// `v″ x̂x̂ᵀ + (v′/t)(I - x̂x̂ᵀ)`, on the valid nodes away from the origin.
pub fn radial_hessian(v: &RadialProfile, grid: &Grid2D) -> SymMatrixField2D {
    SymMatrixField2D::from_fn(grid, |x, y| {
        let t = x.hypot(y);
        let [_, d1, d2] = v.jet(t);
        if t == 0.0 {
            return Sym2::new(d2, 0.0, d2);
        }
        let (c, s) = (x / t, y / t);
        let tang = d1 / t;
        Sym2::new(
            d2 * c * c + tang * s * s,
            (d2 - tang) * c * s,
            d2 * s * s + tang * c * c,
        )
    })
}

/// Pointwise Frobenius product `A : B`.
pub fn pairing_2d(a: &SymMatrixField2D, b: &SymMatrixField2D) -> Result<ScalarField2D> {
    let (grid, ia, ib) = common(&a.grid, &b.grid)?;
    let values = (0..grid.len())
        .map(|k| a.values[ia(k)].frob(&b.values[ib(k)]))
        .collect();
    Ok(ScalarField2D::new(grid, values)?.with_support(meet(a.support, b.support)))
}

/// Pointwise cofactor.
pub fn cof_2d(a: &SymMatrixField2D) -> SymMatrixField2D {
    SymMatrixField2D {
        grid: a.grid.clone(),
        values: a.values.iter().map(Sym2::cof).collect(),
        support: a.support,
    }
}

/// Pointwise determinant.
pub fn det_2d(a: &SymMatrixField2D) -> ScalarField2D {
    ScalarField2D {
        grid: a.grid.clone(),
        values: a.values.iter().map(Sym2::det).collect(),
        support: None,
    }
}

/// Pointwise `|A|²`.
pub fn norm_sq_2d(a: &SymMatrixField2D) -> ScalarField2D {
    ScalarField2D {
        grid: a.grid.clone(),
        values: a.values.iter().map(Sym2::norm_sq).collect(),
        support: None,
    }
}

/// Node-sum quadrature `Σ g h²` together with the area the nodes cover.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral2D {
    pub value: f64,
    pub covered_area: f64,
}

impl Integral2D {
    /// Covered area as a fraction of the unit disk.
    pub fn covered_fraction(&self) -> f64 {
        self.covered_area / std::f64::consts::PI
    }
}

pub fn integral_2d(g: &ScalarField2D) -> Integral2D {
    let h = g.grid.spacing();
    Integral2D {
        value: g.values.iter().sum::<f64>() * h * h,
        covered_area: g.grid.covered_area(),
    }
}

/// `(Σ g² h²)^{1/2}`.
pub fn l2_norm_2d(g: &ScalarField2D) -> f64 {
    let h = g.grid.spacing();
    (g.values.iter().map(|v| v * v).sum::<f64>() * h * h).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field2d::grid::Band;
    use crate::radial::{disk_integral, RadialField, RadialGrid};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn disk() -> Grid2D {
        Grid2D::disk(64, 0.05).unwrap()
    }

    #[test]
    fn lift_spot_values() {
        let g = Grid2D::disk(40, 0.05).unwrap();
        let f = lift_radial(&RadialProfile::paraboloid(), &g).unwrap();
        // (12, 16)·h = (0.3, 0.4), |x| = 0.5.
        assert_relative_eq!(f.value_at(12, 16).unwrap(), 0.125, epsilon = 1e-15);
        let q = lift_radial(&RadialProfile::quartic(), &g).unwrap();
        assert_relative_eq!(q.value_at(12, 16).unwrap(), 0.015625, epsilon = 1e-15);
        // (0.6, 0.8) has |x| = 1 and lies outside the mask.
        assert!(q.value_at(24, 32).is_none());
        let z = lift_radial(&RadialProfile::constant(0.0), &g).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn lift_rejects_coarse_grid() {
        let g = Grid2D::disk(8, 0.3).unwrap();
        let err = lift_radial(&RadialProfile::paraboloid(), &g).unwrap_err();
        assert!(matches!(err, Error::ResolutionTooCoarse { nodes: 17, .. }));
    }

    #[test]
    fn cof_det_pairing_examples() {
        let g = disk();
        let a = SymMatrixField2D::constant(&g, Sym2::new(1.0, 2.0, 3.0));
        let b = SymMatrixField2D::constant(&g, Sym2::new(0.0, 1.0, 0.0));
        assert!(pairing_2d(&a, &b)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 4.0));
        assert_eq!(cof_2d(&a).values()[0], Sym2::new(3.0, -2.0, 1.0));
        assert_eq!(det_2d(&a).values()[0], -1.0);
        let id = SymMatrixField2D::constant(&g, Sym2::IDENTITY);
        assert!(pairing_2d(&id, &id)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 2.0));
        assert_eq!(cof_2d(&id).values()[0], Sym2::IDENTITY);
        assert_eq!(det_2d(&id).values()[0], 1.0);
        let zero = SymMatrixField2D::constant(&g, Sym2::ZERO);
        assert_eq!(pairing_2d(&a, &zero).unwrap().max_abs(), 0.0);
        assert_eq!(det_2d(&zero).max_abs(), 0.0);
    }

    #[test]
    fn pairing_rejects_other_lattice() {
        let a = SymMatrixField2D::constant(&disk(), Sym2::IDENTITY);
        let b = SymMatrixField2D::constant(&Grid2D::disk(32, 0.1).unwrap(), Sym2::IDENTITY);
        assert!(matches!(pairing_2d(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn conjugation_quarter_turn() {
        let p = Sym2::new(1.0, 0.0, 0.0);
        let r = p.conjugate(FRAC_PI_2.cos(), FRAC_PI_2.sin());
        assert!(r.sub(&Sym2::new(0.0, 0.0, 1.0)).norm_sq() < 1e-30);
        let id = Sym2::IDENTITY.conjugate(0.3f64.cos(), 0.3f64.sin());
        assert!(id.sub(&Sym2::IDENTITY).norm_sq() < 1e-30);
    }

    #[test]
    fn integrals() {
        let g = Grid2D::disk(256, 0.05).unwrap();
        let one = ScalarField2D::from_fn(&g, |_, _| 1.0);
        let i = integral_2d(&one);
        let exact = PI * 0.95 * 0.95;
        assert!((i.value - exact).abs() < 4.0 * g.spacing());
        assert_eq!(integral_2d(&ScalarField2D::zeros(&g)).value, 0.0);

        // Radial quadrature on t ≤ 0.95 is the oracle.
        let f = ScalarField2D::from_fn(&g, |x, y| 10.0 * (x * x + y * y).powi(2));
        let rg = RadialGrid::midpoint(4096).unwrap();
        let vals = rg
            .points()
            .iter()
            .map(|&t| if t <= 0.95 { 10.0 * t.powi(4) } else { 0.0 })
            .collect();
        let oracle = disk_integral(&RadialField::new(rg, vals).unwrap()).unwrap();
        let got = integral_2d(&f).value;
        assert!((got - oracle).abs() < 0.01 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn intersection_of_bands() {
        let lat = 64;
        let a = ScalarField2D::from_fn(&Grid2D::new(lat, Band::disk(0.9)).unwrap(), |x, _| x);
        let b = ScalarField2D::from_fn(
            &Grid2D::new(
                lat,
                Band {
                    inner: 0.2,
                    outer: 0.95,
                },
            )
            .unwrap(),
            |x, _| x,
        );
        let d = a.linear_combination(1.0, &b, -1.0).unwrap();
        assert_eq!(
            d.grid().band(),
            Band {
                inner: 0.2,
                outer: 0.9
            }
        );
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn rotation_angle_reduces() {
        assert_eq!(RotationAngle::new(0.0).radians(), 0.0);
        assert!((RotationAngle::new(-FRAC_PI_2).radians() - 1.5 * PI).abs() < 1e-15);
        assert!(RotationAngle::new(7.0 * PI).radians() < TAU);
    }
}
