//! Admissible variations, admissibility and stationarity defects, and the
//! end-to-end check that a radial profile is formally stationary.
//!
//! A variation `f` is admissible for `V` when `cof ∇²V : ∇²f = 0`; `V` is
//! formally stationary when `∫ ∇²V : ∇²f = 0` for every admissible `f`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bump::{eta, eta_integral, eta_with_derivatives};
use crate::error::{Error, Result};
use crate::field2d::{
    angular_average_scalar, cof_2d, hessian_fd, integral_2d, l2_norm_2d, lift_radial, norm_sq_2d,
    pairing_2d, Band, Grid2D, Rect, ScalarField2D, SymMatrixField2D, DEFAULT_MARGIN,
    DEFAULT_PER_UNIT,
};
use crate::identities::CALIBRATED_C;
use crate::radial::{
    cof_pairing_radial, disk_integral, disk_l2_norm, energy, energy_density_radial,
    frobenius_pairing_radial, ProfileKind, RadialGrid, RadialProfile, DEFAULT_CELLS,
};

/// Relative plateau threshold for closed-form profiles.
pub const EPS_PLATEAU_ANALYTIC: f64 = 1e-9;
/// Relative plateau threshold for sampled profiles.
pub const EPS_PLATEAU_SAMPLED: f64 = 1e-6;
/// Plateaus narrower than this many radial cells are ignored.
pub const MIN_PLATEAU_CELLS: usize = 8;
/// Tolerances of the all-analytic radial path.
pub const TOL_RADIAL: f64 = 1e-8;
/// A zero-Hessian band must span at least this many lattice cells.
pub const MIN_BAND_CELLS: f64 = 24.0;
/// Clearance, in lattice cells, between a 2D bump and the band edges.
pub const BUMP_CLEARANCE: f64 = 6.0;
/// Finest lattice tried for a zero-Hessian band.
pub const MAX_BAND_PER_UNIT: usize = 4096;
/// Symmetrization takes at least this many angles across a bump.
pub const SAMPLES_PER_BUMP: f64 = 32.0;
/// Fewest angles used by symmetrization.
pub const MIN_SYMMETRIZE_ANGLES: usize = 256;

/// Tolerance of any path through 2D finite differences, `5 C h²`.
pub fn tol_fd(h: f64) -> f64 {
    5.0 * CALIBRATED_C * h * h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariationKind {
    RadialPlateau,
    ZeroHessian,
    Symmetrized,
    Harmonic,
    Custom,
}

impl VariationKind {
    pub fn label(&self) -> &'static str {
        match self {
            VariationKind::RadialPlateau => "radial-plateau",
            VariationKind::ZeroHessian => "zero-hessian",
            VariationKind::Symmetrized => "symmetrized",
            VariationKind::Harmonic => "harmonic",
            VariationKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Payload {
    Radial(RadialProfile),
    Field(ScalarField2D),
}

/// A test direction `f`.
#[derive(Clone, Debug)]
pub struct Variation {
    pub kind: VariationKind,
    pub payload: Payload,
}

impl Variation {
    pub fn radial(kind: VariationKind, f: RadialProfile) -> Self {
        Self {
            kind,
            payload: Payload::Radial(f),
        }
    }

    pub fn field(kind: VariationKind, f: ScalarField2D) -> Self {
        Self {
            kind,
            payload: Payload::Field(f),
        }
    }
}

/// Raw defects of one variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    /// `‖cof ∇²V : ∇²f‖_{L²}`.
    pub adm_defect: f64,
    /// `∫ ∇²V : ∇²f`.
    pub stat_defect: f64,
    /// `‖∇²f‖_{L²}`.
    pub norm_f: f64,
    /// `‖∇²V‖_{L²}`.
    pub norm_v: f64,
    /// Tolerance scale of the path that produced the numbers.
    pub path_tol: f64,
}

impl Measured {
    /// `|∫ ∇²V : ∇²f| / (‖∇²V‖ ‖∇²f‖)`, zero when both sides vanish.
    pub fn normalized(&self) -> f64 {
        let d = self.norm_v * self.norm_f;
        if d > 0.0 {
            self.stat_defect.abs() / d
        } else if self.stat_defect == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn admissible(&self, tol_adm: f64) -> bool {
        self.adm_defect <= tol_adm * self.norm_v * self.norm_f
    }
}

/// `‖∇²V‖_{L²}` from the radial energy.
pub fn norm_v(v: &RadialProfile, grid: &RadialGrid) -> Result<f64> {
    Ok(energy(v, grid)?.max(0.0).sqrt())
}

/// Radial quadrature grid used for `v`: its own grid if sampled.
pub fn working_grid(v: &RadialProfile, cells: usize) -> Result<RadialGrid> {
    match v.native_grid() {
        Some(g) => Ok(g.clone()),
        None => RadialGrid::midpoint(cells),
    }
}

/// Tolerance of the radial path for `v` on `grid`.
pub fn radial_path_tol(v: &RadialProfile, grid: &RadialGrid, tol: f64) -> f64 {
    match v.kind() {
        ProfileKind::Analytic => tol,
        ProfileKind::Sampled => tol_fd(grid.spacing()),
    }
}

/// Defects of a radial variation by the closed-form radial formulas.
pub fn measure_radial(v: &RadialProfile, f: &RadialProfile, grid: &RadialGrid) -> Result<Measured> {
    Ok(Measured {
        adm_defect: disk_l2_norm(&cof_pairing_radial(v, f, grid)?)?,
        stat_defect: disk_integral(&frobenius_pairing_radial(v, f, grid)?)?,
        norm_f: disk_integral(&energy_density_radial(f, grid)?)?
            .max(0.0)
            .sqrt(),
        norm_v: norm_v(v, grid)?,
        path_tol: TOL_RADIAL,
    })
}

/// Finite-difference Hessian of the lifted profile on `grid`.
pub fn potential_hessian(v: &RadialProfile, grid: &Grid2D) -> Result<SymMatrixField2D> {
    hessian_fd(&lift_radial(v, grid)?)
}

/// Defects of a 2D variation against a precomputed `∇²V`.
pub fn measure_2d_with(vh: &SymMatrixField2D, f: &ScalarField2D, norm_v: f64) -> Result<Measured> {
    let hf = hessian_fd(f)?;
    let adm = l2_norm_2d(&pairing_2d(&cof_2d(vh), &hf)?);
    let stat = integral_2d(&pairing_2d(vh, &hf)?).value;
    let norm_f = integral_2d(&norm_sq_2d(&hf)).value.max(0.0).sqrt();
    Ok(Measured {
        adm_defect: adm,
        stat_defect: stat,
        norm_f,
        norm_v,
        path_tol: tol_fd(f.grid().spacing()),
    })
}

/// Defects of a 2D variation; `V` is lifted onto the grid of `f`.
pub fn measure_2d(v: &RadialProfile, f: &ScalarField2D, radial: &RadialGrid) -> Result<Measured> {
    let vh = potential_hessian(v, f.grid())?;
    measure_2d_with(&vh, f, norm_v(v, radial)?)
}

/// Radial formulas when `f` is radial, 2D fields otherwise.
pub fn measure(v: &RadialProfile, f: &Payload, radial: &RadialGrid) -> Result<Measured> {
    match f {
        Payload::Radial(p) => {
            let mut m = measure_radial(v, p, radial)?;
            m.path_tol = radial_path_tol(v, radial, TOL_RADIAL);
            Ok(m)
        }
        Payload::Field(g) => measure_2d(v, g, radial),
    }
}

/// Admissibility verdict and defect.
pub fn is_admissible(
    v: &RadialProfile,
    f: &Payload,
    tol_adm: f64,
    radial: &RadialGrid,
) -> Result<(bool, f64)> {
    let m = measure(v, f, radial)?;
    Ok((m.admissible(tol_adm), m.adm_defect))
}

/// `∫ ∇²V : ∇²f`, without checking admissibility.
pub fn stationarity_defect(v: &RadialProfile, f: &Payload, radial: &RadialGrid) -> Result<f64> {
    Ok(measure(v, f, radial)?.stat_defect)
}

/// `∫ ∇²V : ∇²f`, rejecting inadmissible `f`.
pub fn stationarity_defect_checked(
    v: &RadialProfile,
    f: &Payload,
    tol_adm: f64,
    radial: &RadialGrid,
) -> Result<f64> {
    let m = measure(v, f, radial)?;
    if !m.admissible(tol_adm) {
        return Err(Error::NotAdmissible {
            defect: m.adm_defect,
            bound: tol_adm * m.norm_v * m.norm_f,
        });
    }
    Ok(m.stat_defect)
}

/// A maximal interval on which `v′` and `v″` vanish to relative
/// precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub start: f64,
    pub end: f64,
    pub cells: usize,
}

impl Plateau {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// Plateau threshold appropriate for `v`.
pub fn plateau_eps(v: &RadialProfile) -> f64 {
    match v.kind() {
        ProfileKind::Analytic => EPS_PLATEAU_ANALYTIC,
        ProfileKind::Sampled => EPS_PLATEAU_SAMPLED,
    }
}

/// Grid runs where `|v″| ≤ ε sup|v″|` and `|v′/t| ≤ ε sup|v′/t|`, at least
/// [`MIN_PLATEAU_CELLS`] long. Endpoints are the outer cell edges.
pub fn detect_plateaus(v: &RadialProfile, grid: &RadialGrid, eps: f64) -> Result<Vec<Plateau>> {
    let s = v.sample(grid)?;
    let t = grid.points();
    let tang: Vec<f64> = s.d1.iter().zip(t).map(|(d, t)| d / t).collect();
    let sup2 = s.d2.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let sup1 = tang.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let flat: Vec<bool> = (0..t.len())
        .map(|j| s.d2[j].abs() <= eps * sup2 && tang[j].abs() <= eps * sup1)
        .collect();
    let edge = |j: usize| -> f64 {
        if j == 0 {
            0.0
        } else if j >= t.len() {
            1.0
        } else {
            0.5 * (t[j - 1] + t[j])
        }
    };
    let mut out = Vec::new();
    let mut j = 0;
    while j < t.len() {
        if !flat[j] {
            j += 1;
            continue;
        }
        let j0 = j;
        while j < t.len() && flat[j] {
            j += 1;
        }
        if j - j0 >= MIN_PLATEAU_CELLS {
            out.push(Plateau {
                start: edge(j0),
                end: edge(j),
                cells: j - j0,
            });
        }
    }
    Ok(out)
}

/// Radial bump with `f′(t) = η((t - c)/w)`, `f(t) = w Φ((t - c)/w)` where
/// `Φ` is the antiderivative of `η` vanishing at `-1/2`. `f′` is supported
/// in `(c - w/2, c + w/2)`.
pub fn radial_bump(c: f64, w: f64) -> RadialProfile {
    RadialProfile::analytic(format!("bump(c={c:.6}, w={w:.6})"), move |t| {
        let s = (t - c) / w;
        let [e0, e1, _] = eta_with_derivatives(s);
        [w * eta_integral(s), e0, e1 / w]
    })
}

/// Stream-split generator for variation `index`.
fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Radial admissible directions supported on the plateaus of `v`, cycling
/// through the plateaus. Without plateaus the only radial admissible
/// directions are constants, and a single constant is returned.
pub fn gen_plateau_variations(
    v: &RadialProfile,
    grid: &RadialGrid,
    count: usize,
    seed: u64,
) -> Result<Vec<Variation>> {
    let plateaus = detect_plateaus(v, grid, plateau_eps(v))?;
    if plateaus.is_empty() {
        return Ok(vec![Variation::radial(
            VariationKind::RadialPlateau,
            RadialProfile::constant(1.0),
        )]);
    }
    Ok((0..count)
        .map(|k| {
            let p = plateaus[k % plateaus.len()];
            let mut rng = rng_for(seed, k as u64);
            let w = rng.gen_range(0.3..0.9) * p.width();
            let c = rng.gen_range(p.start + 0.5 * w..p.end - 0.5 * w);
            Variation::radial(VariationKind::RadialPlateau, radial_bump(c, w))
        })
        .collect())
}

/// The annulus in which 2D zero-Hessian variations live.
#[derive(Clone, Debug)]
pub struct ZeroHessianBand {
    pub plateau: Plateau,
    pub grid: Grid2D,
}

/// Lattice band over the widest plateau, refined until it spans at least
/// [`MIN_BAND_CELLS`] cells.
pub fn zero_hessian_band(v: &RadialProfile, radial: &RadialGrid) -> Result<ZeroHessianBand> {
    let plateaus = detect_plateaus(v, radial, plateau_eps(v))?;
    let widest = plateaus
        .iter()
        .copied()
        .max_by(|a, b| a.width().total_cmp(&b.width()))
        .ok_or_else(|| Error::NoPlateau(format!("{} has no plateau", v.name())))?;
    let mut k = DEFAULT_PER_UNIT;
    while k <= MAX_BAND_PER_UNIT {
        let h = 1.0 / k as f64;
        let outer = widest.end.min(1.0 - 2.0 * h);
        if (outer - widest.start) / h >= MIN_BAND_CELLS {
            let band = Band {
                inner: widest.start,
                outer,
            };
            return Ok(ZeroHessianBand {
                plateau: widest,
                grid: Grid2D::new(k, band)?,
            });
        }
        k *= 2;
    }
    Err(Error::NoPlateau(format!(
        "widest plateau of {} spans [{:.6}, {:.6}], unresolvable up to h = 1/{MAX_BAND_PER_UNIT}",
        v.name(),
        widest.start,
        widest.end
    )))
}

/// Tensor-product bump `η((x - cx)/(2w)) η((y - cy)/(2w))` supported in
/// the square of half-width `w` around `(cx, cy)`.
pub fn box_bump(grid: &Grid2D, cx: f64, cy: f64, w: f64) -> ScalarField2D {
    let rect = Rect::centered(cx, cy, w);
    ScalarField2D::from_fn_supported(grid, rect, move |x, y| {
        eta((x - cx) / (2.0 * w)) * eta((y - cy) / (2.0 * w))
    })
}

/// Non-radial admissible directions: 2D bumps with random centres and
/// sizes inside the zero-Hessian band of `v`.
pub fn gen_zero_hessian_variations(
    v: &RadialProfile,
    radial: &RadialGrid,
    count: usize,
    seed: u64,
    stream_offset: u64,
) -> Result<(ZeroHessianBand, Vec<Variation>)> {
    let zb = zero_hessian_band(v, radial)?;
    let g = &zb.grid;
    let h = g.spacing();
    let band = g.band();
    let lo = if band.inner > 0.0 {
        band.inner + BUMP_CLEARANCE * h
    } else {
        0.0
    };
    let hi = band.outer - BUMP_CLEARANCE * h;
    let usable = hi - lo;
    let vars = (0..count)
        .map(|k| {
            let mut rng = rng_for(seed, stream_offset + k as u64);
            let mut w = rng.gen_range(0.15..0.3) * usable;
            loop {
                for _ in 0..256 {
                    let rho = rng.gen_range(lo..=hi);
                    let theta = rng.gen_range(0.0..TAU);
                    let (cx, cy) = (rho * theta.cos(), rho * theta.sin());
                    let r = Rect::centered(cx, cy, w);
                    if r.max_radius() <= hi && (lo == 0.0 || r.min_radius() >= lo) {
                        return Variation::field(
                            VariationKind::ZeroHessian,
                            box_bump(g, cx, cy, w),
                        );
                    }
                }
                w *= 0.8;
            }
        })
        .collect();
    Ok((zb, vars))
}

/// Number of angles resolving a field supported in `rect`: a power of two
/// with at least [`SAMPLES_PER_BUMP`] samples across its angular extent.
pub fn symmetrize_angles(rect: Option<Rect>, floor: usize) -> usize {
    let floor = floor.max(MIN_SYMMETRIZE_ANGLES).next_power_of_two();
    let Some(r) = rect else { return floor };
    if r.min_radius() == 0.0 {
        return floor;
    }
    let (cx, cy) = r.center();
    let gamma = cy.atan2(cx);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in r.corners() {
        let d = (y.atan2(x) - gamma + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let need = (SAMPLES_PER_BUMP * TAU / (hi - lo)).ceil() as usize;
    need.next_power_of_two().max(floor)
}

/// `f̄`, the angular average of `f`, as a variation.
pub fn symmetrize_variation(f: &ScalarField2D, angles: usize) -> Result<Variation> {
    let m = symmetrize_angles(f.support(), angles);
    Ok(Variation::field(
        VariationKind::Symmetrized,
        angular_average_scalar(f, m)?,
    ))
}

/// True when `v″ = v′/t = c` on the grid, so that `cof ∇²V = c I`.
pub fn is_paraboloid_like(v: &RadialProfile, grid: &RadialGrid) -> Result<bool> {
    let s = v.sample(grid)?;
    let c = s.d2[0];
    if c == 0.0 {
        return Ok(false);
    }
    let tol = 1e-9 * c.abs();
    Ok(grid
        .points()
        .iter()
        .enumerate()
        .all(|(j, t)| (s.d2[j] - c).abs() <= tol && (s.d1[j] / t - c).abs() <= tol))
}

/// `Re zᵐ` and `Im zᵐ` for `m = 2..=6`, harmonic and hence admissible when
/// `cof ∇²V` is a multiple of the identity.
pub fn harmonic_variations(grid: &Grid2D) -> Vec<Variation> {
    let mut out = Vec::new();
    for m in 2..=6 {
        for imag in [false, true] {
            let f = ScalarField2D::from_fn(grid, move |x, y| {
                let (r, th) = (x.hypot(y), y.atan2(x));
                r.powi(m)
                    * if imag {
                        (m as f64 * th).sin()
                    } else {
                        (m as f64 * th).cos()
                    }
            });
            out.push(Variation::field(VariationKind::Harmonic, f));
        }
    }
    out
}

/// Settings of [`verify_proposition`].
#[derive(Clone, Debug)]
pub struct StationarityConfig {
    pub seed: u64,
    pub radial_cells: usize,
    pub radial_count: usize,
    pub zero_hessian_count: usize,
    pub symmetrized_count: usize,
    pub tol_adm: f64,
    pub tol_stat: f64,
    /// Lattice for harmonic and custom 2D variations.
    pub per_unit: usize,
    pub margin: f64,
    /// Lower bound on the number of symmetrization angles.
    pub angles: usize,
    pub custom: Vec<Variation>,
}

impl Default for StationarityConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            radial_cells: DEFAULT_CELLS,
            radial_count: 12,
            zero_hessian_count: 4,
            symmetrized_count: 4,
            tol_adm: TOL_RADIAL,
            tol_stat: TOL_RADIAL,
            per_unit: DEFAULT_PER_UNIT,
            margin: DEFAULT_MARGIN,
            angles: MIN_SYMMETRIZE_ANGLES,
            custom: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub adm: f64,
    pub stat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationRecord {
    pub kind: VariationKind,
    pub adm_defect: f64,
    pub stat_defect: f64,
    pub norm_f: f64,
    pub normalized: f64,
    /// `None` for inadmissible custom variations, which do not enter the
    /// verdict.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub profile: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub variations: Vec<VariationRecord>,
    pub verdict: Verdict,
    /// Human-readable remarks; not part of the serialized report.
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl StationarityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn count(&self, kind: VariationKind) -> usize {
        self.variations.iter().filter(|r| r.kind == kind).count()
    }
}

/// Record for one measured variation. Path tolerances never drop below
/// the configured ones.
pub fn record(kind: VariationKind, m: &Measured, tol: Tolerances) -> VariationRecord {
    let (adm_tol, stat_tol) = if m.path_tol > TOL_RADIAL {
        (tol.adm.max(m.path_tol), tol.stat.max(m.path_tol))
    } else {
        (tol.adm, tol.stat)
    };
    let admissible = m.admissible(adm_tol);
    let normalized = m.normalized();
    let pass = match (admissible, kind) {
        (false, VariationKind::Custom) => None,
        (false, _) => Some(false),
        (true, _) => Some(normalized <= stat_tol),
    };
    VariationRecord {
        kind,
        adm_defect: m.adm_defect,
        stat_defect: m.stat_defect,
        norm_f: m.norm_f,
        normalized,
        pass,
    }
}

/// Runs every applicable generator against `v` and checks the normalized
/// stationarity defect of each admissible variation.
pub fn verify_proposition(
    v: &RadialProfile,
    cfg: &StationarityConfig,
) -> Result<StationarityReport> {
    let radial = working_grid(v, cfg.radial_cells)?;
    v.validate(&radial, crate::radial::TOL_ORIGIN)?;
    let nv = norm_v(v, &radial)?;
    let tol = Tolerances {
        adm: radial_path_tol(v, &radial, cfg.tol_adm),
        stat: radial_path_tol(v, &radial, cfg.tol_stat),
    };
    let mut notes = Vec::new();
    let mut records = Vec::new();

    let plateau = gen_plateau_variations(v, &radial, cfg.radial_count, cfg.seed)?;
    if detect_plateaus(v, &radial, plateau_eps(v))?.is_empty() {
        notes.push("no nontrivial radial admissible directions".to_string());
    }
    let measured: Vec<Measured> = plateau
        .par_iter()
        .map(|var| match &var.payload {
            Payload::Radial(f) => {
                let mut m = measure_radial(v, f, &radial)?;
                m.path_tol = tol.stat;
                Ok(m)
            }
            Payload::Field(_) => unreachable!("plateau variations are radial"),
        })
        .collect::<Result<_>>()?;
    records.extend(
        plateau
            .iter()
            .zip(&measured)
            .map(|(var, m)| record(var.kind, m, tol)),
    );

    match gen_zero_hessian_variations(v, &radial, cfg.zero_hessian_count, cfg.seed, 1 << 32) {
        Ok((zb, zh)) => {
            let vh = potential_hessian(v, &zb.grid)?;
            let band = zb.grid.band();
            notes.push(format!(
                "zero-Hessian band [{:.6}, {:.6}] at h = 1/{}, 2D tolerance {:.3e}",
                band.inner,
                band.outer,
                zb.grid.per_unit(),
                tol_fd(zb.grid.spacing())
            ));
            let sym: Vec<Variation> = (0..if zh.is_empty() {
                0
            } else {
                cfg.symmetrized_count
            })
                .map(|k| match &zh[k % zh.len()].payload {
                    Payload::Field(f) => symmetrize_variation(f, cfg.angles),
                    Payload::Radial(_) => unreachable!("zero-Hessian variations are 2D"),
                })
                .collect::<Result<_>>()?;
            let all: Vec<&Variation> = zh.iter().chain(&sym).collect();
            let measured: Vec<Measured> = all
                .par_iter()
                .map(|var| match &var.payload {
                    Payload::Field(f) => measure_2d_with(&vh, f, nv),
                    Payload::Radial(_) => unreachable!(),
                })
                .collect::<Result<_>>()?;
            records.extend(
                all.iter()
                    .zip(&measured)
                    .map(|(var, m)| record(var.kind, m, tol)),
            );
        }
        Err(Error::NoPlateau(msg)) => notes.push(format!("no zero-Hessian variations: {msg}")),
        Err(e) => return Err(e),
    }

    let disk = Grid2D::disk(cfg.per_unit, cfg.margin)?;
    let mut extra: Vec<Variation> = Vec::new();
    if is_paraboloid_like(v, &radial)? {
        notes.push("only trivial/harmonic variation classes available".to_string());
        extra.extend(harmonic_variations(&disk));
    }
    extra.extend(cfg.custom.iter().cloned());
    if !extra.is_empty() {
        let vh = potential_hessian(v, &disk)?;
        let measured: Vec<Measured> = extra
            .par_iter()
            .map(|var| match &var.payload {
                Payload::Radial(f) => {
                    let mut m = measure_radial(v, f, &radial)?;
                    m.path_tol = tol.stat;
                    Ok(m)
                }
                Payload::Field(f) if f.grid().same_lattice(&disk) => measure_2d_with(&vh, f, nv),
                Payload::Field(f) => measure_2d(v, f, &radial),
            })
            .collect::<Result<_>>()?;
        records.extend(
            extra
                .iter()
                .zip(&measured)
                .map(|(var, m)| record(var.kind, m, tol)),
        );
    }

    let excluded = records.iter().filter(|r| r.pass.is_none()).count();
    if excluded > 0 {
        notes.push(format!(
            "{excluded} inadmissible custom variation(s) excluded from the verdict"
        ));
    }
    let verdict = if records.iter().all(|r| r.pass != Some(false)) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(StationarityReport {
        profile: v.name().to_string(),
        seed: cfg.seed,
        tolerances: tol,
        variations: records,
        verdict,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> RadialGrid {
        RadialGrid::midpoint(DEFAULT_CELLS).unwrap()
    }

    #[test]
    fn paraboloid_has_no_plateau() {
        let g = grid();
        let p = RadialProfile::paraboloid();
        assert!(detect_plateaus(&p, &g, EPS_PLATEAU_ANALYTIC)
            .unwrap()
            .is_empty());
        let vars = gen_plateau_variations(&p, &g, 12, 1).unwrap();
        assert_eq!(vars.len(), 1);
        assert!(matches!(
            zero_hessian_band(&p, &g),
            Err(Error::NoPlateau(_))
        ));
        assert!(is_paraboloid_like(&p, &g).unwrap());
    }

    #[test]
    fn constant_is_one_plateau() {
        let g = grid();
        let c = RadialProfile::constant(2.0);
        let p = detect_plateaus(&c, &g, EPS_PLATEAU_ANALYTIC).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].start, p[0].end), (0.0, 1.0));
        assert_eq!(gen_plateau_variations(&c, &g, 5, 3).unwrap().len(), 5);
        let zb = zero_hessian_band(&c, &g).unwrap();
        assert_eq!(zb.grid.per_unit(), DEFAULT_PER_UNIT);
        assert_eq!(zb.grid.band().inner, 0.0);
    }

    #[test]
    fn radial_bump_jet() {
        let b = radial_bump(0.5, 0.2);
        assert_eq!(b.jet(0.3), [0.0; 3]);
        assert_eq!(b.jet(0.5)[1], 1.0);
        let far = b.jet(0.7);
        assert_eq!(far[1], 0.0);
        assert_relative_eq!(far[0], 0.2 * crate::bump::eta_mass(), epsilon = 1e-12);
    }

    #[test]
    fn admissibility_examples() {
        let g = grid();
        let p = RadialProfile::paraboloid();
        let (ok, d) = is_admissible(&p, &Payload::Radial(p.clone()), 1e-8, &g).unwrap();
        assert!(!ok);
        // ‖2‖ over the unit disk is 2√π.
        assert_relative_eq!(d, 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-6);
        let c = Payload::Radial(RadialProfile::constant(3.0));
        assert_eq!(is_admissible(&p, &c, 1e-8, &g).unwrap(), (true, 0.0));
        let quartic = Payload::Radial(RadialProfile::quartic());
        assert!(matches!(
            stationarity_defect_checked(&p, &quartic, 1e-8, &g),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn harmonic_direction_for_paraboloid() {
        let g = grid();
        let disk = Grid2D::disk(DEFAULT_PER_UNIT, DEFAULT_MARGIN).unwrap();
        let p = RadialProfile::paraboloid();
        let f = ScalarField2D::from_fn(&disk, |x, y| x * x - y * y);
        let m = measure_2d(&p, &f, &g).unwrap();
        assert!(m.adm_defect < 1e-9);
        assert!(m.stat_defect.abs() < 1e-9);
        assert!(m.admissible(tol_fd(disk.spacing())));
    }

    #[test]
    fn angles_resolve_bump() {
        let r = Rect::centered(0.99, 0.0, 0.004);
        let m = symmetrize_angles(Some(r), 256);
        assert!(m.is_power_of_two());
        assert!(m as f64 * 0.008 / 0.99 / TAU >= SAMPLES_PER_BUMP);
        assert_eq!(symmetrize_angles(None, 100), 256);
    }
}
