//! The bump-series family of radial solutions sharing one constraint field.
//!
//! The base profile is
//! `v(t) = Σ_{n<N} Δ_nⁿ η((t - c_n)/Δ_n)` with `Δ_n = t_{n+1} - t_n` and
//! `c_n` the midpoint of `(t_n, t_{n+1})`. Flipping the sign of `v` on any
//! union of these intervals leaves `|v′|` unchanged, hence `det ∇²V` and
//! `|∇²V|²` as well.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bump::{eta, eta_with_derivatives, ETA_MAX, HALF_WIDTH};
use crate::error::{Error, Result};
use crate::radial::{
    det_hessian_radial, disk_integral, energy_density_radial, RadialGrid, RadialProfile,
    DEFAULT_CELLS,
};
use crate::stationarity::{verify_proposition, StationarityConfig, StationarityReport, Verdict};

/// Largest truncation depth.
pub const MAX_DEPTH: usize = 24;
/// Truncation stops once `Δ_n^{n-2}` drops below this.
pub const TRUNCATION_THRESHOLD: f64 = 1e-14;
/// Pointwise tolerance for `det ∇²U = det ∇²V`.
pub const TOL_DET: f64 = 1e-10;
/// Pointwise tolerance for `|u′| = |v′|`.
pub const TOL_SLOPE: f64 = 1e-12;
/// Pointwise tolerance for equal energy densities.
pub const TOL_DENSITY: f64 = 1e-10;
/// Relative tolerance for equal energies.
pub const TOL_ENERGY: f64 = 1e-10;
/// Profiles closer than this in sup norm are not distinct.
pub const TOL_DISTINCT: f64 = 1e-12;
/// Default number of flipped members.
pub const DEFAULT_MEMBERS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sequence {
    /// `t_n = R (1 - 2⁻ⁿ)`.
    Geometric,
    /// Explicit `t_1 < t_2 < …`; `t_0 = 0` is implied.
    Custom(Vec<f64>),
}

/// Radius, interval sequence, and truncation depth of a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub radius: f64,
    pub sequence: Sequence,
    /// Number of bumps kept; `None` picks the depth from
    /// [`TRUNCATION_THRESHOLD`].
    pub depth: Option<usize>,
    pub members: usize,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            sequence: Sequence::Geometric,
            depth: None,
            members: DEFAULT_MEMBERS,
        }
    }
}

/// A validated spec: the nodes `t_0 = 0 < t_1 < … < t_N` and amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub radius: f64,
    nodes: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::SpecInvalid(msg.into())
}

fn auto_depth(gap: impl Fn(usize) -> f64, max: usize) -> usize {
    (2..max)
        .find(|&n| gap(n).powi(n as i32 - 2) < TRUNCATION_THRESHOLD)
        .unwrap_or(max)
}

impl FamilySpec {
    /// Checks the invariants and materializes `t_0 … t_N`.
    pub fn build(&self) -> Result<Family> {
        let r = self.radius;
        if !(r > 0.0 && r <= 1.0) {
            return Err(invalid(format!("R = {r} is outside (0, 1]")));
        }
        check_eta()?;
        let nodes = match &self.sequence {
            Sequence::Geometric => {
                let n = match self.depth {
                    Some(n) => n,
                    None => auto_depth(|n| r * 0.5f64.powi(n as i32 + 1), MAX_DEPTH),
                };
                if n > MAX_DEPTH {
                    return Err(invalid(format!("N = {n} exceeds {MAX_DEPTH}")));
                }
                (0..=n)
                    .map(|k| r * (1.0 - 0.5f64.powi(k as i32)))
                    .collect::<Vec<_>>()
            }
            Sequence::Custom(t) => {
                let mut nodes = Vec::with_capacity(t.len() + 1);
                nodes.push(0.0);
                nodes.extend_from_slice(t);
                if let Some(k) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
                    return Err(invalid(format!(
                        "t is not strictly increasing at t_{} = {}",
                        k + 1,
                        nodes[k + 1]
                    )));
                }
                if nodes.iter().any(|x| !x.is_finite()) || *nodes.last().unwrap() >= r {
                    return Err(invalid(format!("t must lie in (0, R) with R = {r}")));
                }
                let avail = nodes.len() - 1;
                let n = self
                    .depth
                    .unwrap_or_else(|| auto_depth(|n| nodes[n + 1] - nodes[n], avail).min(avail));
                if n > avail {
                    return Err(invalid(format!(
                        "N = {n} needs t_{n} but only {avail} values are given"
                    )));
                }
                nodes.truncate(n + 1);
                nodes
            }
        };
        let depth = nodes.len() - 1;
        if depth < 2 {
            return Err(invalid(format!("N = {depth}, need at least 2")));
        }
        if self.members >= depth {
            return Err(invalid(format!(
                "{} members need N > {}, have N = {depth}",
                self.members, self.members
            )));
        }
        Ok(Family { radius: r, nodes })
    }
}

/// `η(±1/2)` and its first two derivatives vanish, and `η` is not zero.
fn check_eta() -> Result<()> {
    for s in [-HALF_WIDTH, HALF_WIDTH] {
        if eta_with_derivatives(s) != [0.0; 3] {
            return Err(invalid("bump does not vanish to second order at ±1/2"));
        }
    }
    if eta(0.0) != ETA_MAX || ETA_MAX <= 0.0 {
        return Err(invalid("bump is identically zero"));
    }
    Ok(())
}

impl Family {
    /// Number of bumps `N`.
    pub fn depth(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `t_0 … t_N`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `(t_n, t_{n+1})`.
    pub fn interval(&self, n: usize) -> (f64, f64) {
        (self.nodes[n], self.nodes[n + 1])
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.nodes[n + 1] - self.nodes[n]
    }

    /// `sup` of the n-th bump, `Δ_nⁿ η_max`.
    pub fn amplitude(&self, n: usize) -> f64 {
        self.gap(n).powi(n as i32) * ETA_MAX
    }

    /// Index of the interval containing `t`.
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !(t > 0.0 && t < self.nodes[self.depth()]) {
            return None;
        }
        Some(self.nodes.partition_point(|&x| x <= t) - 1)
    }

    /// `[v, v′, v″]` of the n-th term at `t`.
    pub fn term_jet(&self, n: usize, t: f64) -> [f64; 3] {
        let (a, b) = self.interval(n);
        let d = b - a;
        let s = (2.0 * t - a - b) / (2.0 * d);
        let [e0, e1, e2] = eta_with_derivatives(s);
        let amp = d.powi(n as i32);
        [amp * e0, amp * e1 / d, amp * e2 / (d * d)]
    }

    /// The profile with sign `signs[n]` on the n-th interval; missing
    /// entries count as `+1`.
    pub fn signed_profile(&self, name: impl Into<String>, signs: &[f64]) -> RadialProfile {
        let fam = Arc::new(self.clone());
        let signs: Arc<[f64]> = signs.into();
        RadialProfile::analytic(name, move |t| match fam.locate(t) {
            None => [0.0; 3],
            Some(n) => {
                let s = signs.get(n).copied().unwrap_or(1.0);
                fam.term_jet(n, t).map(|x| s * x)
            }
        })
    }

    /// `v`, the truncated series.
    pub fn base_profile(&self) -> RadialProfile {
        self.signed_profile("V", &[])
    }

    /// Sign vector flipping the listed intervals.
    pub fn signs(&self, flipped: &[usize]) -> Vec<f64> {
        let mut s = vec![1.0; self.depth()];
        for &n in flipped {
            s[n] = -s[n];
        }
        s
    }
}

/// Validated family and its base profile.
pub fn build_base_profile(spec: &FamilySpec) -> Result<RadialProfile> {
    Ok(spec.build()?.base_profile())
}

/// `U_n` (n ≥ 1) or `V` (n = 0).
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub index: usize,
    pub profile: RadialProfile,
    pub flip_interval: Option<(f64, f64)>,
}

/// `u_n`: `v` with its sign reversed on `(t_n, t_{n+1})`.
pub fn flip(family: &Family, n: usize) -> Result<FamilyMember> {
    if n == 0 {
        return Ok(FamilyMember {
            index: 0,
            profile: family.base_profile(),
            flip_interval: None,
        });
    }
    if n >= family.depth() {
        return Err(Error::IndexOutOfRange {
            index: n,
            valid: format!("0..{}", family.depth()),
        });
    }
    Ok(FamilyMember {
        index: n,
        profile: family.signed_profile(format!("U_{n}"), &family.signs(&[n])),
        flip_interval: Some(family.interval(n)),
    })
}

/// Random sign pattern over the `N` intervals, never all `+1`.
pub fn random_sign_pattern(family: &Family, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let s: Vec<f64> = (0..family.depth())
            .map(|_| if rng.gen_bool(0.5) { -1.0 } else { 1.0 })
            .collect();
        if s.iter().any(|&x| x < 0.0) {
            return s;
        }
    }
}

/// `n` random sign patterns from `seed`.
pub fn sign_patterns(family: &Family, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_sign_pattern(family, &mut rng))
        .collect()
}

/// Both sides of `det ∇²U = det ∇²V ⟺ |u′| = |v′|`, evaluated
/// independently.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetCheck {
    pub pass: bool,
    pub max_det_discrepancy: f64,
    pub max_slope_discrepancy: f64,
}

impl DetCheck {
    pub fn det_side(&self) -> bool {
        self.max_det_discrepancy <= TOL_DET
    }

    pub fn slope_side(&self) -> bool {
        self.max_slope_discrepancy <= TOL_SLOPE
    }

    /// The two sides agree, as the characterization demands.
    pub fn consistent(&self) -> bool {
        self.det_side() == self.slope_side()
    }
}

fn check_same_grid(u: &RadialProfile, v: &RadialProfile, grid: &RadialGrid) -> Result<()> {
    for p in [u, v] {
        if let Some(g) = p.native_grid() {
            if g != grid {
                return Err(Error::GridMismatch(format!(
                    "'{}' is sampled on a different grid",
                    p.name()
                )));
            }
        }
    }
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn check_same_det(u: &RadialProfile, v: &RadialProfile, grid: &RadialGrid) -> Result<DetCheck> {
    check_same_grid(u, v, grid)?;
    let det = max_abs_diff(
        det_hessian_radial(u, grid)?.values(),
        det_hessian_radial(v, grid)?.values(),
    );
    let (su, sv) = (u.sample(grid)?, v.sample(grid)?);
    let slope = su
        .d1
        .iter()
        .zip(&sv.d1)
        .fold(0.0f64, |m, (a, b)| m.max((a.abs() - b.abs()).abs()));
    let mut out = DetCheck {
        pass: false,
        max_det_discrepancy: det,
        max_slope_discrepancy: slope,
    };
    out.pass = out.det_side() && out.slope_side();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyCheck {
    pub pass: bool,
    pub max_density_discrepancy: f64,
    pub max_relative_energy_discrepancy: f64,
    pub energies: Vec<f64>,
}

/// Pointwise densities and totals of `u` and `v`, without preconditions.
pub fn compare_energies(
    u: &RadialProfile,
    v: &RadialProfile,
    grid: &RadialGrid,
) -> Result<EnergyCheck> {
    check_same_grid(u, v, grid)?;
    let (du, dv) = (
        energy_density_radial(u, grid)?,
        energy_density_radial(v, grid)?,
    );
    let density = max_abs_diff(du.values(), dv.values());
    let (eu, ev) = (disk_integral(&du)?, disk_integral(&dv)?);
    let scale = eu.abs().max(ev.abs());
    let rel = if scale > 0.0 {
        (eu - ev).abs() / scale
    } else {
        0.0
    };
    Ok(EnergyCheck {
        pass: density <= TOL_DENSITY && rel <= TOL_ENERGY,
        max_density_discrepancy: density,
        max_relative_energy_discrepancy: rel,
        energies: vec![eu, ev],
    })
}

/// [`compare_energies`] after confirming `|u′| = |v′|`.
pub fn check_energy_equality(
    u: &RadialProfile,
    v: &RadialProfile,
    grid: &RadialGrid,
) -> Result<EnergyCheck> {
    let d = check_same_det(u, v, grid)?;
    if !d.slope_side() {
        return Err(Error::PreconditionNotVerified(format!(
            "|u'| = |v'| fails by {:.3e}",
            d.max_slope_discrepancy
        )));
    }
    compare_energies(u, v, grid)
}

/// Points at which profiles are compared: `grid` plus every bump centre.
pub fn separation_points(family: &Family, grid: &RadialGrid) -> Vec<f64> {
    let mut t: Vec<f64> = grid.points().to_vec();
    t.extend((0..family.depth()).map(|n| {
        let (a, b) = family.interval(n);
        0.5 * (a + b)
    }));
    t
}

/// `(distinct, min separation)` over all pairs, sup norm on `points`.
pub fn pairwise_distinct(profiles: &[&RadialProfile], points: &[f64]) -> (bool, f64) {
    let values: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| points.iter().map(|&t| p.jet(t)[0]).collect())
        .collect();
    let mut min = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            min = min.min(max_abs_diff(&values[i], &values[j]));
        }
    }
    if values.len() < 2 {
        return (true, min);
    }
    (min > TOL_DISTINCT, min)
}

/// Separation the construction predicts for `V, U_1, …, U_m`:
/// twice the smallest flipped amplitude.
pub fn expected_separation(family: &Family, members: usize) -> f64 {
    (1..=members)
        .map(|n| 2.0 * family.amplitude(n))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberReport {
    pub index: usize,
    pub name: String,
    pub flip_interval: Option<(f64, f64)>,
    pub energy: f64,
    pub det_check: Option<DetCheck>,
    pub energy_check: Option<EnergyCheck>,
    pub stationarity: StationarityReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySummary {
    pub radius: f64,
    pub depth: usize,
    pub nodes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub family: FamilySummary,
    pub seed: u64,
    pub det_check: DetCheck,
    pub energy_check: EnergyCheck,
    pub min_separation: f64,
    pub expected_separation: Option<f64>,
    pub distinct: bool,
    pub members: Vec<MemberReport>,
    pub verdict: Verdict,
}

impl MultiplicityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Everything the experiment computed, including the profiles.
pub struct MultiplicityRun {
    pub family: Family,
    pub grid: RadialGrid,
    pub members: Vec<FamilyMember>,
    pub report: MultiplicityReport,
}

fn worst_det(checks: &[DetCheck]) -> DetCheck {
    let mut out = DetCheck {
        pass: checks.iter().all(|c| c.pass),
        max_det_discrepancy: 0.0,
        max_slope_discrepancy: 0.0,
    };
    for c in checks {
        out.max_det_discrepancy = out.max_det_discrepancy.max(c.max_det_discrepancy);
        out.max_slope_discrepancy = out.max_slope_discrepancy.max(c.max_slope_discrepancy);
    }
    out
}

/// Base plus `spec.members` flips: det and energy checks against `V`,
/// pairwise distinctness, and stationarity of every profile.
pub fn run_multiplicity_experiment(
    spec: &FamilySpec,
    cfg: &StationarityConfig,
) -> Result<MultiplicityRun> {
    let family = spec.build()?;
    let grid = RadialGrid::midpoint(if cfg.radial_cells > 0 {
        cfg.radial_cells
    } else {
        DEFAULT_CELLS
    })?;
    let members: Vec<FamilyMember> = (0..=spec.members)
        .map(|n| flip(&family, n))
        .collect::<Result<_>>()?;
    let base = &members[0].profile;
    let mut reports = Vec::with_capacity(members.len());
    let mut dets = Vec::new();
    let mut energies = Vec::new();
    let mut density = 0.0f64;
    for m in &members {
        let stationarity = verify_proposition(&m.profile, cfg)?;
        let (det_check, energy_check) = if m.index == 0 {
            (None, None)
        } else {
            (
                Some(check_same_det(&m.profile, base, &grid)?),
                Some(check_energy_equality(&m.profile, base, &grid)?),
            )
        };
        let energy = disk_integral(&energy_density_radial(&m.profile, &grid)?)?;
        if let Some(d) = &det_check {
            dets.push(d.clone());
        }
        if let Some(e) = &energy_check {
            density = density.max(e.max_density_discrepancy);
        }
        energies.push(energy);
        reports.push(MemberReport {
            index: m.index,
            name: m.profile.name().to_string(),
            flip_interval: m.flip_interval,
            energy,
            det_check,
            energy_check,
            stationarity,
        });
    }
    let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let rel = if e_max > 0.0 {
        (e_max - e_min) / e_max
    } else {
        0.0
    };
    let energy_check = EnergyCheck {
        pass: density <= TOL_DENSITY && rel <= TOL_ENERGY,
        max_density_discrepancy: density,
        max_relative_energy_discrepancy: rel,
        energies,
    };
    let det_check = worst_det(&dets);
    let points = separation_points(&family, &grid);
    let profiles: Vec<&RadialProfile> = members.iter().map(|m| &m.profile).collect();
    let (distinct, min_separation) = pairwise_distinct(&profiles, &points);
    let expected = (spec.members > 0).then(|| expected_separation(&family, spec.members));
    let ok = det_check.pass
        && energy_check.pass
        && distinct
        && reports.iter().all(|r| r.stationarity.passed());
    let report = MultiplicityReport {
        family: FamilySummary {
            radius: family.radius,
            depth: family.depth(),
            nodes: family.nodes().to_vec(),
        },
        seed: cfg.seed,
        det_check,
        energy_check,
        min_separation: if min_separation.is_finite() {
            min_separation
        } else {
            0.0
        },
        expected_separation: expected,
        distinct,
        members: reports,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    };
    Ok(MultiplicityRun {
        family,
        grid,
        members,
        report,
    })
}

/// Plot data `t, v, u_1 … u_m, k, density` on the run's grid.
pub fn write_plot_csv(run: &MultiplicityRun, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "v".to_string()];
    header.extend(run.members.iter().skip(1).map(|m| format!("u_{}", m.index)));
    header.extend(["k".to_string(), "density".to_string()]);
    w.write_record(&header)?;
    let base = &run.members[0].profile;
    let k = det_hessian_radial(base, &run.grid)?;
    let dens = energy_density_radial(base, &run.grid)?;
    let samples: Vec<Vec<f64>> = run
        .members
        .iter()
        .map(|m| m.profile.sample(&run.grid).map(|s| s.v))
        .collect::<Result<_>>()?;
    for (j, t) in run.grid.points().iter().enumerate() {
        let mut row = vec![format!("{t:.17e}")];
        row.extend(samples.iter().map(|s| format!("{:.17e}", s[j])));
        row.push(format!("{:.17e}", k.values()[j]));
        row.push(format!("{:.17e}", dens.values()[j]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment.
///
/// ```
/// use vklab::multiplicity::{parse_family_spec, Sequence};
/// let spec = parse_family_spec("R = 0.9\nsequence = custom\nt = [0.3, 0.5, 0.6, 0.7]\nmembers = 2").unwrap();
/// assert_eq!(spec.sequence, Sequence::Custom(vec![0.3, 0.5, 0.6, 0.7]));
/// assert_eq!(spec.build().unwrap().depth(), 4);
/// ```
pub fn parse_family_spec(text: &str) -> Result<FamilySpec> {
    let mut spec = FamilySpec::default();
    let mut kind: Option<String> = None;
    let mut t: Option<Vec<f64>> = None;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", line_no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: '{v}' is not a number", line_no + 1)))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: '{v}' is not a count", line_no + 1)))
        };
        match key {
            "R" => spec.radius = num(value)?,
            "sequence" => kind = Some(value.to_string()),
            "t" => {
                let inner = value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| {
                        Error::Parse(format!("line {}: t must be [a, b, ...]", line_no + 1))
                    })?;
                t = Some(
                    inner
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(num)
                        .collect::<Result<_>>()?,
                );
            }
            "N" => spec.depth = Some(int(value)?),
            "members" => spec.members = int(value)?,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: unknown key '{other}'",
                    line_no + 1
                )))
            }
        }
    }
    spec.sequence = match (kind.as_deref(), t) {
        (None | Some("geometric"), None) => Sequence::Geometric,
        (Some("geometric"), Some(_)) => {
            return Err(invalid("t given for a geometric sequence"));
        }
        (None | Some("custom"), Some(t)) => Sequence::Custom(t),
        (Some("custom"), None) => return Err(invalid("custom sequence without t")),
        (Some(other), _) => return Err(invalid(format!("unknown sequence '{other}'"))),
    };
    Ok(spec)
}

/// Reads and parses a family spec file.
pub fn read_family_spec(path: &Path) -> Result<FamilySpec> {
    parse_family_spec(&std::fs::read_to_string(path)?)
}

/// Renders a spec in the format read by [`parse_family_spec`].
pub fn format_family_spec(spec: &FamilySpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "R = {}", spec.radius);
    match &spec.sequence {
        Sequence::Geometric => {
            let _ = writeln!(s, "sequence = geometric");
        }
        Sequence::Custom(t) => {
            let list: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "sequence = custom\nt = [{}]", list.join(", "));
        }
    }
    if let Some(n) = spec.depth {
        let _ = writeln!(s, "N = {n}");
    }
    let _ = writeln!(s, "members = {}", spec.members);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_family() -> Family {
        FamilySpec::default().build().unwrap()
    }

    #[test]
    fn default_depth() {
        // (n+1)(n-2) log10 2 > 14 first holds at n = 8.
        assert_eq!(default_family().depth(), 8);
    }

    #[test]
    fn base_values() {
        let f = default_family();
        let v = f.base_profile();
        let (a, b) = f.interval(1);
        assert_eq!(v.jet(0.5 * (a + b))[0], (b - a) * eta(0.0));
        assert_eq!(v.jet(0.5 * (a + b))[0], 0.25);
        assert_eq!(v.jet(0.999), [0.0; 3]);
        assert_eq!(v.jet(1.0), [0.0; 3]);
        for &t in f.nodes() {
            assert!(v.jet(t)[1].abs() <= 1e-12);
        }
    }

    #[test]
    fn amplitude_law() {
        let f = default_family();
        let v = f.base_profile();
        for n in 0..f.depth() {
            let (a, b) = f.interval(n);
            let peak = v.jet(0.5 * (a + b))[0];
            assert!((peak - f.amplitude(n)).abs() <= 1e-12);
        }
    }

    #[test]
    fn flip_definition() {
        let f = default_family();
        let v = f.base_profile();
        let u = flip(&f, 1).unwrap().profile;
        for t in [0.1, 0.3, 0.6, 0.8] {
            let (x, y) = (u.jet(t)[0], v.jet(t)[0]);
            if (0.5..0.75).contains(&t) {
                assert_eq!(x + y, 0.0);
            } else {
                assert_eq!(x, y);
            }
        }
        assert!(matches!(flip(&f, 8), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn flipped_second_derivative_continuous() {
        let f = default_family();
        let u = flip(&f, 2).unwrap().profile;
        for &t in &f.nodes()[1..f.depth()] {
            let d = 1e-6;
            assert!((u.jet(t - d)[2] - u.jet(t + d)[2]).abs() <= 1e-10);
        }
    }

    #[test]
    fn det_checks() {
        let f = default_family();
        let g = RadialGrid::midpoint(DEFAULT_CELLS).unwrap();
        let v = f.base_profile();
        let u = flip(&f, 3).unwrap().profile;
        assert!(check_same_det(&u, &v, &g).unwrap().pass);
        assert!(check_same_det(&v.scaled(-1.0), &v, &g).unwrap().pass);
        let vc = v.clone();
        let shifted = RadialProfile::analytic("v + t", move |t| {
            let j = vc.jet(t);
            [j[0] + t, j[1] + 1.0, j[2]]
        });
        let c = check_same_det(&shifted, &v, &g).unwrap();
        assert!(!c.det_side() && !c.slope_side() && c.consistent());
    }

    #[test]
    fn energy_checks() {
        let f = default_family();
        let g = RadialGrid::midpoint(DEFAULT_CELLS).unwrap();
        let v = f.base_profile();
        let same = check_energy_equality(&v, &v, &g).unwrap();
        assert_eq!(same.max_density_discrepancy, 0.0);
        assert_eq!(same.max_relative_energy_discrepancy, 0.0);
        let double = v.scaled(2.0);
        assert!(matches!(
            check_energy_equality(&double, &v, &g),
            Err(Error::PreconditionNotVerified(_))
        ));
        let c = compare_energies(&double, &v, &g).unwrap();
        assert!(!c.pass);
        assert_relative_eq!(c.energies[0] / c.energies[1], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn separation() {
        let f = default_family();
        let g = RadialGrid::midpoint(DEFAULT_CELLS).unwrap();
        let pts = separation_points(&f, &g);
        let ms: Vec<RadialProfile> = (0..=5).map(|n| flip(&f, n).unwrap().profile).collect();
        let refs: Vec<&RadialProfile> = ms.iter().collect();
        let (ok, sep) = pairwise_distinct(&refs, &pts);
        assert!(ok);
        let expected = 2.0 * 2f64.powi(-6).powi(5) * ETA_MAX;
        assert!((sep - expected).abs() <= 1e-10);
        assert_eq!(expected_separation(&f, 5), expected);
        let (dup, zero) = pairwise_distinct(&[&ms[1], &ms[1]], &pts);
        assert!(!dup);
        assert_eq!(zero, 0.0);
        assert!(pairwise_distinct(&[&ms[1]], &pts).0);
    }

    #[test]
    fn spec_validation() {
        let bad = FamilySpec {
            sequence: Sequence::Custom(vec![0.3, 0.2, 0.5]),
            ..FamilySpec::default()
        };
        assert!(matches!(bad.build(), Err(Error::SpecInvalid(_))));
        let beyond = FamilySpec {
            radius: 0.5,
            sequence: Sequence::Custom(vec![0.1, 0.2, 0.6]),
            members: 1,
            depth: None,
        };
        assert!(matches!(beyond.build(), Err(Error::SpecInvalid(_))));
        let too_many = FamilySpec {
            members: 8,
            ..FamilySpec::default()
        };
        assert!(matches!(too_many.build(), Err(Error::SpecInvalid(_))));
        assert!(matches!(
            parse_family_spec("R = 1\nfoo = 2"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn spec_round_trip() {
        for spec in [
            FamilySpec::default(),
            FamilySpec {
                radius: 0.8,
                sequence: Sequence::Custom(vec![0.25, 0.5, 0.625, 0.75]),
                depth: Some(3),
                members: 1,
            },
        ] {
            assert_eq!(parse_family_spec(&format_family_spec(&spec)).unwrap(), spec);
        }
    }
}
