use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::field::{RotationAngle, ScalarField2D, Sym2, SymMatrixField2D};
use super::grid::{Grid2D, Rect};
use crate::error::{Error, Result};

/// Band shrink of the finite-difference Hessian, in units of `h`.
pub const FD_REACH: f64 = 1.5;
/// Band shrink of rotation and averaging, in units of `h`. The cubic
/// stencil reaches `2√2 h` from the sample point.
pub const INTERP_REACH: f64 = 3.0;

const MAX_CHANNELS: usize = 12;
const TILE: i64 = 16;

/// Coordinates and lattice indices of a target node.
type Target = (f64, f64, i64, i64);

/// Second-order central-difference Hessian. The result lives on the band
/// shrunk by `1.5 h`, so every stencil stays on valid nodes.
pub fn hessian_fd(f: &ScalarField2D) -> Result<SymMatrixField2D> {
    let src = f.grid();
    let h = src.spacing();
    let out = src.shrink(FD_REACH * h)?;
    let v = f.values();
    let (ih2, iq) = (1.0 / (h * h), 0.25 / (h * h));
    let mut vals = Vec::with_capacity(out.len());
    for (_, i, j) in out.nodes() {
        let c = src.index(i - 1, j).expect("stencil inside band");
        let dn = src.index(i - 1, j - 1).expect("stencil inside band");
        let up = src.index(i - 1, j + 1).expect("stencil inside band");
        let f0 = v[c + 1];
        let fxx = (v[c + 2] - 2.0 * f0 + v[c]) * ih2;
        let fyy = (v[up + 1] - 2.0 * f0 + v[dn + 1]) * ih2;
        let fxy = (v[up + 2] - v[dn + 2] - v[up] + v[dn]) * iq;
        vals.push(Sym2::new(fxx, fxy, fyy));
    }
    Ok(SymMatrixField2D::new(out, vals)?.with_support(f.support().map(|s| s.pad(h))))
}

#[inline]
fn cubic_weights(a: f64) -> [f64; 4] {
    let (am1, am2, ap1) = (a - 1.0, a - 2.0, a + 1.0);
    [
        -a * am1 * am2 / 6.0,
        ap1 * am1 * am2 / 2.0,
        -ap1 * a * am2 / 2.0,
        ap1 * a * am1 / 6.0,
    ]
}

/// Tensor cubic Lagrange interpolation of `N` channels sharing a grid.
/// Channels are interleaved per node and node lookup goes through a dense
/// table over the bounding box, so a stencil row is one contiguous load.
struct Sampler<const N: usize> {
    data: Vec<[f64; N]>,
    lookup: Vec<u32>,
    ext: i64,
    width: i64,
    inv_h: f64,
}

impl<const N: usize> Sampler<N> {
    fn new(grid: &Grid2D, chans: &[&[f64]]) -> Self {
        debug_assert_eq!(chans.len(), N);
        let mut data = vec![[0.0; N]; grid.len()];
        for (c, ch) in chans.iter().enumerate() {
            for (d, v) in data.iter_mut().zip(ch.iter()) {
                d[c] = *v;
            }
        }
        let ext = grid.half_extent();
        let width = 2 * ext + 1;
        let mut lookup = vec![u32::MAX; (width * width) as usize];
        for (k, i, j) in grid.nodes() {
            lookup[((j + ext) * width + i + ext) as usize] = k as u32;
        }
        Self {
            data,
            lookup,
            ext,
            width,
            inv_h: 1.0 / grid.spacing(),
        }
    }

    #[inline]
    fn sample(&self, x: f64, y: f64) -> [f64; N] {
        let (u, w) = (x * self.inv_h, y * self.inv_h);
        let (fu, fw) = (u.floor(), w.floor());
        let wx = cubic_weights(u - fu);
        let wy = cubic_weights(w - fw);
        let (i0, j0) = (fu as i64 - 1 + self.ext, fw as i64 - 1 + self.ext);
        let mut out = [0.0; N];
        for (r, wr) in wy.iter().enumerate() {
            let base = self.lookup[((j0 + r as i64) * self.width + i0) as usize];
            assert!(base != u32::MAX, "interpolation stencil inside band");
            let s = &self.data[base as usize..base as usize + 4];
            for c in 0..N {
                out[c] +=
                    wr * (wx[0] * s[0][c] + wx[1] * s[1][c] + wx[2] * s[2][c] + wx[3] * s[3][c]);
            }
        }
        out
    }
}

/// `f ∘ ρ_φ`, with `ρ_φ(x, y) = (x cos φ - y sin φ, x sin φ + y cos φ)`.
/// The result lives on the band shrunk by `3 h`; `φ = 0` returns `f`.
pub fn rotate_pullback_scalar(f: &ScalarField2D, phi: RotationAngle) -> Result<ScalarField2D> {
    if phi.radians() == 0.0 {
        return Ok(f.clone());
    }
    let (s, c) = phi.radians().sin_cos();
    let src = f.grid();
    let out = src.shrink(INTERP_REACH * src.spacing())?;
    let sampler = Sampler::<1>::new(src, &[f.values()]);
    let vals = out
        .nodes()
        .map(|(_, i, j)| {
            let (x, y) = out.coords(i, j);
            sampler.sample(x * c - y * s, x * s + y * c)[0]
        })
        .collect();
    Ok(ScalarField2D::new(out, vals)?.with_support(f.support().map(|r| r.rotated_bounds(c, -s))))
}

/// `ρ_φ* F = Rᵀ (F ∘ ρ_φ) R` with `R` the rotation by `φ`.
pub fn rotate_pullback_matrix(
    f: &SymMatrixField2D,
    phi: RotationAngle,
) -> Result<SymMatrixField2D> {
    if phi.radians() == 0.0 {
        return Ok(f.clone());
    }
    let (s, c) = phi.radians().sin_cos();
    let src = f.grid();
    let out = src.shrink(INTERP_REACH * src.spacing())?;
    let (xx, xy, yy) = split(f.values());
    let sampler = Sampler::<3>::new(src, &[xx.as_slice(), xy.as_slice(), yy.as_slice()]);
    let vals = out
        .nodes()
        .map(|(_, i, j)| {
            let (x, y) = out.coords(i, j);
            let [a, b, d] = sampler.sample(x * c - y * s, x * s + y * c);
            Sym2::new(a, b, d).conjugate(c, s)
        })
        .collect();
    Ok(
        SymMatrixField2D::new(out, vals)?
            .with_support(f.support().map(|r| r.rotated_bounds(c, -s))),
    )
}

fn split(m: &[Sym2]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        m.iter().map(|a| a.xx).collect(),
        m.iter().map(|a| a.xy).collect(),
        m.iter().map(|a| a.yy).collect(),
    )
}

/// `f̄ = (1/M) Σ_m f ∘ ρ_{2πm/M}`.
pub fn angular_average_scalar(f: &ScalarField2D, m: usize) -> Result<ScalarField2D> {
    let (mut s, _) = angular_average_many(&[f], &[], m)?;
    Ok(s.remove(0))
}

/// `⟨F⟩ = (1/M) Σ_m ρ*_{2πm/M} F`.
pub fn angular_average_matrix(f: &SymMatrixField2D, m: usize) -> Result<SymMatrixField2D> {
    let (_, mut a) = angular_average_many(&[], &[f], m)?;
    Ok(a.remove(0))
}

/// Averages several fields on one grid in a single pass, sharing the
/// rotation and interpolation work.
///
/// Results are deterministic: every node sums its samples in increasing
/// `m`. When all inputs carry a support rectangle, samples landing
/// outside it are skipped; they are exact zeros, so the sums are unchanged.
/// For `M` divisible by four the quarter-turn symmetry of the average is
/// used to evaluate one quadrant only.
pub fn angular_average_many(
    scalars: &[&ScalarField2D],
    matrices: &[&SymMatrixField2D],
    m: usize,
) -> Result<(Vec<ScalarField2D>, Vec<SymMatrixField2D>)> {
    if m == 0 {
        return Err(Error::InvalidArgument("angular average needs M ≥ 1".into()));
    }
    let grid = scalars
        .first()
        .map(|f| f.grid())
        .or_else(|| matrices.first().map(|f| f.grid()))
        .ok_or_else(|| Error::InvalidArgument("nothing to average".into()))?;
    let grids = scalars
        .iter()
        .map(|f| f.grid())
        .chain(matrices.iter().map(|f| f.grid()));
    for g in grids {
        if g != grid {
            return Err(Error::GridMismatch(
                "averaged fields must share a grid".into(),
            ));
        }
    }
    let n = scalars.len() + 3 * matrices.len();
    if n > MAX_CHANNELS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_CHANNELS} channels per pass, got {n}"
        )));
    }
    let supports: Vec<Option<Rect>> = scalars
        .iter()
        .map(|f| f.support())
        .chain(matrices.iter().map(|f| f.support()))
        .collect();
    let support = supports
        .iter()
        .copied()
        .reduce(|a, b| match (a, b) {
            (Some(p), Some(q)) => Some(p.union(&q)),
            _ => None,
        })
        .flatten();

    let mut owned: Vec<Vec<f64>> = Vec::new();
    for a in matrices {
        let (xx, xy, yy) = split(a.values());
        owned.extend([xx, xy, yy]);
    }
    let mut chans: Vec<&[f64]> = scalars.iter().map(|f| f.values()).collect();
    chans.extend(owned.iter().map(|v| v.as_slice()));
    let matrix_at: Vec<usize> = (0..matrices.len()).map(|k| scalars.len() + 3 * k).collect();

    macro_rules! dispatch {
        ($($k:literal)*) => {
            match n {
                $($k => average_kernel::<$k>(grid, &chans, &matrix_at, m, support)?,)*
                _ => unreachable!("channel count checked above"),
            }
        };
    }
    let (out, vals) = dispatch!(1 2 3 4 5 6 7 8 9 10 11 12);
    let mut vals = vals.into_iter();
    let mut s_out = Vec::with_capacity(scalars.len());
    for _ in scalars {
        s_out.push(ScalarField2D::new(
            out.clone(),
            vals.next().expect("channel"),
        )?);
    }
    let mut m_out = Vec::with_capacity(matrices.len());
    for _ in matrices {
        let (xx, xy, yy) = (
            vals.next().expect("channel"),
            vals.next().expect("channel"),
            vals.next().expect("channel"),
        );
        let v = xx
            .into_iter()
            .zip(xy)
            .zip(yy)
            .map(|((a, b), d)| Sym2::new(a, b, d))
            .collect();
        m_out.push(SymMatrixField2D::new(out.clone(), v)?);
    }
    Ok((s_out, m_out))
}

/// Angular window of a support rectangle as seen from the origin.
struct Window {
    rect: Rect,
    r_min: f64,
    r_max: f64,
    /// `(centre angle, lowest offset, highest offset)`, absent when the
    /// rectangle contains the origin.
    arc: Option<(f64, f64, f64)>,
}

impl Window {
    fn new(rect: Rect) -> Self {
        let r_min = rect.min_radius();
        let arc = (r_min > 0.0).then(|| {
            let (cx, cy) = rect.center();
            let gamma = cy.atan2(cx);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (x, y) in rect.corners() {
                let mut d = y.atan2(x) - gamma;
                if d > PI {
                    d -= TAU;
                } else if d < -PI {
                    d += TAU;
                }
                lo = lo.min(d);
                hi = hi.max(d);
            }
            (gamma, lo, hi)
        });
        Self {
            rect,
            r_min,
            r_max: rect.max_radius(),
            arc,
        }
    }

    /// Sample indices whose rotated image of `(x, y)` may touch the
    /// rectangle, as at most two ascending ranges.
    fn ranges(&self, x: f64, y: f64, m: usize) -> [(usize, usize); 2] {
        let r = x.hypot(y);
        if r < self.r_min || r > self.r_max || self.rect.is_empty() {
            return [(0, 0), (0, 0)];
        }
        let Some((gamma, lo, hi)) = self.arc else {
            return [(0, m), (0, 0)];
        };
        let theta = y.atan2(x);
        let dphi = TAU / m as f64;
        let first = ((gamma + lo - theta) / dphi).floor() as i64 - 1;
        let last = ((gamma + hi - theta) / dphi).ceil() as i64 + 1;
        let count = (last - first + 1) as usize;
        if count >= m {
            return [(0, m), (0, 0)];
        }
        let start = first.rem_euclid(m as i64) as usize;
        if start + count <= m {
            [(start, start + count), (0, 0)]
        } else {
            [(0, start + count - m), (start, m)]
        }
    }
}

fn average_kernel<const N: usize>(
    grid: &Grid2D,
    chans: &[&[f64]],
    matrix_at: &[usize],
    m: usize,
    support: Option<Rect>,
) -> Result<(Grid2D, Vec<Vec<f64>>)> {
    let h = grid.spacing();
    let out = grid.shrink(INTERP_REACH * h)?;
    let trig: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let (s, c) = (TAU * k as f64 / m as f64).sin_cos();
            (c, s)
        })
        .collect();
    let window = support.map(|r| Window::new(r.pad(2.5 * h)));
    let sampler = Sampler::<N>::new(grid, chans);
    let inv_m = 1.0 / m as f64;
    let quarter = m.is_multiple_of(4);

    let add_sample = |x: f64, y: f64, (c, s): (f64, f64), acc: &mut [f64; N]| {
        let mut buf = sampler.sample(x * c - y * s, x * s + y * c);
        for &k in matrix_at {
            let q = Sym2::new(buf[k], buf[k + 1], buf[k + 2]).conjugate(c, s);
            buf[k] = q.xx;
            buf[k + 1] = q.xy;
            buf[k + 2] = q.yy;
        }
        for c in 0..N {
            acc[c] += buf[c];
        }
    };

    // Targets are processed in square tiles with the angle loop outside:
    // a rotated tile reads one compact patch of the source, which stays in
    // cache for all of its samples. Every node still sums its samples in
    // increasing `m`.
    let mut tiles: BTreeMap<(i64, i64), Vec<Target>> = BTreeMap::new();
    for (_, i, j) in out.nodes() {
        if quarter && !((i > 0 && j >= 0) || (i == 0 && j == 0)) {
            continue;
        }
        let (x, y) = out.coords(i, j);
        tiles
            .entry((i.div_euclid(TILE), j.div_euclid(TILE)))
            .or_default()
            .push((x, y, i, j));
    }
    let rows: Vec<Vec<(f64, f64, i64, i64)>> = tiles.into_values().collect();
    let results: Vec<Vec<[f64; N]>> = rows
        .par_iter()
        .map(|row| {
            let mut acc = vec![[0.0; N]; row.len()];
            match &window {
                None => {
                    for &cs in &trig {
                        for (k, &(x, y, _, _)) in row.iter().enumerate() {
                            add_sample(x, y, cs, &mut acc[k]);
                        }
                    }
                }
                Some(w) => {
                    for (k, &(x, y, _, _)) in row.iter().enumerate() {
                        for (a, b) in w.ranges(x, y, m) {
                            for &cs in &trig[a..b] {
                                add_sample(x, y, cs, &mut acc[k]);
                            }
                        }
                    }
                }
            }
            for a in acc.iter_mut().flatten() {
                *a *= inv_m;
            }
            acc
        })
        .collect();

    let mut vals = vec![vec![0.0; out.len()]; N];
    for (row, acc) in rows.iter().zip(&results) {
        for (k, &(_, _, i, j)) in row.iter().enumerate() {
            let mut v = acc[k];
            let turns = if !quarter || (i == 0 && j == 0) { 1 } else { 4 };
            let mut node = (i, j);
            for _ in 0..turns {
                let idx = out.index(node.0, node.1).expect("rotated node is valid");
                for c in 0..N {
                    vals[c][idx] = v[c];
                }
                for &q in matrix_at {
                    let (a, b, d) = (v[q], v[q + 1], v[q + 2]);
                    v[q] = d;
                    v[q + 1] = -b;
                    v[q + 2] = a;
                }
                node = (-node.1, node.0);
            }
        }
    }
    Ok((out, vals))
}
