use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Minimum number of lattice nodes across the diameter of the unit disk.
pub const MIN_NODES_ACROSS: usize = 64;

/// Closed radial band `inner ≤ |x| ≤ outer` selecting the valid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub inner: f64,
    pub outer: f64,
}

impl Band {
    pub fn disk(radius: f64) -> Self {
        Self {
            inner: 0.0,
            outer: radius,
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.inner && r <= self.outer
    }

    /// Removes `by` from both sides; a band touching the origin keeps its
    /// inner radius at zero.
    pub fn shrink(&self, by: f64) -> Self {
        Self {
            inner: if self.inner > 0.0 {
                self.inner + by
            } else {
                0.0
            },
            outer: self.outer - by,
        }
    }

    pub fn intersect(&self, other: &Band) -> Self {
        Self {
            inner: self.inner.max(other.inner),
            outer: self.outer.min(other.outer),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn centered(cx: f64, cy: f64, half: f64) -> Self {
        Self {
            x0: cx - half,
            x1: cx + half,
            y0: cy - half,
            y1: cy + half,
        }
    }

    pub fn pad(&self, by: f64) -> Self {
        Self {
            x0: self.x0 - by,
            x1: self.x1 + by,
            y0: self.y0 - by,
            y1: self.y1 + by,
        }
    }

    pub fn union(&self, o: &Rect) -> Self {
        Self {
            x0: self.x0.min(o.x0),
            x1: self.x1.max(o.x1),
            y0: self.y0.min(o.y0),
            y1: self.y1.max(o.y1),
        }
    }

    /// Intersection; may be degenerate (`x0 > x1`), in which case it
    /// contains no point.
    pub fn intersect(&self, o: &Rect) -> Self {
        Self {
            x0: self.x0.max(o.x0),
            x1: self.x1.min(o.x1),
            y0: self.y0.max(o.y0),
            y1: self.y1.min(o.y1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Bounding box of the image under `(x, y) ↦ (x c - y s, x s + y c)`.
    pub fn rotated_bounds(&self, c: f64, s: f64) -> Self {
        let pts = self.corners().map(|(x, y)| (x * c - y * s, x * s + y * c));
        let mut r = Self {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in pts {
            r.x0 = r.x0.min(x);
            r.x1 = r.x1.max(x);
            r.y0 = r.y0.min(y);
            r.y1 = r.y1.max(y);
        }
        r
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x1, self.y0),
            (self.x1, self.y1),
            (self.x0, self.y1),
        ]
    }

    /// Distance from the origin to the nearest point of the rectangle.
    pub fn min_radius(&self) -> f64 {
        let dx = if self.x0 > 0.0 {
            self.x0
        } else if self.x1 < 0.0 {
            -self.x1
        } else {
            0.0
        };
        let dy = if self.y0 > 0.0 {
            self.y0
        } else if self.y1 < 0.0 {
            -self.y1
        } else {
            0.0
        };
        dx.hypot(dy)
    }

    /// Distance from the origin to the farthest corner.
    pub fn max_radius(&self) -> f64 {
        self.corners()
            .iter()
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Segment {
    pub i0: i64,
    pub i1: i64,
    pub offset: usize,
}

#[derive(Debug)]
struct Layout {
    per_unit: usize,
    h: f64,
    band: Band,
    jmax: i64,
    rows: Vec<Vec<Segment>>,
    len: usize,
}

/// The lattice `h ℤ²` with `h = 1 / per_unit`, restricted to a radial band.
///
/// Validity of a node depends only on its radius, so every mask is
/// rotation-invariant. Storage is row-major (`y` ascending, then `x`
/// ascending) and only valid nodes are stored.
#[derive(Clone)]
pub struct Grid2D(Arc<Layout>);

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("per_unit", &self.0.per_unit)
            .field("band", &self.0.band)
            .field("len", &self.0.len)
            .finish()
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.per_unit == other.0.per_unit && self.0.band == other.0.band)
    }
}

impl Grid2D {
    /// Lattice with spacing `1/per_unit` on the band.
    pub fn new(per_unit: usize, band: Band) -> Result<Self> {
        if per_unit == 0 {
            return Err(Error::InvalidArgument("grid needs per_unit ≥ 1".into()));
        }
        if !(band.inner >= 0.0 && band.outer > band.inner && band.outer <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid band [{}, {}]",
                band.inner, band.outer
            )));
        }
        let h = 1.0 / per_unit as f64;
        let jmax = (band.outer / h).floor() as i64 + 1;
        let mut rows = Vec::with_capacity(2 * jmax as usize + 1);
        let mut len = 0usize;
        for j in -jmax..=jmax {
            let mut segs: Vec<Segment> = Vec::new();
            let mut open: Option<i64> = None;
            for i in -jmax..=jmax + 1 {
                let valid = i <= jmax && band.contains(radius(i, j, h));
                match (valid, open) {
                    (true, None) => open = Some(i),
                    (false, Some(i0)) => {
                        let i1 = i - 1;
                        segs.push(Segment {
                            i0,
                            i1,
                            offset: len,
                        });
                        len += (i1 - i0 + 1) as usize;
                        open = None;
                    }
                    _ => {}
                }
            }
            rows.push(segs);
        }
        Ok(Self(Arc::new(Layout {
            per_unit,
            h,
            band,
            jmax,
            rows,
            len,
        })))
    }

    /// Disk grid `|x| ≤ 1 - margin`; the margin must leave room for the
    /// finite-difference stencil (`margin ≥ 2h`).
    pub fn disk(per_unit: usize, margin: f64) -> Result<Self> {
        let h = 1.0 / per_unit.max(1) as f64;
        if !(margin >= 2.0 * h && margin < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "margin {margin} must lie in [2h, 1) with h = {h}"
            )));
        }
        Self::new(per_unit, Band::disk(1.0 - margin))
    }

    pub fn per_unit(&self) -> usize {
        self.0.per_unit
    }

    pub fn spacing(&self) -> f64 {
        self.0.h
    }

    pub fn band(&self) -> Band {
        self.0.band
    }

    /// Lattice nodes across the diameter of the unit disk.
    pub fn nodes_across(&self) -> usize {
        2 * self.0.per_unit + 1
    }

    pub fn len(&self) -> usize {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    pub fn same_lattice(&self, other: &Grid2D) -> bool {
        self.0.per_unit == other.0.per_unit
    }

    /// The same lattice on `band`.
    pub fn with_band(&self, band: Band) -> Result<Self> {
        if band == self.0.band {
            return Ok(self.clone());
        }
        Self::new(self.0.per_unit, band)
    }

    pub fn shrink(&self, by: f64) -> Result<Self> {
        self.with_band(self.0.band.shrink(by))
    }

    /// Largest `|i|` or `|j|` a stored row may reach.
    pub(crate) fn half_extent(&self) -> i64 {
        self.0.jmax
    }

    pub(crate) fn rows(&self) -> impl Iterator<Item = (i64, &[Segment])> {
        let jmax = self.0.jmax;
        self.0
            .rows
            .iter()
            .enumerate()
            .map(move |(r, s)| (r as i64 - jmax, s.as_slice()))
    }

    pub(crate) fn row(&self, j: i64) -> &[Segment] {
        let r = j + self.0.jmax;
        if r < 0 || r as usize >= self.0.rows.len() {
            &[]
        } else {
            &self.0.rows[r as usize]
        }
    }

    /// Storage index of node `(i, j)` if it is valid.
    #[inline]
    pub fn index(&self, i: i64, j: i64) -> Option<usize> {
        self.row(j)
            .iter()
            .find(|s| i >= s.i0 && i <= s.i1)
            .map(|s| s.offset + (i - s.i0) as usize)
    }

    /// Valid nodes `(index, i, j)` in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        self.rows().flat_map(|(j, segs)| {
            segs.iter().flat_map(move |s| {
                (s.i0..=s.i1).map(move |i| (s.offset + (i - s.i0) as usize, i, j))
            })
        })
    }

    #[inline]
    pub fn coords(&self, i: i64, j: i64) -> (f64, f64) {
        (i as f64 * self.0.h, j as f64 * self.0.h)
    }

    /// Area covered by the valid nodes, `len · h²`.
    pub fn covered_area(&self) -> f64 {
        self.0.len as f64 * self.0.h * self.0.h
    }
}

#[inline]
pub(crate) fn radius(i: i64, j: i64, h: f64) -> f64 {
    (((i * i + j * j) as f64).sqrt()) * h
}
