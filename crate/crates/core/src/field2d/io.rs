use std::io::{Read, Write};

use super::field::ScalarField2D;
use super::grid::{radius, Band, Grid2D};
use crate::error::{Error, Result};

/// `x,y,value`, one row per valid node in storage order.
pub fn write_field_csv<W: Write>(f: &ScalarField2D, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value"])?;
    let g = f.grid();
    for (k, i, j) in g.nodes() {
        let (x, y) = g.coords(i, j);
        w.write_record([
            format!("{x:.16e}"),
            format!("{y:.16e}"),
            format!("{:.16e}", f.values()[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Two little-endian `u32` dimensions `(nx, ny)`, then `nx · ny`
/// little-endian `f64` values in row-major order (`y` outer, ascending)
/// covering the whole box `[-1, 1]²`. Masked nodes hold NaN.
pub fn write_field_binary<W: Write>(f: &ScalarField2D, mut out: W) -> Result<()> {
    let g = f.grid();
    let k = g.per_unit() as i64;
    let n = (2 * k + 1) as u32;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&n.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (n as usize) * (n as usize));
    for j in -k..=k {
        for i in -k..=k {
            let v = f.value_at(i, j).unwrap_or(f64::NAN);
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_field_binary`]. The band is recovered from the
/// radii of the finite entries and must reproduce the mask exactly.
pub fn read_field_binary<R: Read>(mut input: R) -> Result<ScalarField2D> {
    let mut head = [0u8; 8];
    input.read_exact(&mut head)?;
    let nx = u32::from_le_bytes(head[..4].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(head[4..].try_into().expect("4 bytes")) as usize;
    if nx != ny || nx.is_multiple_of(2) || nx < 3 {
        return Err(Error::Parse(format!(
            "unsupported dump dimensions {nx} × {ny}"
        )));
    }
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 8 * nx * ny {
        return Err(Error::Parse(format!(
            "expected {} payload bytes, found {}",
            8 * nx * ny,
            body.len()
        )));
    }
    let k = (nx / 2) as i64;
    let h = 1.0 / k as f64;
    let at = |i: i64, j: i64| {
        let p = 8 * ((j + k) as usize * nx + (i + k) as usize);
        f64::from_le_bytes(body[p..p + 8].try_into().expect("8 bytes"))
    };
    let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in -k..=k {
        for i in -k..=k {
            if !at(i, j).is_nan() {
                let r = radius(i, j, h);
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
        }
    }
    if rmax < rmin {
        return Err(Error::Parse("dump holds no valid node".into()));
    }
    let grid = Grid2D::new(
        k as usize,
        Band {
            inner: rmin,
            outer: rmax,
        },
    )?;
    let mut values = Vec::with_capacity(grid.len());
    let mut finite = 0usize;
    for j in -k..=k {
        for i in -k..=k {
            let v = at(i, j);
            match (grid.index(i, j), v.is_nan()) {
                (Some(_), false) => values.push(v),
                (None, true) => {}
                _ => {
                    return Err(Error::Parse(format!(
                        "mask is not a radial band at ({i}, {j})"
                    )))
                }
            }
            finite += usize::from(!v.is_nan());
        }
    }
    debug_assert_eq!(finite, grid.len());
    ScalarField2D::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = Grid2D::new(
            32,
            Band {
                inner: 0.2,
                outer: 0.9,
            },
        )
        .unwrap();
        let f = ScalarField2D::from_fn(&g, |x, y| x.sin() * y + 1.0);
        let mut buf = Vec::new();
        write_field_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 8 * 65 * 65);
        let back = read_field_binary(buf.as_slice()).unwrap();
        assert_eq!(back.grid().len(), g.len());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn csv_layout() {
        let g = Grid2D::disk(32, 0.1).unwrap();
        let f = ScalarField2D::from_fn(&g, |x, _| x);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        assert_eq!(text.lines().count(), g.len() + 1);
    }

    #[test]
    fn rejects_truncated_dump() {
        let mut buf = Vec::new();
        buf.extend_from_slice(&5u32.to_le_bytes());
        buf.extend_from_slice(&5u32.to_le_bytes());
        buf.extend_from_slice(&[0u8; 16]);
        assert!(matches!(
            read_field_binary(buf.as_slice()),
            Err(Error::Parse(_))
        ));
    }
}
