//! The smooth bump `η(s) = exp(1 - 1/(1 - 4 s²))` on `(-1/2, 1/2)` and its
//! closed-form derivatives.
//!
//! The bump is nonnegative, attains its maximum `η(0) = 1`, and every
//! derivative vanishes at `s = ±1/2`. Near the endpoints the exponential
//! underflows to exactly zero before the rational prefactors overflow, so the
//! formulas below are safe to evaluate on the whole real line.

use std::sync::OnceLock;

/// Half-width of the support of [`eta`].
pub const HALF_WIDTH: f64 = 0.5;

/// Maximum value of [`eta`], attained at `s = 0`.
pub const ETA_MAX: f64 = 1.0;

#[inline]
fn inside(s: f64) -> Option<f64> {
    let q = 1.0 - 4.0 * s * s;
    if q > 0.0 {
        Some(q)
    } else {
        None
    }
}

/// `η(s)`.
#[inline]
pub fn eta(s: f64) -> f64 {
    match inside(s) {
        Some(q) => (1.0 - 1.0 / q).exp(),
        None => 0.0,
    }
}

/// `(η, η′, η″)` at `s`, hand-differentiated.
///
/// With `q = 1 - 4s²` and `g = 1 - 1/q` we have `η = e^g`,
/// `g′ = -8s/q²`, `g″ = -8/q² - 128 s²/q³`, hence `η′ = η g′` and
/// `η″ = η (g′² + g″)`.
#[inline]
pub fn eta_with_derivatives(s: f64) -> [f64; 3] {
    let Some(q) = inside(s) else {
        return [0.0; 3];
    };
    let e = (1.0 - 1.0 / q).exp();
    if e == 0.0 {
        return [0.0; 3];
    }
    let q2 = q * q;
    let g1 = -8.0 * s / q2;
    let g2 = -8.0 / q2 - 128.0 * s * s / (q2 * q);
    [e, e * g1, e * (g1 * g1 + g2)]
}

const TABLE_INTERVALS: usize = 1024;
const SIMPSON_PANELS: usize = 32;

fn cumulative_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let ds = 1.0 / TABLE_INTERVALS as f64;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(TABLE_INTERVALS + 1);
        out.push(0.0);
        for i in 0..TABLE_INTERVALS {
            let a = -HALF_WIDTH + i as f64 * ds;
            let step = ds / SIMPSON_PANELS as f64;
            let mut sum = eta(a) + eta(a + ds);
            for k in 1..SIMPSON_PANELS {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * eta(a + k as f64 * step);
            }
            acc += sum * step / 3.0;
            out.push(acc);
        }
        out
    })
}

/// `∫_{-1/2}^{s} η(σ) dσ`.
///
/// Tabulated once with composite Simpson and read back through cubic
/// Hermite interpolation that uses `η` itself as the slope. Accurate to
/// roughly `1e-12`; only profile values depend on it, never the
/// derivatives that enter the pairings.
pub fn eta_integral(s: f64) -> f64 {
    let table = cumulative_table();
    if s <= -HALF_WIDTH {
        return 0.0;
    }
    if s >= HALF_WIDTH {
        return table[TABLE_INTERVALS];
    }
    let ds = 1.0 / TABLE_INTERVALS as f64;
    let x = (s + HALF_WIDTH) / ds;
    let i = (x.floor() as usize).min(TABLE_INTERVALS - 1);
    let u = x - i as f64;
    let s0 = -HALF_WIDTH + i as f64 * ds;
    let (p0, p1) = (table[i], table[i + 1]);
    let (m0, m1) = (eta(s0) * ds, eta(s0 + ds) * ds);
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * m1
}

/// Total mass `∫ η`.
pub fn eta_mass() -> f64 {
    cumulative_table()[TABLE_INTERVALS]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, s: f64, d: f64) -> (f64, f64) {
        let (fm, f0, fp) = (f(s - d), f(s), f(s + d));
        ((fp - fm) / (2.0 * d), (fp - 2.0 * f0 + fm) / (d * d))
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for k in 0..200 {
            let s = -0.49 + 0.98 * k as f64 / 199.0;
            let [_, d1, d2] = eta_with_derivatives(s);
            let (fd1, fd2) = central(eta, s, 1e-5);
            let scale = 1.0 + d1.abs();
            assert!((d1 - fd1).abs() <= 1e-7 * scale, "s={s} d1={d1} fd={fd1}");
            let (gd1, _) = central(|x| eta_with_derivatives(x)[1], s, 1e-6);
            assert!((d2 - gd1).abs() <= 1e-6 * (1.0 + d2.abs()), "s={s}");
            assert!((d2 - fd2).abs() <= 1e-3 * (1.0 + d2.abs()), "s={s}");
        }
    }

    #[test]
    fn support_and_peak() {
        assert_eq!(eta(0.0), ETA_MAX);
        assert_eq!(eta_with_derivatives(0.5), [0.0; 3]);
        assert_eq!(eta_with_derivatives(-0.5), [0.0; 3]);
        assert_eq!(eta(0.7), 0.0);
        assert!(eta(0.4999) >= 0.0);
        let [v, d1, d2] = eta_with_derivatives(0.5 - 1e-6);
        assert!(v.abs() < 1e-100 && d1.abs() < 1e-100 && d2.abs() < 1e-100);
    }

    #[test]
    fn integral_is_monotone_and_consistent() {
        // Reference mass via a much finer Simpson sum.
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w * eta(-0.5 + k as f64 * h);
        }
        let reference = sum * h / 3.0;
        assert!((eta_mass() - reference).abs() < 1e-13);
        let mut prev = 0.0;
        for k in 0..=1000 {
            let s = -0.5 + k as f64 / 1000.0;
            let v = eta_integral(s);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        // Derivative of the antiderivative is the bump.
        for s in [-0.3, -0.1, 0.0, 0.17, 0.41] {
            let d = 1e-5;
            let fd = (eta_integral(s + d) - eta_integral(s - d)) / (2.0 * d);
            assert!((fd - eta(s)).abs() < 1e-7);
        }
    }
}
