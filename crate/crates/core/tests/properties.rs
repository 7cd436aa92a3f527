use std::sync::OnceLock;

use proptest::prelude::*;
use vklab::bump::{eta, eta_with_derivatives};
use vklab::field2d::{
    angular_average_scalar, rotate_pullback_matrix, rotate_pullback_scalar, Grid2D, RotationAngle,
    ScalarField2D, Sym2, SymMatrixField2D,
};
use vklab::multiplicity::{check_same_det, compare_energies, Family, FamilySpec};
use vklab::radial::{det_hessian_radial, energy, energy_density_radial, RadialGrid, RadialProfile};

fn family() -> &'static Family {
    static F: OnceLock<Family> = OnceLock::new();
    F.get_or_init(|| FamilySpec::default().build().unwrap())
}

fn grid() -> &'static RadialGrid {
    static G: OnceLock<RadialGrid> = OnceLock::new();
    G.get_or_init(|| RadialGrid::midpoint(1024).unwrap())
}

fn sym2() -> impl Strategy<Value = Sym2> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b, d)| Sym2::new(a, b, d))
}

proptest! {
    #[test]
    fn cofactor_is_linearized_det(a in sym2(), b in sym2()) {
        let sum = Sym2::new(a.xx + b.xx, a.xy + b.xy, a.yy + b.yy);
        let expand = a.det() + a.cof().frob(&b) + b.det();
        prop_assert!((sum.det() - expand).abs() <= 1e-10 * (1.0 + expand.abs()));
        prop_assert!((a.cof().frob(&a) - 2.0 * a.det()).abs() <= 1e-10 * (1.0 + a.det().abs()));
    }

    #[test]
    fn conjugation_preserves_invariants(a in sym2(), phi in -7.0..7.0f64) {
        let r = a.conjugate(phi.cos(), phi.sin());
        prop_assert!((r.det() - a.det()).abs() <= 1e-10 * (1.0 + a.det().abs()));
        prop_assert!((r.trace() - a.trace()).abs() <= 1e-12 * (1.0 + a.trace().abs()));
        prop_assert!((r.norm_sq() - a.norm_sq()).abs() <= 1e-10 * (1.0 + a.norm_sq()));
        prop_assert!((r.cof().frob(&r) - a.cof().frob(&a)).abs() <= 1e-9 * (1.0 + a.norm_sq()));
    }

    #[test]
    fn bump_is_even(s in -0.6..0.6f64) {
        let [a0, a1, a2] = eta_with_derivatives(s);
        let [b0, b1, b2] = eta_with_derivatives(-s);
        prop_assert_eq!(a0, b0);
        prop_assert_eq!(a1, -b1);
        prop_assert_eq!(a2, b2);
        prop_assert!(eta(s) >= 0.0 && eta(s) <= 1.0);
    }

    #[test]
    fn sign_patterns_preserve_det_and_density(mask in prop::collection::vec(any::<bool>(), 8)) {
        let f = family();
        let signs: Vec<f64> = mask.iter().map(|&m| if m { -1.0 } else { 1.0 }).collect();
        let u = f.signed_profile("u", &signs);
        let v = f.base_profile();
        let d = check_same_det(&u, &v, grid()).unwrap();
        prop_assert!(d.pass && d.max_det_discrepancy <= 1e-10 && d.max_slope_discrepancy <= 1e-12);
        let e = compare_energies(&u, &v, grid()).unwrap();
        prop_assert!(e.pass);
    }

    #[test]
    fn energy_is_quadratic(a in -4.0..4.0f64) {
        let q = RadialProfile::quartic();
        let e = energy(&q, grid()).unwrap();
        let ea = energy(&q.scaled(a), grid()).unwrap();
        prop_assert!((ea - a * a * e).abs() <= 1e-12 * (1.0 + ea));
    }

    #[test]
    fn det_is_quadratic(a in -4.0..4.0f64) {
        let v = family().base_profile();
        let k = det_hessian_radial(&v, grid()).unwrap();
        let ka = det_hessian_radial(&v.scaled(a), grid()).unwrap();
        for (x, y) in k.values().iter().zip(ka.values()) {
            prop_assert!((y - a * a * x).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}

fn lattice() -> &'static Grid2D {
    static G: OnceLock<Grid2D> = OnceLock::new();
    G.get_or_init(|| Grid2D::disk(64, 0.05).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quarter_turns_are_exact(a in -2.0..2.0f64, b in -2.0..2.0f64, k in 1u32..4) {
        let g = lattice();
        let f = ScalarField2D::from_fn(g, move |x, y| a * x * x + b * x * y + y);
        let phi = k as f64 * std::f64::consts::FRAC_PI_2;
        let r = rotate_pullback_scalar(&f, RotationAngle::new(phi)).unwrap();
        let (c, s) = (phi.cos(), phi.sin());
        let expect = ScalarField2D::from_fn(g, move |x, y| {
            let (u, w) = (c * x - s * y, s * x + c * y);
            a * u * u + b * u * w + w
        });
        prop_assert!(r.max_abs_diff(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn averages_are_rotation_invariant(a in -2.0..2.0f64, phi in 0.0..6.3f64) {
        let g = lattice();
        let f = ScalarField2D::from_fn(g, move |x, y| a * x * x * y + x - 0.5 * y * y);
        let avg = angular_average_scalar(&f, 64).unwrap();
        let rot = rotate_pullback_scalar(&avg, RotationAngle::new(phi)).unwrap();
        prop_assert!(rot.max_abs_diff(&avg).unwrap() <= 1e-6);
    }

    #[test]
    fn matrix_pullback_of_constant_conjugates(m in sym2(), phi in 0.0..6.3f64) {
        let g = lattice();
        let field = SymMatrixField2D::constant(g, m);
        let r = rotate_pullback_matrix(&field, RotationAngle::new(phi)).unwrap();
        let expect = m.conjugate(phi.cos(), phi.sin());
        for v in r.values() {
            prop_assert!(v.sub(&expect).norm_sq().sqrt() <= 1e-12 * (1.0 + m.norm_sq()));
        }
    }
}

#[test]
fn energy_density_is_sign_blind() {
    let f = family();
    let v = f.base_profile();
    let u = f.signed_profile("u", &f.signs(&[0, 2, 5]));
    assert_eq!(
        energy_density_radial(&u, grid()).unwrap().values(),
        energy_density_radial(&v, grid()).unwrap().values()
    );
}
