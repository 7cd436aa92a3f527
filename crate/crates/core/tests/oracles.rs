//! Closed-form values computed by hand, independent of the implementation.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use vklab::bump::eta;
use vklab::field2d::{
    angular_average_scalar, cof_2d, hessian_fd, pairing_2d, Grid2D, ScalarField2D, Sym2,
    SymMatrixField2D,
};
use vklab::multiplicity::{check_same_det, expected_separation, flip, sign_patterns, FamilySpec};
use vklab::radial::{
    det_hessian_at, det_hessian_radial, energy, RadialGrid, RadialProfile, DEFAULT_CELLS,
};
use vklab::stationarity::measure_radial;

fn grid() -> RadialGrid {
    RadialGrid::midpoint(DEFAULT_CELLS).unwrap()
}

#[test]
fn paraboloid_energy_is_two_pi() {
    // |∇²V|² = 2 on the unit disk.
    assert_relative_eq!(
        energy(&RadialProfile::paraboloid(), &grid()).unwrap(),
        2.0 * PI,
        max_relative = 1e-6
    );
}

#[test]
fn quartic_energy_is_ten_pi_over_three() {
    // (3t²)² + (t²)² = 10t⁴ and 2π ∫ 10 t⁵ dt = 10π/3.
    assert_relative_eq!(
        energy(&RadialProfile::quartic(), &grid()).unwrap(),
        10.0 * PI / 3.0,
        max_relative = 1e-6
    );
}

#[test]
fn quartic_det_at_half() {
    // 3t² · t³ / t = 3t⁴ = 3/16.
    let q = RadialProfile::quartic();
    assert!((det_hessian_at(q.jet(0.5), 0.5) - 0.1875).abs() <= 1e-10);
}

#[test]
fn negative_control_admissibility_defect() {
    // cof I : ∇²(t⁴/4) = 3t² + t² = 4t², and ‖4t²‖² = 2π ∫ 16 t⁵ dt = 16π/3.
    let m = measure_radial(
        &RadialProfile::paraboloid(),
        &RadialProfile::quartic(),
        &grid(),
    )
    .unwrap();
    let hand = (16.0 * PI / 3.0).sqrt();
    assert!((m.adm_defect - hand).abs() <= 0.01 * hand);
}

#[test]
fn family_value_between_first_nodes() {
    // Δ₁ = 1/4 and the term amplitude is Δ₁¹ η(0).
    let v = FamilySpec::default().build().unwrap().base_profile();
    assert_eq!(v.jet(0.625)[0], 0.25 * eta(0.0));
}

#[test]
fn family_separation_is_twice_smallest_flip() {
    // 2 (t₆ - t₅)⁵ η_max with t₆ - t₅ = 2⁻⁶.
    let f = FamilySpec::default().build().unwrap();
    assert!((expected_separation(&f, 5) - 2.0 * 2f64.powi(-30)).abs() <= 1e-10);
}

#[test]
fn k_vanishes_at_nodes_and_beyond_truncation() {
    let f = FamilySpec::default().build().unwrap();
    let v = f.base_profile();
    for &t in f.nodes().iter().skip(1) {
        assert_eq!(det_hessian_at(v.jet(t), t), 0.0);
    }
    let g = grid();
    let k = det_hessian_radial(&v, &g).unwrap();
    let last = *f.nodes().last().unwrap();
    for (t, k) in g.points().iter().zip(k.values()) {
        if *t >= last {
            assert_eq!(*k, 0.0);
        }
    }
}

#[test]
fn det_characterization_patterns_and_perturbations() {
    let f = FamilySpec::default().build().unwrap();
    let v = f.base_profile();
    let g = grid();
    for signs in sign_patterns(&f, 20, 7) {
        let u = f.signed_profile("pattern", &signs);
        let c = check_same_det(&u, &v, &g).unwrap();
        assert!(c.max_det_discrepancy <= 1e-10 && c.max_slope_discrepancy <= 1e-12);
    }
    for eps in [0.5, 0.1, 0.02, -0.3, 1.0] {
        let u = flip(&f, 2).unwrap().profile.scaled(1.0 + eps);
        let c = check_same_det(&u, &v, &g).unwrap();
        assert!(!c.det_side() && !c.slope_side(), "eps = {eps}");
    }
}

#[test]
fn average_of_x_squared_is_half_r_squared() {
    let g = Grid2D::disk(128, 0.05).unwrap();
    let f = ScalarField2D::from_fn(&g, |x, _| x * x);
    let half = ScalarField2D::from_fn(&g, |x, y| 0.5 * (x * x + y * y));
    assert!(
        angular_average_scalar(&f, 16)
            .unwrap()
            .max_abs_diff(&half)
            .unwrap()
            <= 1e-12
    );
}

#[test]
fn harmonic_pairing_with_identity_vanishes() {
    // cof I : ∇²(x² - y²) = 2 - 2.
    let g = Grid2D::disk(128, 0.05).unwrap();
    let hf = hessian_fd(&ScalarField2D::from_fn(&g, |x, y| x * x - y * y)).unwrap();
    let id = SymMatrixField2D::constant(hf.grid(), Sym2::IDENTITY);
    assert!(pairing_2d(&cof_2d(&id), &hf).unwrap().max_abs() <= 1e-9);
}
