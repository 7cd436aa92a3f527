use vklab::convergence::{run_convergence, ConvergenceConfig};
use vklab::field2d::{Grid2D, ScalarField2D, DEFAULT_MARGIN};
use vklab::identities::Status;
use vklab::multiplicity::{run_multiplicity_experiment, FamilySpec, Sequence};
use vklab::radial::{RadialGrid, RadialProfile, DEFAULT_CELLS};
use vklab::stationarity::{
    gen_plateau_variations, gen_zero_hessian_variations, measure, measure_2d, symmetrize_variation,
    tol_fd, verify_proposition, Payload, StationarityConfig, Variation, VariationKind, Verdict,
    TOL_RADIAL,
};

fn family_base() -> RadialProfile {
    FamilySpec::default().build().unwrap().base_profile()
}

#[test]
fn plateau_variations_are_admissible_and_stationary() {
    let v = family_base();
    let g = RadialGrid::midpoint(DEFAULT_CELLS).unwrap();
    for seed in 0..3 {
        for var in gen_plateau_variations(&v, &g, 12, seed).unwrap() {
            let m = measure(&v, &var.payload, &g).unwrap();
            assert!(m.norm_f > 0.0);
            assert!(m.admissible(TOL_RADIAL), "adm {:e}", m.adm_defect);
            assert!(m.normalized() <= TOL_RADIAL);
        }
    }
}

#[test]
fn zero_hessian_and_symmetrized_variations() {
    let v = family_base();
    let g = RadialGrid::midpoint(DEFAULT_CELLS).unwrap();
    let (band, vars) = gen_zero_hessian_variations(&v, &g, 2, 5, 0).unwrap();
    assert_eq!(band.grid.per_unit(), 2048);
    let tol = tol_fd(band.grid.spacing());
    for var in &vars {
        let Payload::Field(f) = &var.payload else {
            panic!("2D variation expected")
        };
        for w in [var.clone(), symmetrize_variation(f, 256).unwrap()] {
            let Payload::Field(f) = &w.payload else {
                unreachable!()
            };
            let m = measure_2d(&v, f, &g).unwrap();
            assert!(m.admissible(tol) && m.normalized() <= tol, "{:?}", w.kind);
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let v = family_base();
    let cfg = StationarityConfig {
        seed: 11,
        zero_hessian_count: 1,
        symmetrized_count: 1,
        ..StationarityConfig::default()
    };
    let a = serde_json::to_string(&verify_proposition(&v, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_proposition(&v, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = StationarityConfig { seed: 12, ..cfg };
    let c = serde_json::to_string(&verify_proposition(&v, &other).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn paraboloid_uses_harmonic_class() {
    let r =
        verify_proposition(&RadialProfile::paraboloid(), &StationarityConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.count(VariationKind::Harmonic), 10);
    assert!(r
        .notes
        .iter()
        .any(|n| n == "only trivial/harmonic variation classes available"));
}

#[test]
fn inadmissible_custom_variation_is_excluded() {
    let disk = Grid2D::disk(128, DEFAULT_MARGIN).unwrap();
    let cfg = StationarityConfig {
        per_unit: 128,
        custom: vec![Variation::field(
            VariationKind::Custom,
            ScalarField2D::from_fn(&disk, |x, y| x * x + y * y),
        )],
        ..StationarityConfig::default()
    };
    let r = verify_proposition(&RadialProfile::paraboloid(), &cfg).unwrap();
    let custom: Vec<_> = r
        .variations
        .iter()
        .filter(|x| x.kind == VariationKind::Custom)
        .collect();
    assert_eq!(custom.len(), 1);
    assert_eq!(custom[0].pass, None);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn small_custom_family() {
    let spec = FamilySpec {
        radius: 0.9,
        sequence: Sequence::Custom(vec![0.3, 0.5, 0.6, 0.65, 0.7]),
        depth: None,
        members: 1,
    };
    let run = run_multiplicity_experiment(&spec, &StationarityConfig::default()).unwrap();
    let r = &run.report;
    assert!(r.det_check.pass && r.energy_check.pass && r.distinct);
    assert_eq!(r.members.len(), 2);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn base_only_family() {
    let spec = FamilySpec {
        members: 0,
        ..FamilySpec::default()
    };
    let cfg = StationarityConfig {
        zero_hessian_count: 0,
        symmetrized_count: 0,
        ..StationarityConfig::default()
    };
    let run = run_multiplicity_experiment(&spec, &cfg).unwrap();
    assert_eq!(run.report.members.len(), 1);
    assert!(run.report.det_check.pass);
    assert!(run.report.passed());
}

#[test]
fn convergence_orders() {
    let cfg = ConvergenceConfig::default();
    let p = run_convergence(&RadialProfile::paraboloid(), &cfg).unwrap();
    assert!(p.passed());
    let q = run_convergence(&RadialProfile::quartic(), &cfg).unwrap();
    for c in &q.checks {
        assert_eq!(c.status, Status::Converged, "{}", c.name);
        for o in c.orders.iter().flatten() {
            assert!((o - 2.0).abs() < 0.1, "{} order {o}", c.name);
        }
    }
}
