use clickbounds::bounds::{bound_target, probability_bounds, ConstraintForm, Target};
use clickbounds::detector::{click_statistics, clicks_from_vacuum, vacuum_probabilities, DetectorConfig};
use clickbounds::linalg::Matrix;
use clickbounds::lp::{solve, verify_certificate, LinearProgram, Sense, Status};
use clickbounds::oracle::{enumerate_vertices, random_feasible_lp};
use clickbounds::states::{apply_loss, StateFamily};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = StateFamily> {
    prop::sample::select(StateFamily::ALL.to_vec())
}

fn target() -> impl Strategy<Value = Target> {
    prop_oneof![
        (0usize..=14).prop_map(Target::Probability),
        Just(Target::Wigner),
        Just(Target::MeanPhoton),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn true_value_is_enclosed(
        fam in family(),
        nbar in 0.3f64..4.5,
        m in prop::sample::select(vec![3usize, 6, 10]),
        eta in 0.4f64..=1.0,
        t in target(),
    ) {
        let nbar = nbar.max(fam.min_nbar() + 0.2);
        let c = DetectorConfig::new(m, eta).unwrap();
        let d = fam.generate(nbar, 60).unwrap();
        let r = bound_target(&c, &d, t, 60, ConstraintForm::Vacuum).unwrap();
        prop_assert!(r.certified());
        prop_assert!(r.z_min <= r.z_max + 1e-9);
        prop_assert!(r.contains(r.true_value, 1e-8), "{} not in [{}, {}]", r.true_value, r.z_min, r.z_max);
    }

    #[test]
    fn constraint_forms_agree(
        fam in family(),
        nbar in 0.3f64..4.0,
        m in 2usize..12,
        eta in 0.5f64..=1.0,
        n in 0usize..10,
    ) {
        let nbar = nbar.max(fam.min_nbar() + 0.2);
        let c = DetectorConfig::new(m, eta).unwrap();
        let d = fam.generate(nbar, 50).unwrap();
        let a = probability_bounds(&c, &d, n, 50, ConstraintForm::Click).unwrap();
        let b = probability_bounds(&c, &d, n, 50, ConstraintForm::Vacuum).unwrap();
        prop_assert!((a.z_min - b.z_min).abs() <= 1e-7);
        prop_assert!((a.z_max - b.z_max).abs() <= 1e-7);
    }

    #[test]
    fn click_routes_agree(fam in family(), nbar in 0.3f64..6.0, m in 1usize..=16, eta in 0.05f64..=1.0) {
        let nbar = nbar.max(fam.min_nbar() + 0.2);
        let c = DetectorConfig::new(m, eta).unwrap();
        let d = fam.generate(nbar, 80).unwrap();
        let direct = click_statistics(&c, &d);
        let via = clicks_from_vacuum(&vacuum_probabilities(&c, &d), &c).unwrap();
        for (x, y) in direct.as_slice().iter().zip(via.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    /// A lossy detector sees the same clicks as a perfect one behind the loss.
    #[test]
    fn loss_commutes_with_detection(fam in family(), nbar in 0.3f64..3.0, m in 1usize..=10, eta in 0.1f64..=1.0) {
        let nbar = nbar.max(fam.min_nbar() + 0.2);
        let d = fam.generate(nbar, 80).unwrap();
        let lossy = click_statistics(&DetectorConfig::new(m, eta).unwrap(), &d);
        let ideal = click_statistics(&DetectorConfig::new(m, 1.0).unwrap(), &apply_loss(&d, eta).unwrap());
        for (x, y) in lossy.as_slice().iter().zip(ideal.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>(), rows in 1usize..=4, extra in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_feasible_lp(&mut rng, rows, (rows + extra).min(8));
        let sol = solve(&lp).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        let oracle = enumerate_vertices(&lp).unwrap();
        prop_assert!((sol.optimum - oracle).abs() <= 1e-9, "{} vs {}", sol.optimum, oracle);
        prop_assert!(verify_certificate(&lp, &sol).passed());
    }

    /// `b.y <= z.x` for a minimization with any feasible `x` and the reported
    /// dual, with equality at the optimum.
    #[test]
    fn weak_duality(
        a in prop::collection::vec(-1.0f64..1.0, 12),
        x in prop::collection::vec(0.0f64..1.0, 6),
        z in prop::collection::vec(0.0f64..2.0, 6),
    ) {
        let mut rows = vec![vec![1.0; 6]];
        rows.extend(a.chunks(6).map(<[f64]>::to_vec));
        let m = Matrix::from_rows(rows).unwrap();
        let b = m.mul_vec(&x);
        let lp = LinearProgram::new(z.clone(), m, b.clone(), Sense::Minimize).unwrap();
        let sol = solve(&lp).unwrap();
        let by: f64 = b.iter().zip(&sol.dual).map(|(u, v)| u * v).sum();
        let zx: f64 = z.iter().zip(&x).map(|(u, v)| u * v).sum();
        prop_assert!(by <= zx + 1e-9);
        prop_assert!((by - sol.optimum).abs() <= 1e-7);
    }
}
