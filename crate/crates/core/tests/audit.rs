use melzak_core::criteria::{self, AuditMode, CriteriaReport, IMPROVING_DM};
use melzak_core::{gauss, perturb, sample, Polyhedron};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const IDS: [&str; 6] = [
    "curvature",
    "degree",
    "dihedral",
    "face_degree_sum",
    "triangle_count",
    "triangle_deficit",
];

fn check_witnesses(p: &Polyhedron, r: &CriteriaReport) -> Result<(), TestCaseError> {
    prop_assert_eq!(r.verdicts.iter().map(|v| v.id).collect::<Vec<_>>(), IDS.to_vec());
    for v in &r.verdicts {
        prop_assert_eq!(v.passed, v.witnesses.is_empty(), "{}", v.id);
        for w in &v.witnesses {
            let Some(pert) = w.improving_perturbation else { continue };
            let dm = perturb::derivatives(p, pert).unwrap().dm;
            prop_assert!(dm < IMPROVING_DM, "{} {:?}", v.id, w);
            prop_assert!((Some(dm) == w.dm) || w.dm.is_some_and(|x| (x - dm).abs() < 1e-9));
            // A small step along an improving direction lowers the ratio.
            let m0 = p.melzak_ratio().unwrap();
            let t = 1e-6 * p.diameter();
            if let Ok(q) = perturb::apply(p, pert, t) {
                let m1 = q.melzak_ratio().unwrap();
                prop_assert!(m1 < m0 + 1e-9 * m0, "{} {:?} {} {}", v.id, pert, m0, m1);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn witnesses_on_random_polyhedra_are_sound(seed in any::<u64>(), faces in 4usize..10) {
        let p = sample::random_convex(&mut ChaCha8Rng::seed_from_u64(seed), faces).unwrap();
        for mode in [AuditMode::Any, AuditMode::Candidate] {
            let r = criteria::audit(&p, mode, None).unwrap();
            check_witnesses(&p, &r)?;
        }
    }

    #[test]
    fn pyramid_apex_fails_degree_check(seed in any::<u64>(), n in 4usize..9) {
        let p = sample::random_pyramid(&mut ChaCha8Rng::seed_from_u64(seed), n).unwrap();
        let r = criteria::audit(&p, AuditMode::Any, None).unwrap();
        check_witnesses(&p, &r)?;
        let v = r.verdict("degree").unwrap();
        prop_assert!(v.applicable && !v.passed);
        prop_assert!(v.witnesses.iter().any(|w| w.improving_perturbation.is_some()));
        prop_assert!(!r.summary.is_candidate_minimizer);
        prop_assert_eq!(r.summary.max_vertex_degree, n);
    }

    #[test]
    fn deficit_form_is_below_incircle_threshold(seed in any::<u64>(), faces in 4usize..10) {
        let p = sample::random_convex(&mut ChaCha8Rng::seed_from_u64(seed), faces).unwrap();
        for v in 0..p.num_vertices() {
            let g = gauss::gauss_image(&p, v).unwrap();
            let theta = gauss::spherical_incircle(&g).unwrap().radius;
            let alpha = gauss::angle_deficit(&p, v);
            let exact = std::f64::consts::TAU / theta.tan();
            prop_assert!(criteria::deficit_threshold(alpha) <= exact * (1.0 + 1e-12), "{} {}", alpha, theta);
        }
    }
}
