use melzak_core::perturb::{self, Direction};
use melzak_core::wedge::{self, PyramidQuad, Wedge};
use melzak_core::{HalfSpace, Vec3};
use proptest::prelude::*;

fn quad_strategy() -> impl Strategy<Value = PyramidQuad> {
    (
        prop::array::uniform4(-0.35f64..0.35),
        prop::array::uniform4(0.4f64..1.6),
    )
        .prop_map(|(jitter, radii)| {
            let p = core::array::from_fn(|i| {
                let a = (i as f64 + jitter[i]) * std::f64::consts::FRAC_PI_2;
                [radii[i] * a.cos(), radii[i] * a.sin()]
            });
            PyramidQuad { p }
        })
        .prop_filter("convex around the origin", |q| q.margin() > 0.05)
}

fn pyramid_over(q: &PyramidQuad, h: f64) -> Wedge {
    let base = q.p.map(|x| Vec3::new(x[0], x[1], 0.0));
    let apex = Vec3::new(0.0, 0.0, h);
    let sides: [HalfSpace; 4] = core::array::from_fn(|i| {
        let n = (base[(i + 1) % 4] - base[i]).cross(apex - base[i]);
        HalfSpace::through(n, base[i])
    });
    Wedge::from_planes(base, Vec3::Z, sides).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f_is_homogeneous(q in quad_strategy(), s in 0.01f64..100.0) {
        let f = wedge::pyramid_f(&q).unwrap();
        let g = wedge::pyramid_f(&PyramidQuad { p: q.p.map(|x| [s * x[0], s * x[1]]) }).unwrap();
        for i in 0..4 {
            prop_assert!((g[i] - s * f[i]).abs() < 1e-12 * s.max(1.0) * (1.0 + f[i].abs()));
        }
    }

    #[test]
    fn f_is_rotation_invariant(q in quad_strategy(), a in 0.0f64..std::f64::consts::TAU) {
        let (c, s) = (a.cos(), a.sin());
        let f = wedge::pyramid_f(&q).unwrap();
        let g = wedge::pyramid_f(&PyramidQuad { p: q.p.map(|x| [c * x[0] - s * x[1], s * x[0] + c * x[1]]) }).unwrap();
        for i in 0..4 {
            prop_assert!((g[i] - f[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn flattened_pyramid_approaches_weighted_limit(q in quad_strategy()) {
        let h = 1e-4;
        let w = pyramid_over(&q, h);
        for e in 0..4 {
            let lim = wedge::pyramid_r_limit(&q, e).unwrap();
            let got = h * wedge::wedge_r(&w, e).unwrap();
            prop_assert!((got - lim).abs() < 1e-2, "{} {} {}", e, got, lim);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_r_agrees_with_hinge_rate(
        a in 0.3f64..2.0,
        b in 0.3f64..2.0,
        tilts in prop::array::uniform4(0.3f64..1.4),
    ) {
        let (host, top) = wedge::rectangle_host(a, b, tilts, 1.0).unwrap();
        let w = wedge::protruding_wedge(&host, top);
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        prop_assert!(wedge::is_good_wedge(&w));
        let cyc = &host.faces()[top];
        for i in 0..4 {
            let edge = host.find_edge(cyc[i], cyc[(i + 1) % 4]).unwrap();
            let de = perturb::face_hinge_derivatives(&host, top, edge, Direction::Out).unwrap().de;
            let r = wedge::wedge_r(&w, i).unwrap();
            prop_assert!((r - de).abs() < 1e-9 * (1.0 + de.abs()), "{} {} {}", i, r, de);
            if de.abs() > 1e-9 {
                prop_assert_eq!(r.signum(), de.signum());
            }
        }
    }
}
