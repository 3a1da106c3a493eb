use meanvort::config::{parse_table, set_override, RunConfig};
use meanvort::degenerate::{kappa_fields, DegenerateSetup, Interpolation};
use meanvort::diagnostics::lp_norm;
use meanvort::evolution::{advance, initial_state, StepOptions};
use meanvort::fields::{
    gaussian_bump, make_pinning, random_smooth, Grid2D, ModelParams, ScalarField, VectorField,
};
use meanvort::snapshot::Snapshot;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshot_bytes_round_trip(
        e in 3u32..6,
        l in 0.1f64..100.0,
        t in 0.0f64..1e6,
        seed in any::<u64>(),
        vector in any::<bool>(),
    ) {
        let g = Grid2D::new(1 << e, l).unwrap();
        let a = random_smooth(g, 2, 1.0, seed);
        let s = if vector {
            Snapshot::vector(t, VectorField::from_components(a.clone(), a.scale(-2.0)).unwrap())
        } else {
            Snapshot::scalar(t, a)
        };
        let back = Snapshot::from_bytes(&s.to_bytes()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn config_dump_is_a_fixed_point(
        e in 3u32..10,
        alpha in 0.0f64..10.0,
        beta in -5.0f64..5.0,
        t_end in 0.0f64..50.0,
        cfl in 0.01f64..0.9,
        limiter in prop::sample::select(vec!["minmod", "van_leer", "none"]),
    ) {
        let mut table = parse_table("").unwrap();
        set_override(&mut table, "grid.n", &(1usize << e).to_string()).unwrap();
        set_override(&mut table, "params.alpha", &format!("{alpha:?}")).unwrap();
        set_override(&mut table, "params.beta", &format!("{beta:?}")).unwrap();
        set_override(&mut table, "time.T", &format!("{t_end:?}")).unwrap();
        set_override(&mut table, "time.cfl", &format!("{cfl:?}")).unwrap();
        set_override(&mut table, "solver.limiter", limiter).unwrap();
        let cfg = RunConfig::from_table(&table).unwrap();
        prop_assert_eq!(cfg.grid.n, 1usize << e);
        prop_assert_eq!(cfg.params.alpha, alpha);
        let dumped = cfg.dump();
        let again = RunConfig::parse_str(&dumped).unwrap();
        prop_assert_eq!(again.dump(), dumped);
    }

    #[test]
    fn lp_norm_is_homogeneous_and_ordered(seed in any::<u64>(), c in 0.01f64..100.0) {
        let g = Grid2D::new(16, 1.0).unwrap();
        let w = random_smooth(g, 3, 1.0, seed);
        for p in [1.0, 2.0, 7.5, f64::INFINITY] {
            let a = lp_norm(&w.scale(c), p);
            let b = c * lp_norm(&w, p);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
        // unit area box: the norms increase with p
        prop_assert!(lp_norm(&w, 2.0) <= lp_norm(&w, 4.0) * (1.0 + 1e-12));
        prop_assert!(lp_norm(&w, 4.0) <= lp_norm(&w, f64::INFINITY) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kappa_matches_constant_f_closed_form(f0 in 0.0f64..5.0, seed in any::<u64>(), t in 0.0f64..3.0) {
        let g = Grid2D::new(8, 4.0).unwrap();
        let w = VectorField::from_components(random_smooth(g, 2, 0.5, seed), random_smooth(g, 2, 0.5, seed ^ 1)).unwrap();
        let setup = DegenerateSetup::from_fields(
            w,
            ScalarField::constant(g, f0),
            ScalarField::zeros(g),
            Interpolation::Bilinear,
        )
        .unwrap();
        let k = &kappa_fields(&setup, &[t], None).unwrap()[0];
        let exact = 1.0 / (1.0 + f0 * t);
        for x in k.data() {
            prop_assert!(*x > 0.0 && *x <= 1.0 + 1e-12);
            prop_assert!((x - exact).abs() <= 1e-6);
        }
    }

    #[test]
    fn one_step_keeps_mass_and_sign(
        seed in any::<u64>(),
        alpha in 0.0f64..2.0,
        beta in -1.0f64..1.0,
        sigma in 0.3f64..1.0,
    ) {
        let g = Grid2D::new(32, 6.0).unwrap();
        let pin = make_pinning(random_smooth(g, 2, 0.3, seed)).unwrap();
        let psi = VectorField::from_components(random_smooth(g, 2, 0.2, seed ^ 2), random_smooth(g, 2, 0.2, seed ^ 3)).unwrap();
        let omega = gaussian_bump(g, sigma, g.center());
        let params = ModelParams::incompressible(alpha, beta);
        let opts = StepOptions::default();
        let state = initial_state(omega, ScalarField::zeros(g), &pin, &params, &opts).unwrap();
        let (next, _) = advance(&state, &pin, &psi, &params, 0.02, &opts).unwrap();
        let m0 = state.omega.integral();
        prop_assert!((next.omega.integral() - m0).abs() <= 1e-12 * m0);
        prop_assert!(next.omega.min() >= -1e-12);
    }
}
