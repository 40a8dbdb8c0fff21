use cone_weights::fredholm::{
    asymptotics_set_dirac, asymptotics_set_laplace, index_ladder, witt_check, LadderQuery, WittVerdict,
};
use cone_weights::link_spectra::{
    product_link_spectrum, rescale_link, sphere_laplace_spectrum, DiracSpectrumTable, SpectrumEntry, SpectrumTable,
    Truncation,
};
use cone_weights::model_cone::{
    apply_radial_operator, euler_solve_mode, membership, ModeFunction, ModeTerm, RadialOperator,
};
use cone_weights::oracles::{counting_index_oracle, quadrature_membership};
use cone_weights::symbols::{
    generic_conormal_roots, laplace_roots_downstairs, laplace_roots_upstairs, ConeData,
};
use cone_weights::Scalar;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Scalar> {
    (-40i64..=40, 1i64..=8).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn eigenvalue() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (0i64..=200, 1i64..=6).prop_map(|(p, q)| Scalar::ratio(p, q)),
        (0.0f64..80.0).prop_map(Scalar::float),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn downstairs_is_upstairs_shifted(n in 3u32..=12, s in rational(), mu in eigenvalue()) {
        let cone = ConeData::new(n, s).unwrap();
        let up = laplace_roots_upstairs(&cone, mu).unwrap();
        let down = laplace_roots_downstairs(&cone, mu).unwrap();
        for (u, d) in up.iter().zip(&down) {
            prop_assert!((u.zeta - cone.half_n()).approx_eq(d.zeta));
            if u.zeta.is_exact() && d.zeta.is_exact() {
                prop_assert_eq!((u.zeta - cone.half_n()).as_exact(), d.zeta.as_exact());
            }
        }
    }

    #[test]
    fn upstairs_roots_satisfy_vieta(n in 3u32..=12, s in rational(), mu in eigenvalue()) {
        let cone = ConeData::new(n, s).unwrap();
        let [lo, hi] = laplace_roots_upstairs(&cone, mu).unwrap();
        prop_assert!((lo.zeta + hi.zeta).approx_eq(cone.a()));
        let product = (lo.zeta * hi.zeta).to_f64();
        prop_assert!((product + mu.to_f64()).abs() <= 1e-9 * mu.to_f64().max(1.0));
    }

    #[test]
    fn companion_roots_match_closed_form(a in -10.0f64..10.0, mu in 0.0f64..50.0) {
        let roots = generic_conormal_roots(&[-mu, -a, 1.0]).unwrap();
        let r = (a * a / 4.0 + mu).sqrt();
        let values: Vec<f64> = roots.iter().flat_map(|z| std::iter::repeat_n(z.re, z.mult)).collect();
        prop_assert_eq!(values.len(), 2);
        prop_assert!((values[0] - (a / 2.0 - r)).abs() < 1e-6 * r.max(1.0));
        prop_assert!((values[1] - (a / 2.0 + r)).abs() < 1e-6 * r.max(1.0));
    }

    #[test]
    fn ladder_agrees_with_counting(n in 4u32..=6, s in prop_oneof![Just(1i64), Just(-1i64)], t in 0.0f64..1.0) {
        let cone = ConeData::new(n, s).unwrap();
        let table = sphere_laplace_spectrum(n, 10).unwrap();
        let (lo, hi) = (Scalar::int(-8), Scalar::int(8));
        let ladder = index_ladder(&cone, &table, lo, hi).unwrap();
        let beta = -8.0 + 16.0 * t;
        if let LadderQuery::Index(index) = ladder.index_at(Scalar::float(beta)) {
            let reference = (n as f64 - 2.0) * s as f64 / 2.0;
            prop_assert_eq!(index, counting_index_oracle(n, s as f64, beta, reference));
        }
        for w in ladder.steps.windows(2) {
            prop_assert!(w[0].index <= w[1].index);
        }
    }

    #[test]
    fn no_asymptotics_for_nonpositive_s(n in 3u32..=9, s in -3.0f64..=0.0, beta in -20.0f64..20.0) {
        let cone = ConeData::new(n, Scalar::float(s)).unwrap();
        let table = sphere_laplace_spectrum(n, 2).unwrap();
        prop_assert!(asymptotics_set_laplace(&cone, &table, Scalar::float(beta)).unwrap().is_empty());
        let dirac = DiracSpectrumTable::new(
            "d",
            vec![SpectrumEntry::new(0, 2)],
            None,
            Truncation::Through(Scalar::zero()),
        ).unwrap();
        prop_assert!(asymptotics_set_dirac(&cone, &dirac, Scalar::float(beta)).unwrap().is_empty());
    }

    #[test]
    fn curvature_gap_decides_witt_outside_thin_band(n in 3u32..=10, j in -40i64..=40) {
        let s = Scalar::ratio(j, 40);
        let gap = DiracSpectrumTable::gap_only("k", Scalar::ratio(n as i64 - 1, 2)).unwrap();
        let verdict = witt_check(&ConeData::new(n, s).unwrap(), &gap);
        if s.le(Scalar::zero()) || s.ge(Scalar::ratio(1, n as i64 - 1)) {
            prop_assert_eq!(verdict, WittVerdict::Satisfied);
        } else {
            prop_assert_eq!(verdict, WittVerdict::Unknown);
        }
    }

    #[test]
    fn rescaling_round_trips_exactly(n in 3u32..=7, p in 1i64..=9, q in 1i64..=9) {
        let table = sphere_laplace_spectrum(n, 4).unwrap();
        let c = Scalar::ratio(p, q);
        let back = rescale_link(&rescale_link(&table, c).unwrap(), Scalar::ratio(q, p)).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn product_commutes_and_has_identity(n in 3u32..=6, m in 3u32..=6, bound in 0i64..=40) {
        let first = sphere_laplace_spectrum(n, 8).unwrap();
        let second = sphere_laplace_spectrum(m, 8).unwrap();
        let mu_max = Scalar::int(bound);
        let ab = product_link_spectrum(&first, &second, mu_max).unwrap();
        let ba = product_link_spectrum(&second, &first, mu_max).unwrap();
        prop_assert_eq!(ab.entries(), ba.entries());
        let id = product_link_spectrum(&first, &SpectrumTable::point(), mu_max).unwrap();
        prop_assert_eq!(id.count_through(mu_max), first.count_through(mu_max));
    }

    #[test]
    fn euler_particular_solutions_are_exact(
        a in -5.0f64..5.0,
        mu in 0.0f64..12.0,
        lambda in -6.0f64..6.0,
        m in 0u32..=3,
        c in -4.0f64..4.0,
        pick in 0usize..3,
    ) {
        let op = RadialOperator::new(a, mu);
        let (lo, hi) = op.homogeneous_exponents();
        let lambda = [lambda, lo, hi][pick];
        let rhs = ModeTerm::new(c, lambda, m, mu);
        let solution = euler_solve_mode(op, rhs);
        let residual = apply_radial_operator(a, &solution.particular).sub(&ModeFunction::new([rhs]));
        prop_assert!(residual.max_coeff() < 1e-10, "{:?}", residual);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn membership_agrees_with_quadrature(
        gamma in -3.0f64..3.0,
        m in 0u32..=3,
        p in 1.2f64..4.0,
        offset in prop_oneof![0.15f64..2.0, -2.0f64..-0.15],
    ) {
        let beta = offset - gamma;
        prop_assert_eq!(membership(gamma, m, beta, p).unwrap(), quadrature_membership(gamma, m, beta, p));
    }

    #[test]
    fn scalar_display_round_trips(p in -10_000i64..10_000, q in 1i64..500) {
        let x = Scalar::ratio(p, q);
        let parsed: Scalar = x.display().parse().unwrap();
        prop_assert_eq!(parsed.as_exact(), x.as_exact());
    }
}
