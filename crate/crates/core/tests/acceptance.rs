//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use cone_weights::fredholm::{
    acyl_windows, asymptotics_set_laplace, base_window, dirac_windows, index_ladder, window_ac0, window_acinf,
    window_ah, window_ah_shifted, LadderQuery, WeightWindow,
};
use cone_weights::link_spectra::sphere_laplace_spectrum;
use cone_weights::model_cone::{
    apply_radial_operator, conformal_scalar_identity, euler_solve_mode, fd_exponent_oracle, log_derivative,
    mellin_derivative_check, mellin_forward, mellin_isometry_check, scalar_curvature_leading, LogGrid,
    ModeFunction, ModeTerm, RadialOperator, Resonance,
};
use cone_weights::oracles::{
    counting_index_oracle, harmonic_rank_oracle, integration_by_parts_factorial, sphere_roots_by_homogeneity,
    strip_oracle_laplace, warped_product_curvature,
};
use cone_weights::symbols::{laplace_roots_downstairs, laplace_roots_upstairs, ConeData};
use cone_weights::verify::bump;
use cone_weights::Scalar;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn exact_bounds(w: &WeightWindow, lo: Scalar, hi: Scalar) -> bool {
    match w.bounds() {
        Some((a, b)) => a.is_exact() && b.is_exact() && a.as_exact() == lo.as_exact() && b.as_exact() == hi.as_exact(),
        None => false,
    }
}

fn window_reproduction() -> Outcome {
    let mut checked = 0;
    for n in 4..=8i64 {
        let w = window_ac0(n as u32).map_err(fail)?;
        ensure(exact_bounds(&w, Scalar::ratio(4 - n, 2), Scalar::ratio(n, 2)), || format!("AC0 n={n}: {}", w.display()))?;
        let w = window_acinf(n as u32).map_err(fail)?;
        ensure(exact_bounds(&w, Scalar::int(2 - n), Scalar::zero()), || format!("ACinf n={n}: {}", w.display()))?;
        checked += 2;
    }
    for n in 4..=7i64 {
        for s in [Scalar::int(1), Scalar::ratio(1, 2), Scalar::ratio(-1, 2)] {
            let cone = ConeData::new(n as u32, s).map_err(fail)?;
            let windows = dirac_windows(&cone, None, true).map_err(fail)?;
            let w = windows.enhanced.window().ok_or_else(|| format!("no enhanced window at n={n} s={s}"))?;
            let half = Scalar::ratio(n - 1, 2);
            ensure(exact_bounds(w, half * (s - 1), half * (s + 1)), || format!("Dirac n={n} s={s}: {}", w.display()))?;
            checked += 1;
        }
    }
    for n in 3..=10i64 {
        let w = window_ah(n as u32, Scalar::int(2)).map_err(fail)?;
        ensure(exact_bounds(&w, Scalar::ratio(1 - n, 2), Scalar::ratio(n - 1, 2)), || format!("AH n={n}: {}", w.display()))?;
        checked += 1;
        for p in [Scalar::ratio(3, 2), Scalar::int(2), Scalar::ratio(7, 3), Scalar::int(4)] {
            for j in 1..=6 {
                let t = Scalar::ratio(n - 1, 2) + Scalar::ratio(j, 3);
                let w = window_ah_shifted(n as u32, p, t).map_err(fail)?;
                let lo = ((Scalar::int(n - 1) - t) * p + Scalar::int(1 - n)) / p;
                let hi = (t * p + Scalar::int(1 - n)) / p;
                ensure(exact_bounds(&w, lo, hi), || format!("shifted AH n={n} p={p} t={t}: {}", w.display()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} windows exact"))
}

fn indicial_root_oracle() -> Outcome {
    let mut pairs = 0;
    for n in 4..=8u32 {
        let cone = ConeData::new(n, 1).map_err(fail)?;
        let table = sphere_laplace_spectrum(n, 6).map_err(fail)?;
        for (k, entry) in table.entries().iter().enumerate() {
            let roots = laplace_roots_upstairs(&cone, entry.value).map_err(fail)?;
            let expected = sphere_roots_by_homogeneity(n, k as u32);
            for (r, e) in roots.iter().zip(expected) {
                ensure(r.zeta.is_exact() && r.zeta.as_exact() == Scalar::int(e).as_exact(), || {
                    format!("n={n} k={k}: root {} vs {e}", r.zeta)
                })?;
            }
            let oracle = harmonic_rank_oracle(n, k as u32);
            ensure(oracle.exact && oracle.dimension == entry.mult, || {
                format!("n={n} k={k}: multiplicity {} vs rank oracle {}", entry.mult, oracle.dimension)
            })?;
            pairs += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(20);
    let grid = LogGrid::new(-10.0, 10.0, 1 << 15).map_err(fail)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.random_range(-5.0..5.0);
        let mu = rng.random_range(0.5..15.0);
        let fit = fd_exponent_oracle(RadialOperator::new(a, mu), &grid, (1.0, 0.5)).map_err(fail)?;
        // x^gamma with gamma = -zeta for the upstairs roots a/2 -+ sqrt(a^2/4 + mu)
        let r = (a * a / 4.0 + mu).sqrt();
        let (zeta_lo, zeta_hi) = (a / 2.0 - r, a / 2.0 + r);
        let deviation = (fit.at_zero + zeta_hi).abs().max((fit.at_infinity + zeta_lo).abs());
        worst = worst.max(deviation);
        ensure(deviation < 1e-3, || format!("a={a} mu={mu}: {fit:?}"))?;
    }
    Ok(format!("{pairs} (n, k) pairs exact; finite-difference deviation {worst:.1e}"))
}

fn index_ladder_oracle() -> Outcome {
    let mut midpoints = 0;
    for n in 4..=6u32 {
        for s in [1i64, -1] {
            let cone = ConeData::new(n, s).map_err(fail)?;
            let table = sphere_laplace_spectrum(n, 4).map_err(fail)?;
            let a = (n as i64 - 2) * s;
            let mu4 = 4 * (n as i64 + 2);
            let r = ((a * a + 4 * mu4) as f64).sqrt() / 2.0;
            let lo = Scalar::float(a as f64 / 2.0 - r - 1.0);
            let hi = Scalar::float(a as f64 / 2.0 + r + 1.0);
            let ladder = index_ladder(&cone, &table, lo, hi).map_err(fail)?;
            let reference = a as f64 / 2.0;
            for step in &ladder.steps {
                let mid = (step.beta_lo + step.beta_hi) / 2;
                let oracle = counting_index_oracle(n, s as f64, mid.to_f64(), reference);
                ensure(step.index == oracle, || format!("n={n} s={s} beta={mid}: ladder {} vs oracle {oracle}", step.index))?;
                midpoints += 1;
            }
            let (b_lo, b_hi) = base_window(&cone).map_err(fail)?.bounds().expect("finite");
            ensure(ladder.index_at((b_lo + b_hi) / 2) == LadderQuery::Index(0), || format!("n={n} s={s}: base window index"))?;
        }
    }
    Ok(format!("{midpoints} midpoints equal"))
}

fn shift_invariant() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(3..=12);
        let s = rng.random_range(-3.0..3.0);
        let mu = rng.random_range(0.0..100.0);
        let cone = ConeData::new(n, Scalar::float(s)).map_err(fail)?;
        let up = laplace_roots_upstairs(&cone, Scalar::float(mu)).map_err(fail)?;
        let down = laplace_roots_downstairs(&cone, Scalar::float(mu)).map_err(fail)?;
        for (u, d) in up.iter().zip(&down) {
            let gap = (u.zeta.to_f64() - n as f64 / 2.0 - d.zeta.to_f64()).abs();
            worst = worst.max(gap);
            ensure(gap <= 1e-12, || format!("n={n} s={s} mu={mu}: gap {gap:e}"))?;
        }
    }
    Ok(format!("100 cases, max gap {worst:.1e}"))
}

fn closed_extension_criteria() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(3..=8);
        let s = -rng.random_range(0.0..3.0);
        let cone = ConeData::new(n, Scalar::float(s)).map_err(fail)?;
        let table = sphere_laplace_spectrum(n, 3).map_err(fail)?;
        let beta = Scalar::float(rng.random_range(-15.0..15.0));
        let set = asymptotics_set_laplace(&cone, &table, beta).map_err(fail)?;
        ensure(set.is_empty(), || format!("n={n} s={s} beta={beta}: {set:?}"))?;
    }
    let mut symmetric = 0;
    for n in 4..=8u32 {
        for s in [Scalar::ratio(1, 4), Scalar::ratio(1, 2), Scalar::int(1), Scalar::ratio(3, 2), Scalar::int(3)] {
            let cone = ConeData::new(n, s).map_err(fail)?;
            let table = sphere_laplace_spectrum(n, 6).map_err(fail)?;
            let beta = s * n as i64 / 2;
            let set = asymptotics_set_laplace(&cone, &table, beta).map_err(fail)?;
            ensure(set.is_empty(), || format!("n={n} s={s} at ns/2: {set:?}"))?;
            let oracle = strip_oracle_laplace(cone.a().to_f64(), s.to_f64(), &table, beta.to_f64());
            ensure(oracle.is_empty(), || format!("strip oracle disagrees at n={n} s={s}: {oracle:?}"))?;
            symmetric += 1;
        }
    }
    let cone = ConeData::new(4, 1).map_err(fail)?;
    let table = sphere_laplace_spectrum(4, 6).map_err(fail)?;
    let set = asymptotics_set_laplace(&cone, &table, Scalar::int(3)).map_err(fail)?;
    let oracle = strip_oracle_laplace(2.0, 1.0, &table, 3.0);
    ensure(set.len() == 1 && set[0].eigenvalue.is_zero(), || format!("(4, 1, 3): {set:?}"))?;
    ensure(oracle.len() == 1 && oracle[0].0 == 0.0, || format!("strip oracle at (4, 1, 3): {oracle:?}"))?;
    Ok(format!("100 nonpositive cases empty, {symmetric} symmetric weights empty, (4, 1, 3) -> {{mu = 0}}"))
}

fn mellin_identities() -> Outcome {
    let grid = LogGrid::reference();
    let theta = 0.7;
    let bumped = grid.sample(|x| x.powf(theta) * bump(x.ln()));
    let iso_bump = mellin_isometry_check(&grid, &bumped, theta, 2001, 120.0).map_err(fail)?;
    let exp = grid.sample(|x| (-x).exp());
    let iso_exp = mellin_isometry_check(&grid, &exp, -1.0, 1201, 16.0).map_err(fail)?;
    let iso = iso_bump.relative_error.max(iso_exp.relative_error);
    ensure(iso < 1e-6, || format!("isometry discrepancy {iso:e}"))?;

    let mut derivative = 0.0f64;
    let cases: [(fn(f64) -> f64, Complex64); 3] = [
        (|x| (-x).exp(), Complex64::new(1.0, 0.0)),
        (|x| (-x * x).exp(), Complex64::new(2.0, 0.0)),
        (|x| x * (-x).exp(), Complex64::new(1.0, 1.0)),
    ];
    for (f, zeta) in cases {
        let samples = grid.sample(f);
        let df = log_derivative(&grid, &samples).map_err(fail)?;
        derivative = derivative.max(mellin_derivative_check(&grid, &samples, &df, zeta, 1e-8).map_err(fail)?);
    }
    ensure(derivative < 1e-6, || format!("derivative residual {derivative:e}"))?;

    let mut worst = 0.0f64;
    for c in 0..=3i32 {
        let samples = grid.sample(|x| x.powi(c) * (-x).exp());
        for zeta in 1..=6i32 {
            let value = mellin_forward(&grid, &samples, Complex64::new(zeta as f64, 0.0), 1e-8).map_err(fail)?;
            let expected = integration_by_parts_factorial((c + zeta - 1) as u32);
            let error = (value.re - expected).abs() / expected;
            worst = worst.max(error);
            ensure(error < 1e-8 && value.im == 0.0, || format!("c={c} zeta={zeta}: {} vs {expected}", value.re))?;
        }
    }
    Ok(format!("isometry {iso:.1e}, derivative {derivative:.1e}, factorial {worst:.1e}"))
}

fn euler_resonance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut kinds = [0; 3];
    for case in 0..50 {
        let m = rng.random_range(0..=3);
        let c = rng.random_range(-3.0..3.0);
        let (op, lambda) = match case % 5 {
            0 | 1 => {
                let op = RadialOperator::new(rng.random_range(-4.0..4.0), rng.random_range(0.0..10.0));
                let (lo, hi) = op.homogeneous_exponents();
                let mut lambda = rng.random_range(-6.0..6.0);
                if (lambda - lo).abs() < 0.1 || (lambda - hi).abs() < 0.1 {
                    lambda += 0.5;
                }
                (op, lambda)
            }
            2 | 3 => {
                let op = RadialOperator::new(rng.random_range(-4.0..4.0), rng.random_range(0.5..10.0));
                let (lo, hi) = op.homogeneous_exponents();
                (op, if case % 2 == 0 { lo } else { hi })
            }
            _ => (RadialOperator::new(0.0, 0.0), 0.0),
        };
        let rhs = ModeTerm::new(c, lambda, m, op.mu);
        let solution = euler_solve_mode(op, rhs);
        kinds[match solution.resonance {
            Resonance::None => 0,
            Resonance::Simple => 1,
            Resonance::Double => 2,
        }] += 1;
        let residual = apply_radial_operator(op.a, &solution.particular).sub(&ModeFunction::new([rhs]));
        worst = worst.max(residual.max_coeff());
        ensure(residual.max_coeff() < 1e-12, || format!("case {case}: residual {residual:?}"))?;
    }
    ensure(kinds[1] > 0 && kinds[2] > 0, || format!("resonance mix {kinds:?}"))?;
    Ok(format!("50 cases ({} plain, {} simple, {} double), max coefficient {worst:.1e}", kinds[0], kinds[1], kinds[2]))
}

fn curvature_identities() -> Outcome {
    ensure(scalar_curvature_leading(4, 6.0) == 0.0, || "flat R^4 leading term".into())?;
    let mut worst = 0.0f64;
    for n in [4u32, 5] {
        for s in [-1.0, 0.5] {
            let kappa_f = ((n - 1) * (n - 2)) as f64;
            for j in 0..10 {
                let x = 0.1 + 0.35 * j as f64;
                let identity = conformal_scalar_identity(n, s, |_| 0.0, x).map_err(fail)?;
                let oracle = warped_product_curvature(n, s, kappa_f, x);
                let error = if identity == 0.0 { oracle.abs() } else { ((identity - oracle) / identity).abs() };
                worst = worst.max(error);
                ensure(error < 1e-6, || format!("n={n} s={s} x={x}: {identity} vs {oracle}"))?;
            }
        }
    }
    for n in 3..=7u32 {
        for j in -40..=40 {
            let s = j as f64 / 10.0;
            let nonneg = (1..=24).all(|i| {
                conformal_scalar_identity(n, s, |x| 1.0 + x, 10f64.powi(-i)).is_ok_and(|k| k >= 0.0)
            });
            ensure(nonneg == (s.abs() <= 1.0), || format!("sign scan n={n} s={s}: {nonneg}"))?;
        }
    }
    Ok(format!("max relative error {worst:.1e}; sign scan matches |s| <= 1"))
}

fn acyl_failures() -> Outcome {
    let table = sphere_laplace_spectrum(4, 8).map_err(fail)?;
    let report = acyl_windows(4, &table).map_err(fail)?;
    let (lo, hi) = report.primary.bounds().expect("finite");
    ensure(lo.is_zero() && (hi.to_f64() - 3f64.sqrt()).abs() < 1e-12, || format!("primary window {}", report.primary.display()))?;
    let mut expected: Vec<f64> = (0..=8).flat_map(|k: i32| {
        let r = ((k * (k + 2)) as f64).sqrt();
        if k == 0 { vec![0.0] } else { vec![-r, r] }
    }).collect();
    expected.sort_by(f64::total_cmp);
    let found: Vec<f64> = report.failure_points.iter().map(|p| p.to_f64()).collect();
    ensure(found.len() == expected.len() && found.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-12), || {
        format!("failure points {found:?}")
    })?;
    for p in &report.failure_points {
        ensure(!report.is_fredholm(*p).map_err(fail)?, || format!("delta = {p} should fail"))?;
        for offset in [-1e-3, 1e-3] {
            let delta = Scalar::float(p.to_f64() + offset);
            ensure(report.is_fredholm(delta).map_err(fail)?, || format!("delta = {delta} should be Fredholm"))?;
        }
    }
    Ok(format!("{} failure points, window (0, {})", found.len(), hi))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("window reproduction", window_reproduction),
        ("indicial-root oracle equivalence", indicial_root_oracle),
        ("index-ladder oracle equivalence", index_ladder_oracle),
        ("upstairs/downstairs shift", shift_invariant),
        ("closed-extension criteria", closed_extension_criteria),
        ("Mellin identities", mellin_identities),
        ("Euler resonance", euler_resonance),
        ("curvature identities", curvature_identities),
        ("cylindrical ends", acyl_failures),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail} [{:.2}s]", i + 1, t.elapsed().as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail} [{:.2}s]", i + 1, t.elapsed().as_secs_f64());
            }
        }
    }
    let total = start.elapsed().as_secs_f64();
    if total >= 60.0 {
        failures += 1;
        println!("FAIL runtime: {total:.1}s exceeds 60s");
    }
    println!("{} of {} criteria passed in {total:.2}s", criteria.len() - failures.min(criteria.len()), criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
