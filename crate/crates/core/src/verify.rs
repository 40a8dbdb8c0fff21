//! The invariant battery: every cross-module property, each run against its
//! independent oracle. Checks are independent and may run in parallel; the
//! report is always sorted by check name.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::fredholm::{
    asymptotics_set_dirac, asymptotics_set_laplace, base_window, index_ladder, is_elliptic_at,
    to_gamma_window, window_ac0, window_acinf, witt_check, LadderQuery, WittVerdict,
};
use crate::link_spectra::{
    product_link_spectrum, rescale_link, sphere_laplace_spectrum, DiracSpectrumTable,
    SpectrumEntry, SpectrumTable, Truncation,
};
use crate::model_cone::{
    apply_radial_operator, euler_solve_mode, fd_exponent_oracle, log_derivative, mellin_derivative_check,
    mellin_isometry_check, membership, solve_model_problem, LogGrid, ModeFunction, ModeTerm, RadialOperator,
    Resonance,
};
use crate::oracles::{
    counting_index_oracle, harmonic_rank_oracle, product_pairs_oracle, quadrature_membership,
    warped_product_curvature,
};
use crate::scalar::Scalar;
use crate::symbols::{
    dirac_roots, generic_conormal_roots, laplace_roots_downstairs, laplace_roots_upstairs, symbol_eval, ConeData,
    Convention,
};

const SEED: u64 = 0x5eed_c0de;

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = std::result::Result<String, Failure>;

fn ensure(condition: bool, message: impl FnOnce() -> String) -> std::result::Result<(), Failure> {
    if condition {
        Ok(())
    } else {
        Err(Failure(message()))
    }
}

#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    run: fn() -> Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn checks() -> Vec<Check> {
    let mut all = vec![
        Check { name: "fredholm.asymptotics_empty_for_nonpositive_s", run: asymptotics_empty_for_nonpositive_s },
        Check { name: "fredholm.ellipticity_matches_breakpoints", run: ellipticity_matches_breakpoints },
        Check { name: "fredholm.ladder_matches_counting_oracle", run: ladder_matches_counting_oracle },
        Check { name: "fredholm.ladder_monotone", run: ladder_monotone },
        Check { name: "fredholm.window_consistency", run: window_consistency },
        Check { name: "fredholm.witt_curvature_gap", run: witt_curvature_gap },
        Check { name: "link_spectra.product_laws", run: product_laws },
        Check { name: "link_spectra.rescale_preserves_counts", run: rescale_preserves_counts },
        Check { name: "link_spectra.rescale_roundtrip", run: rescale_roundtrip },
        Check { name: "link_spectra.sphere_multiplicity_rank", run: sphere_multiplicity_rank },
        Check { name: "model_cone.conformal_curvature", run: conformal_curvature },
        Check { name: "model_cone.euler_resonance", run: euler_resonance },
        Check { name: "model_cone.fd_exponents", run: fd_exponents },
        Check { name: "model_cone.mellin_derivative_rule", run: mellin_derivative_rule },
        Check { name: "model_cone.mellin_isometry", run: mellin_isometry },
        Check { name: "model_cone.mellin_root_identity", run: mellin_root_identity },
        Check { name: "model_cone.membership_quadrature", run: membership_quadrature },
        Check { name: "model_cone.model_problem_base_window", run: model_problem_base_window },
        Check { name: "symbols.exponent_realization", run: exponent_realization },
        Check { name: "symbols.generic_matches_quadratic", run: generic_matches_quadratic },
        Check { name: "symbols.shift_consistency", run: shift_consistency },
        Check { name: "symbols.vieta", run: vieta },
    ];
    all.sort_by_key(|c| c.name);
    all
}

pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|c| c.name).collect()
}

/// Runs every check whose name contains `filter` (all when `None`). A check
/// named exactly `inject_failure` is reported as failed without running.
pub fn run_checks(filter: Option<&str>, inject_failure: Option<&str>) -> Vec<CheckResult> {
    let selected: Vec<Check> = checks()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .collect();
    let mut results: Vec<CheckResult> = selected
        .par_iter()
        .map(|c| {
            if inject_failure == Some(c.name) {
                return CheckResult { name: c.name.into(), passed: false, detail: "injected failure".into() };
            }
            match (c.run)() {
                Ok(detail) => CheckResult { name: c.name.into(), passed: true, detail },
                Err(Failure(detail)) => CheckResult { name: c.name.into(), passed: false, detail },
            }
        })
        .collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    results
}

// ---------------------------------------------------------------------------
// link_spectra

fn sphere_multiplicity_rank() -> Outcome {
    let mut cases = 0;
    for n in 3..=8 {
        let table = sphere_laplace_spectrum(n, 6)?;
        for (k, e) in table.entries().iter().enumerate() {
            let oracle = harmonic_rank_oracle(n, k as u32);
            ensure(oracle.exact, || format!("rank mod p inconclusive at n={n} k={k}"))?;
            ensure(oracle.dimension == e.mult, || {
                format!("n={n} k={k}: table {} vs rank oracle {}", e.mult, oracle.dimension)
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, k) pairs agree"))
}

fn pairs(t: &SpectrumTable) -> Vec<(Scalar, u64)> {
    t.entries().iter().map(|e| (e.value, e.mult)).collect()
}

fn product_laws() -> Outcome {
    let mu_max = Scalar::int(30);
    let s2 = sphere_laplace_spectrum(3, 6)?;
    let s3 = sphere_laplace_spectrum(4, 6)?;
    let custom = SpectrumTable::new(
        "custom",
        vec![SpectrumEntry::new(0, 1), SpectrumEntry::new(Scalar::ratio(5, 2), 3), SpectrumEntry::new(7, 2)],
        Truncation::Complete,
    )?;
    let point = SpectrumTable::point();
    let ab = product_link_spectrum(&s2, &s3, mu_max)?;
    let ba = product_link_spectrum(&s3, &s2, mu_max)?;
    ensure(ab.entries() == ba.entries(), || "product is not commutative".into())?;
    let left = product_link_spectrum(&product_link_spectrum(&s2, &s3, mu_max)?, &custom, mu_max)?;
    let right = product_link_spectrum(&s2, &product_link_spectrum(&s3, &custom, mu_max)?, mu_max)?;
    ensure(left.entries() == right.entries(), || "product is not associative".into())?;
    let id = product_link_spectrum(&s3, &point, mu_max)?;
    let expected: Vec<SpectrumEntry> = s3.entries().iter().copied().filter(|e| e.value.le(mu_max)).collect();
    ensure(id.entries() == expected.as_slice(), || "point table is not an identity".into())?;
    let oracle = product_pairs_oracle(&pairs(&s2), &pairs(&s3), mu_max);
    ensure(pairs(&ab) == oracle, || "product disagrees with pair enumeration".into())?;
    Ok(format!("{} product eigenvalues through {mu_max}", ab.entries().len()))
}

fn rescale_roundtrip() -> Outcome {
    let table = sphere_laplace_spectrum(5, 5)?;
    for c in [Scalar::int(2), Scalar::ratio(3, 7), Scalar::ratio(11, 5)] {
        let back = rescale_link(&rescale_link(&table, c)?, Scalar::int(1) / c)?;
        ensure(back == table, || format!("exact round trip failed for c = {c}"))?;
    }
    let c = Scalar::float(1.7320508);
    let back = rescale_link(&rescale_link(&table, c)?, Scalar::float(1.0 / 1.7320508))?;
    for (x, y) in back.entries().iter().zip(table.entries()) {
        let (u, v) = (x.value.to_f64(), y.value.to_f64());
        ensure((u - v).abs() <= 1e-12 * v.abs().max(1.0), || format!("float round trip drifted: {u} vs {v}"))?;
    }
    let dirac = DiracSpectrumTable::new(
        "d",
        vec![SpectrumEntry::new(-2, 1), SpectrumEntry::new(Scalar::ratio(3, 2), 2)],
        Some(Scalar::ratio(3, 2)),
        Truncation::Through(Scalar::int(2)),
    )?;
    let back = rescale_link(&rescale_link(&dirac, Scalar::int(3))?, Scalar::ratio(1, 3))?;
    ensure(back == dirac, || "Dirac round trip failed".into())?;
    Ok("exact and float round trips".into())
}

fn rescale_preserves_counts() -> Outcome {
    let table = sphere_laplace_spectrum(4, 6)?;
    for c in [Scalar::int(2), Scalar::ratio(2, 3), Scalar::float(0.8)] {
        let scaled = rescale_link(&table, c)?;
        for bound in [0, 3, 10, 24, 40] {
            let mu_max = Scalar::int(bound);
            let before = table.count_through(mu_max);
            let after = scaled.count_through(mu_max / (c * c));
            ensure(before == after, || format!("c = {c}, mu_max = {bound}: {before} vs {after}"))?;
        }
    }
    Ok("counts preserved under three scalings".into())
}

// ---------------------------------------------------------------------------
// symbols

fn random_cone(rng: &mut StdRng) -> std::result::Result<(ConeData, Scalar), Failure> {
    let n = rng.random_range(3..=9);
    let s = if rng.random_bool(0.5) {
        Scalar::ratio(rng.random_range(-12..=12), rng.random_range(1..=6))
    } else {
        Scalar::float(rng.random_range(-3.0..3.0))
    };
    let mu = if rng.random_bool(0.5) {
        Scalar::ratio(rng.random_range(0..=60), rng.random_range(1..=4))
    } else {
        Scalar::float(rng.random_range(0.0..50.0))
    };
    Ok((ConeData::new(n, s)?, mu))
}

fn shift_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    for _ in 0..200 {
        let (cone, mu) = random_cone(&mut rng)?;
        let up = laplace_roots_upstairs(&cone, mu)?;
        let down = laplace_roots_downstairs(&cone, mu)?;
        for (u, d) in up.iter().zip(&down) {
            let gap = (u.zeta - cone.half_n() - d.zeta).to_f64().abs();
            ensure(gap <= 1e-12 * u.zeta.to_f64().abs().max(1.0), || {
                format!("n={} s={} mu={mu}: {} vs {}", cone.n(), cone.s(), u.zeta, d.zeta)
            })?;
        }
        let theta = mu - Scalar::int(10);
        let du = dirac_roots(&cone, theta, Convention::Upstairs).zeta;
        let dd = dirac_roots(&cone, theta, Convention::Downstairs).zeta;
        ensure((du - cone.half_n()).approx_eq(dd), || format!("Dirac shift failed at theta = {theta}"))?;
    }
    Ok("200 random cones".into())
}

fn vieta() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 1);
    for _ in 0..200 {
        let (cone, mu) = random_cone(&mut rng)?;
        let [lo, hi] = laplace_roots_upstairs(&cone, mu)?;
        let (a, m) = (cone.a().to_f64(), mu.to_f64());
        let sum = (lo.zeta + hi.zeta).to_f64();
        let product = (lo.zeta * hi.zeta).to_f64();
        ensure((sum - a).abs() <= 1e-12 * a.abs().max(1.0), || format!("sum {sum} vs a {a}"))?;
        ensure((product + m).abs() <= 1e-12 * m.abs().max(1.0), || format!("product {product} vs -mu {}", -m))?;
    }
    Ok("200 random cones".into())
}

fn exponent_realization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 2);
    for _ in 0..200 {
        let (cone, mu) = random_cone(&mut rng)?;
        for root in laplace_roots_upstairs(&cone, mu)? {
            let zeta = root.zeta.to_f64();
            let value = symbol_eval(&cone, Complex64::new(zeta, 0.0), mu.to_f64(), Convention::Upstairs).norm();
            let scale = zeta * zeta + mu.to_f64().abs() + 1.0;
            ensure(value <= 1e-12 * scale, || format!("symbol at root {zeta}: {value}"))?;
            let u = ModeFunction::new([ModeTerm::new(1.0, -zeta, 0, mu.to_f64())]);
            let image = apply_radial_operator(cone.a().to_f64(), &u);
            ensure(image.max_coeff() <= 1e-12 * scale, || format!("L_mu x^(-zeta) = {image:?}"))?;
        }
    }
    Ok("200 random cones".into())
}

fn generic_matches_quadratic() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 3);
    for _ in 0..200 {
        let (cone, mu) = random_cone(&mut rng)?;
        let (a, m) = (cone.a().to_f64(), mu.to_f64());
        let generic = generic_conormal_roots(&[-m, -a, 1.0])?;
        let direct = laplace_roots_upstairs(&cone, mu)?;
        let flat: Vec<f64> = generic
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.re, r.mult))
            .collect();
        ensure(flat.len() == 2, || format!("expected two roots, got {generic:?}"))?;
        for (g, d) in flat.iter().zip(&direct) {
            let d = d.zeta.to_f64();
            ensure((g - d).abs() <= 1e-9 * d.abs().max(1.0), || format!("companion {g} vs direct {d}"))?;
        }
    }
    Ok("200 random quadratics".into())
}

// ---------------------------------------------------------------------------
// fredholm

fn sphere_cones() -> Vec<(u32, i64)> {
    [4, 5, 6].into_iter().flat_map(|n| [(n, 1), (n, -1)]).collect()
}

fn ladder_range(n: u32, s: i64) -> (Scalar, Scalar) {
    let [lo, hi] = sphere_roots_range(n, s);
    (Scalar::int(lo - 1), Scalar::int(hi + 1))
}

/// Extreme upstairs roots over degrees `0..=4`.
fn sphere_roots_range(n: u32, s: i64) -> [i64; 2] {
    let a = (n as i64 - 2) * s;
    let mu = 4 * (4 + n as i64 - 2);
    let r = ((a * a + 4 * mu) as f64).sqrt() / 2.0;
    [(a as f64 / 2.0 - r).round() as i64, (a as f64 / 2.0 + r).round() as i64]
}

fn ladder_matches_counting_oracle() -> Outcome {
    let mut points = 0;
    for (n, s) in sphere_cones() {
        let cone = ConeData::new(n, s)?;
        let table = sphere_laplace_spectrum(n, 4)?;
        let (lo, hi) = ladder_range(n, s);
        let ladder = index_ladder(&cone, &table, lo, hi)?;
        let reference = ((n as f64 - 2.0) * s as f64) / 2.0;
        let steps = 400;
        for j in 1..steps {
            let beta = lo.to_f64() + (hi - lo).to_f64() * j as f64 / steps as f64 + 1e-3;
            if !(beta < hi.to_f64()) {
                continue;
            }
            if let LadderQuery::Index(index) = ladder.index_at(Scalar::float(beta)) {
                let oracle = counting_index_oracle(n, s as f64, beta, reference);
                ensure(index == oracle, || format!("n={n} s={s} beta={beta}: ladder {index} vs oracle {oracle}"))?;
                points += 1;
            }
        }
    }
    Ok(format!("{points} grid points agree"))
}

fn ladder_monotone() -> Outcome {
    for (n, s) in sphere_cones() {
        let cone = ConeData::new(n, s)?;
        let table = sphere_laplace_spectrum(n, 4)?;
        let (lo, hi) = ladder_range(n, s);
        let ladder = index_ladder(&cone, &table, lo, hi)?;
        for w in ladder.steps.windows(2) {
            ensure(w[0].index <= w[1].index, || format!("n={n} s={s}: index decreases at {}", w[0].beta_hi))?;
        }
        let base = base_window(&cone)?;
        let (b_lo, b_hi) = base.bounds().expect("finite");
        ensure(ladder.index_at((b_lo + b_hi) / 2) == LadderQuery::Index(0), || format!("n={n} s={s}: base index"))?;
    }
    Ok("six sphere cones".into())
}

fn ellipticity_matches_breakpoints() -> Outcome {
    for (n, s) in sphere_cones() {
        let cone = ConeData::new(n, s)?;
        let table = sphere_laplace_spectrum(n, 4)?;
        let (lo, hi) = ladder_range(n, s);
        let ladder = index_ladder(&cone, &table, lo, hi)?;
        let mut j = lo * 4 + 1;
        while j.lt(hi * 4) {
            let beta = j / 4;
            let on_breakpoint = ladder.breakpoints.iter().any(|b| b.beta.approx_eq(beta));
            let elliptic = is_elliptic_at(&cone, &table, beta)?;
            ensure(elliptic != on_breakpoint, || format!("n={n} s={s} beta={beta}: elliptic {elliptic}"))?;
            j = j + 1;
        }
    }
    Ok("quarter-integer grid on six cones".into())
}

fn window_consistency() -> Outcome {
    for n in 4..=10 {
        let inf = window_acinf(n)?;
        let base = base_window(&ConeData::new(n, -1)?)?;
        ensure(inf.bounds() == base.bounds(), || format!("n={n}: ACinf vs base window"))?;
        let zero = window_ac0(n)?;
        let mapped = to_gamma_window(n, &base_window(&ConeData::new(n, 1)?)?);
        ensure(zero.bounds() == mapped.bounds(), || format!("n={n}: AC0 vs gamma of base window"))?;
    }
    Ok("n = 4..10".into())
}

fn asymptotics_empty_for_nonpositive_s() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 4);
    let gap = DiracSpectrumTable::gap_only("gap", Scalar::ratio(1, 10))?;
    for _ in 0..200 {
        let n = rng.random_range(3..=8);
        let s = Scalar::float(-rng.random_range(0.0..3.0));
        let cone = ConeData::new(n, s)?;
        let table = sphere_laplace_spectrum(n, 2)?;
        let beta = Scalar::float(rng.random_range(-20.0..20.0));
        ensure(asymptotics_set_laplace(&cone, &table, beta)?.is_empty(), || format!("Laplace n={n} s={s} beta={beta}"))?;
        ensure(asymptotics_set_dirac(&cone, &gap, beta)?.is_empty(), || format!("Dirac n={n} s={s} beta={beta}"))?;
    }
    Ok("200 random nonpositive s".into())
}

/// With gap `(n-1)/2` the Witt interval is decided for `s <= 0` and `s >= 1/(n-1)`;
/// between those the interval pokes outside the gap and the verdict is unknown.
fn witt_curvature_gap() -> Outcome {
    let mut decided = 0;
    for n in 3..=9 {
        let gap = DiracSpectrumTable::gap_only("curvature", Scalar::ratio(n as i64 - 1, 2))?;
        for j in -20..=20 {
            let s = Scalar::ratio(j, 20);
            let verdict = witt_check(&ConeData::new(n, s)?, &gap);
            let threshold = Scalar::ratio(1, n as i64 - 1);
            let expected = if s.le(Scalar::zero()) || s.ge(threshold) { WittVerdict::Satisfied } else { WittVerdict::Unknown };
            ensure(verdict == expected, || format!("n={n} s={s}: {verdict:?}, expected {expected:?}"))?;
            if expected == WittVerdict::Satisfied {
                decided += 1;
            }
        }
    }
    Ok(format!("{decided} decided cases"))
}

// ---------------------------------------------------------------------------
// model_cone

fn membership_quadrature() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 5);
    for _ in 0..50 {
        let gamma = rng.random_range(-3.0..3.0);
        let m = rng.random_range(0..=3);
        let p = rng.random_range(1.2..4.0);
        // keep away from the boundary so the quadrature verdict is sharp
        let offset = rng.random_range(0.15..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let beta = offset - gamma;
        let analytic = membership(gamma, m, beta, p)?;
        let numeric = quadrature_membership(gamma, m, beta, p);
        ensure(analytic == numeric, || format!("gamma={gamma} m={m} beta={beta} p={p}: {analytic} vs {numeric}"))?;
    }
    ensure(!quadrature_membership(-1.0, 0, 1.0, 2.0), || "boundary case converged".into())?;
    Ok("50 random cases plus the boundary".into())
}

fn mellin_root_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 6);
    for _ in 0..100 {
        let (cone, mu) = random_cone(&mut rng)?;
        let op = RadialOperator::for_cone(&cone, mu.to_f64());
        for h in euler_solve_mode(op, ModeTerm::new(1.0, 0.25, 0, op.mu)).homogeneous {
            let residual = apply_radial_operator(op.a, &ModeFunction::new([h]));
            ensure(residual.max_coeff() <= 1e-10, || format!("L_mu of {h:?} = {residual:?}"))?;
            let value = symbol_eval(&cone, Complex64::new(-h.gamma, 0.0), op.mu, Convention::Upstairs).norm();
            ensure(value <= 1e-9 * (1.0 + h.gamma * h.gamma + op.mu), || format!("symbol at {}: {value}", -h.gamma))?;
        }
    }
    Ok("100 random modes".into())
}

fn euler_resonance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    let mut counts = [0usize; 3];
    for case in 0..60 {
        let m = rng.random_range(0..=3);
        let (op, lambda, expected) = match case % 3 {
            0 => {
                let op = RadialOperator::new(rng.random_range(-4.0..4.0), rng.random_range(0.0..10.0));
                let (lo, hi) = op.homogeneous_exponents();
                let lambda = (lo + hi) / 2.0 + rng.random_range(0.3..2.0);
                (op, if (lambda - hi).abs() < 1e-3 { lambda + 0.5 } else { lambda }, Resonance::None)
            }
            1 => {
                let op = RadialOperator::new(rng.random_range(-4.0..4.0), rng.random_range(0.5..10.0));
                let (lo, hi) = op.homogeneous_exponents();
                (op, if rng.random_bool(0.5) { lo } else { hi }, Resonance::Simple)
            }
            _ => (RadialOperator::new(0.0, 0.0), 0.0, Resonance::Double),
        };
        let rhs = ModeTerm::new(rng.random_range(0.5..3.0), lambda, m, op.mu);
        let u = euler_solve_mode(op, rhs);
        ensure(u.resonance == expected, || format!("case {case}: {:?} vs {expected:?}", u.resonance))?;
        let degree = u.particular.terms().iter().map(|t| t.logpow).max().unwrap_or(0);
        let raise = match expected {
            Resonance::None => 0,
            Resonance::Simple => 1,
            Resonance::Double => 2,
        };
        ensure(degree == m + raise, || format!("case {case}: log degree {degree}, expected {}", m + raise))?;
        let residual = apply_radial_operator(op.a, &u.particular).sub(&ModeFunction::new([rhs]));
        ensure(residual.max_coeff() < 1e-12 * rhs.coeff.max(1.0) * 10.0, || format!("case {case}: residual {residual:?}"))?;
        counts[raise as usize] += 1;
    }
    Ok(format!("{} plain, {} simple, {} double", counts[0], counts[1], counts[2]))
}

fn fd_exponents() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 8);
    let grid = LogGrid::new(-10.0, 10.0, 1 << 15)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.random_range(-4.0..4.0);
        let mu = rng.random_range(0.5..12.0);
        let cone_free = RadialOperator::new(a, mu);
        let fit = fd_exponent_oracle(cone_free, &grid, (1.0, 0.5))?;
        let (lo, hi) = cone_free.homogeneous_exponents();
        let deviation = (fit.at_zero - lo).abs().max((fit.at_infinity - hi).abs());
        worst = worst.max(deviation);
        ensure(deviation < 1e-3, || format!("a={a} mu={mu}: fitted {fit:?} vs ({lo}, {hi})"))?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn mellin_derivative_rule() -> Outcome {
    let grid = LogGrid::reference();
    let cases: [(&str, fn(f64) -> f64, Complex64); 3] = [
        ("exp(-x)", |x| (-x).exp(), Complex64::new(1.0, 0.0)),
        ("exp(-x^2)", |x| (-x * x).exp(), Complex64::new(2.0, 0.0)),
        ("x exp(-x)", |x| x * (-x).exp(), Complex64::new(1.0, 1.0)),
    ];
    let mut worst = 0.0f64;
    for (label, f, zeta) in cases {
        let samples = grid.sample(f);
        let df = log_derivative(&grid, &samples)?;
        let residual = mellin_derivative_check(&grid, &samples, &df, zeta, 1e-8)?;
        worst = worst.max(residual);
        ensure(residual < 1e-6, || format!("{label} at {zeta}: residual {residual:e}"))?;
    }
    Ok(format!("max residual {worst:.2e}"))
}

/// Smooth even bump in `t`, supported in `|t| < 2`.
pub fn bump(t: f64) -> f64 {
    let u = t / 2.0;
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

fn mellin_isometry() -> Outcome {
    let grid = LogGrid::reference();
    let theta = 0.7;
    let bumped = grid.sample(|x| x.powf(theta) * bump(x.ln()));
    let first = mellin_isometry_check(&grid, &bumped, theta, 2001, 120.0)?;
    ensure(first.relative_error < 1e-6, || format!("bump: {first:?}"))?;
    let exp = grid.sample(|x| (-x).exp());
    let second = mellin_isometry_check(&grid, &exp, -1.0, 1201, 16.0)?;
    ensure(second.relative_error < 1e-6, || format!("exp(-x): {second:?}"))?;
    let doubled: Vec<f64> = exp.iter().map(|v| 2.0 * v).collect();
    let third = mellin_isometry_check(&grid, &doubled, -1.0, 1201, 16.0)?;
    let ratio = third.line_integral / second.line_integral;
    ensure((ratio - 4.0).abs() < 1e-9, || format!("scaling ratio {ratio}"))?;
    Ok(format!(
        "relative errors {:.2e}, {:.2e}",
        first.relative_error, second.relative_error
    ))
}

fn model_problem_base_window() -> Outcome {
    for (n, s) in sphere_cones() {
        let cone = ConeData::new(n, s)?;
        let table = sphere_laplace_spectrum(n, 4)?;
        let (lo, hi) = base_window(&cone)?.bounds().expect("finite");
        for j in 1..8 {
            let beta = lo.to_f64() + (hi - lo).to_f64() * j as f64 / 8.0;
            let report = solve_model_problem(&cone, &table, &ModeFunction::zero(), beta, 2.0)?;
            ensure(report.kernel.is_empty() && report.obstructed.is_empty(), || {
                format!("n={n} s={s} beta={beta}: kernel {} obstructed {}", report.kernel.len(), report.obstructed.len())
            })?;
        }
    }
    Ok("six cones, seven weights each".into())
}

fn conformal_curvature() -> Outcome {
    let mut worst = 0.0f64;
    for n in [4u32, 5] {
        for s in [-1.0, 0.5] {
            let kappa_f = ((n - 1) * (n - 2)) as f64;
            for j in 0..10 {
                let x = 0.05 + 0.2 * j as f64;
                let identity = crate::model_cone::conformal_scalar_identity(n, s, |_| 0.0, x)?;
                let oracle = warped_product_curvature(n, s, kappa_f, x);
                let error = (identity - oracle).abs() / identity.abs().max(1.0);
                worst = worst.max(error);
                ensure(error < 1e-6, || format!("n={n} s={s} x={x}: identity {identity} vs oracle {oracle}"))?;
            }
        }
    }
    for n in [3u32, 4, 6] {
        for j in -30..=30 {
            let s = j as f64 / 10.0;
            let nonneg = (1..=20).all(|i| {
                let x = 10f64.powi(-i);
                crate::model_cone::conformal_scalar_identity(n, s, |_| 1.0, x).is_ok_and(|k| k >= 0.0)
            });
            ensure(nonneg == (s.abs() <= 1.0), || format!("sign scan n={n} s={s}: nonnegative {nonneg}"))?;
        }
    }
    Ok(format!("max relative error {worst:.2e}; sign scan ok"))
}
