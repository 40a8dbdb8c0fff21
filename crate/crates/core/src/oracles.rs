//! Independent reference computations used to cross-check the main code paths.
//!
//! None of these call into the routines they check: multiplicities come from
//! linear algebra on monomials, roots from homogeneity, index counts from
//! membership of homogeneous solutions, curvature from finite differences.

use std::collections::BTreeMap;

use crate::link_spectra::SpectrumTable;
use crate::model_cone::{membership, RadialOperator};
use crate::scalar::Scalar;

const PRIME: u64 = 2_147_483_647;

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= PRIME;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % PRIME;
        }
        base = base * base % PRIME;
        exp >>= 1;
    }
    acc
}

/// Exponent vectors of all monomials of degree `k` in `n` variables.
fn monomials(n: usize, k: u32) -> Vec<Vec<u32>> {
    fn go(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=k).rev() {
            prefix.push(e);
            go(n, k - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(n), &mut out);
    out
}

fn rank_mod_prime(mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = pow_mod(rows[rank][col], PRIME - 2);
        for v in rows[rank].iter_mut() {
            *v = *v * inv % PRIME;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in col..cols {
                    let sub = factor * rows[rank][c] % PRIME;
                    rows[r][c] = (rows[r][c] + PRIME - sub) % PRIME;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HarmonicCount {
    pub dimension: u64,
    /// Rank over `F_p` reached the row count, so it equals the rational rank.
    pub exact: bool,
}

/// Dimension of degree-`k` harmonic polynomials in `n` variables, as
/// `dim P_k - rank(Laplacian: P_k -> P_{k-2})` with the rank computed over a prime field.
pub fn harmonic_rank_oracle(n: u32, k: u32) -> HarmonicCount {
    let n = n as usize;
    let domain = monomials(n, k);
    if k < 2 {
        return HarmonicCount { dimension: domain.len() as u64, exact: true };
    }
    let target = monomials(n, k - 2);
    let index: BTreeMap<&[u32], usize> = target.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    // rows indexed by target monomials, columns by domain monomials
    let mut matrix = vec![vec![0u64; domain.len()]; target.len()];
    for (col, mono) in domain.iter().enumerate() {
        for var in 0..n {
            let e = mono[var];
            if e >= 2 {
                let mut image = mono.clone();
                image[var] -= 2;
                let row = index[image.as_slice()];
                matrix[row][col] = (matrix[row][col] + (e * (e - 1)) as u64) % PRIME;
            }
        }
    }
    let rows = target.len();
    let rank = rank_mod_prime(matrix);
    HarmonicCount { dimension: (domain.len() - rank) as u64, exact: rank == rows }
}

/// Upstairs roots on the degree-`k` harmonics of the flat cone over `S^{n-1}`:
/// `r^k phi` and its Kelvin transform `r^{2-n-k} phi` are harmonic, giving `x^{-zeta}`
/// with `zeta = -k` and `zeta = k + n - 2`.
pub fn sphere_roots_by_homogeneity(n: u32, k: u32) -> [i64; 2] {
    [-(k as i64), k as i64 + n as i64 - 2]
}

/// Product spectrum by brute-force enumeration of eigenvalue pairs.
pub fn product_pairs_oracle(left: &[(Scalar, u64)], right: &[(Scalar, u64)], mu_max: Scalar) -> Vec<(Scalar, u64)> {
    let mut out: Vec<(Scalar, u64)> = Vec::new();
    for &(mu, m) in left {
        for &(nu, k) in right {
            let sum = mu + nu;
            if !sum.le(mu_max) {
                continue;
            }
            match out.iter_mut().find(|(v, _)| v.approx_eq(sum)) {
                Some(entry) => entry.1 += m * k,
                None => out.push((sum, m * k)),
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp_tol(y.0));
    out
}

/// Homogeneous solutions `x^gamma phi_k` on the cone over `S^{n-1}` admitted at
/// `beta` minus those admitted at `reference`, weighted by multiplicity.
pub fn counting_index_oracle(n: u32, s: f64, beta: f64, reference: f64) -> i64 {
    let a = (n as f64 - 2.0) * s;
    let reach = (beta - a / 2.0).abs().max((reference - a / 2.0).abs()) + 1.0;
    let mut index = 0i64;
    for k in 0.. {
        let mu = (k * (k + n - 2)) as f64;
        let op = RadialOperator::new(a, mu);
        let (lo, hi) = op.homogeneous_exponents();
        if (hi - lo) / 2.0 > reach {
            break;
        }
        let mult = harmonic_rank_oracle(n, k).dimension as i64;
        for gamma in [lo, hi] {
            let here = membership(gamma, 0, beta, 2.0).expect("p = 2");
            let there = membership(gamma, 0, reference, 2.0).expect("p = 2");
            index += mult * (here as i64 - there as i64);
        }
    }
    index
}

/// `int_0^inf x^{m} e^{-x} dx` by repeated integration by parts: `I(m) = m I(m-1)`, `I(0) = 1`.
pub fn integration_by_parts_factorial(m: u32) -> f64 {
    (1..=m).fold(1.0, |acc, j| acc * j as f64)
}

/// Laplace eigenvalues `mu` of a table with a homogeneous solution `x^gamma`
/// strictly inside the critical strip: admitted at `beta` (`beta + gamma > 0`)
/// and strictly outside weight `beta - 2s` (`beta - 2s + gamma < 0`).
/// Returns `(mu, gamma)`.
pub fn strip_oracle_laplace(a: f64, s: f64, table: &SpectrumTable, beta: f64) -> Vec<(f64, f64)> {
    const EDGE: f64 = 1e-12;
    let mut out = Vec::new();
    for e in table.entries() {
        let mu = e.value.to_f64();
        let (lo, hi) = RadialOperator::new(a, mu).homogeneous_exponents();
        for gamma in if lo == hi { vec![lo] } else { vec![lo, hi] } {
            if beta + gamma > EDGE && beta - 2.0 * s + gamma < -EDGE {
                out.push((mu, gamma));
            }
        }
    }
    out
}

fn derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Scalar curvature of `x^{2s-2}(dx^2 + x^2 g_F)` at `x`, where `g_F` has constant
/// scalar curvature `kappa_f`, from the warped-product expression
/// `kappa_f/f^2 - 2(n-1) f''/f - (n-1)(n-2) f'^2/f^2` in arclength `r`,
/// with every derivative taken by finite differences in `x`.
pub fn warped_product_curvature(n: u32, s: f64, kappa_f: f64, x: f64) -> f64 {
    let m = n as f64 - 1.0;
    let lapse = move |y: f64| y.powf(s - 1.0);
    let warp = move |y: f64| y.powf(s);
    let h = 1e-3 * x;
    // d/dr = (1/lapse) d/dx
    let f_r = move |y: f64| derivative(&warp, y, 1e-3 * y) / lapse(y);
    let f = warp(x);
    let fr = f_r(x);
    let frr = derivative(&f_r, x, h) / lapse(x);
    kappa_f / (f * f) - 2.0 * m * frr / f - m * (m - 1.0) * fr * fr / (f * f)
}

/// `int_{-depth}^{0} |e^{(beta+gamma) t} t^m|^p dt` by the composite Simpson rule.
pub fn weighted_norm_quadrature(gamma: f64, logpow: u32, beta: f64, p: f64, depth: f64) -> f64 {
    // fixed step so nested depths share their nodes
    let steps = ((depth * 20.0).ceil() as usize).max(1) * 2;
    let h = depth / steps as f64;
    let g = |t: f64| ((beta + gamma) * t).exp().powf(p) * t.abs().powi(logpow as i32).powf(p);
    let mut sum = g(-depth) + g(0.0);
    for j in 1..steps {
        let t = -depth + j as f64 * h;
        sum += if j % 2 == 1 { 4.0 } else { 2.0 } * g(t);
    }
    sum * h / 3.0
}

/// Classifies convergence of the weighted norm near `x = 0` from nested depths:
/// converged when doubling the depth changes the value by less than `1e-8`
/// relative, divergent once it exceeds `1e6` times its value at the first depth.
pub fn quadrature_membership(gamma: f64, logpow: u32, beta: f64, p: f64) -> bool {
    let first = weighted_norm_quadrature(gamma, logpow, beta, p, 25.0);
    let bound = 1e6 * first.max(f64::MIN_POSITIVE);
    let mut previous = first;
    let mut depth = 50.0;
    while depth <= 1.0e4 {
        let value = weighted_norm_quadrature(gamma, logpow, beta, p, depth);
        if !value.is_finite() || value > bound {
            return false;
        }
        if (value - previous).abs() <= 1e-8 * value.abs().max(f64::MIN_POSITIVE) {
            return true;
        }
        previous = value;
        depth *= 2.0;
    }
    false
}
