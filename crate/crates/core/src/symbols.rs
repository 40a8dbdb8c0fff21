//! Conormal symbols and their roots (indicial roots).
//!
//! Per link eigenmode the frozen radial Laplacian is `D^2 + aD - mu` with
//! `D = x d/dx` and `a = (n-2)s`. Under the Mellin rule `M(Df) = -zeta M(f)`
//! its symbol is `zeta^2 - a zeta - mu` (upstairs). Conjugating by
//! `x^{n/2}` gives the downstairs symbol
//! `zeta^2 + (n-a) zeta + n(n-2a)/4 - mu`, whose roots sit `n/2` to the left.
//! A root `zeta` corresponds to the homogeneous solution `x^{-zeta}` upstairs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::link_spectra::{DiracSpectrumTable, SpectrumTable};
use crate::scalar::Scalar;

/// Geometry of the model cone: dimension `n` of the smooth locus and
/// conformal exponent `s`. The exponents `a` and `a_hat` are derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeData {
    n: u32,
    s: Scalar,
}

impl ConeData {
    pub fn new(n: u32, s: impl Into<Scalar>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("cone dimension must be at least 3, got {n}")));
        }
        let s = s.into();
        if !s.is_finite() {
            return Err(Error::invalid("conformal exponent s must be finite"));
        }
        Ok(ConeData { n, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> Scalar {
        self.s
    }

    /// `a = (n-2)s`, the first-order coefficient of the radial Laplacian.
    pub fn a(&self) -> Scalar {
        self.s * (self.n as i64 - 2)
    }

    /// `a_hat = (n-1)s/2`, the zeroth-order shift of the radial Dirac operator.
    pub fn a_hat(&self) -> Scalar {
        self.s * (self.n as i64 - 1) / 2
    }

    pub fn half_n(&self) -> Scalar {
        Scalar::ratio(self.n as i64, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Before conjugation by `x^{n/2}`.
    Upstairs,
    /// After conjugation by `x^{n/2}`.
    Downstairs,
}

impl Convention {
    /// Offset added to an upstairs root: `0` or `-n/2`.
    pub fn shift(self, n: u32) -> Scalar {
        match self {
            Convention::Upstairs => Scalar::zero(),
            Convention::Downstairs => -Scalar::ratio(n as i64, 2),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Convention::Upstairs => "upstairs",
            Convention::Downstairs => "downstairs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Laplace,
    Dirac,
    Generic,
}

/// One real root of a conormal symbol on one link eigenmode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndicialRoot {
    pub zeta: Scalar,
    /// The link eigenvalue (`mu` or `theta`) that generates this root.
    pub source: Scalar,
    pub mult: u64,
    pub operator: OperatorKind,
    pub convention: Convention,
}

impl IndicialRoot {
    /// Exponent `gamma` of the matching homogeneous solution `x^gamma`.
    pub fn exponent(&self, n: u32) -> Scalar {
        -(self.zeta - self.convention.shift(n))
    }
}

fn check_mu(mu: Scalar) -> Result<()> {
    if mu.is_negative() || !mu.is_finite() {
        Err(Error::invalid(format!("Laplace eigenvalue must be nonnegative, got {mu}")))
    } else {
        Ok(())
    }
}

fn root_pair(
    lo: Scalar,
    hi: Scalar,
    source: Scalar,
    mult: u64,
    operator: OperatorKind,
    convention: Convention,
) -> [IndicialRoot; 2] {
    let mk = |zeta| IndicialRoot { zeta, source, mult, operator, convention };
    [mk(lo), mk(hi)]
}

/// Roots of `zeta^2 - a zeta - mu`: `a/2 -+ sqrt(a^2/4 + mu)`, ascending.
pub fn laplace_roots_upstairs(cone: &ConeData, mu: Scalar) -> Result<[IndicialRoot; 2]> {
    laplace_roots(cone, mu, 1, Convention::Upstairs)
}

/// Roots of `zeta^2 + (n-a) zeta + n(n-2a)/4 - mu`:
/// `(a-n)/2 -+ sqrt(a^2 + 4mu)/2`, ascending.
pub fn laplace_roots_downstairs(cone: &ConeData, mu: Scalar) -> Result<[IndicialRoot; 2]> {
    laplace_roots(cone, mu, 1, Convention::Downstairs)
}

/// Both roots on the `mu`-mode, tagged with `mult`, in either convention.
pub fn laplace_roots(
    cone: &ConeData,
    mu: Scalar,
    mult: u64,
    convention: Convention,
) -> Result<[IndicialRoot; 2]> {
    check_mu(mu)?;
    let a = cone.a();
    let (centre, radius) = match convention {
        Convention::Upstairs => (a / 2, (a * a / 4 + mu).sqrt()),
        Convention::Downstairs => (
            (a - cone.n() as i64) / 2,
            (a * a + mu * 4).sqrt().map(|r| r / 2),
        ),
    };
    let radius = radius.ok_or_else(|| Error::invalid("negative discriminant"))?;
    Ok(root_pair(
        centre - radius,
        centre + radius,
        mu,
        mult,
        OperatorKind::Laplace,
        convention,
    ))
}

/// All Laplace roots generated by a table, sorted by `zeta`.
pub fn laplace_root_set(
    cone: &ConeData,
    table: &SpectrumTable,
    convention: Convention,
) -> Result<Vec<IndicialRoot>> {
    let mut roots = Vec::with_capacity(2 * table.entries().len());
    for e in table.entries() {
        roots.extend(laplace_roots(cone, e.value, e.mult, convention)?);
    }
    roots.sort_by(|x, y| x.zeta.cmp_tol(y.zeta));
    Ok(roots)
}

/// Root of the Dirac symbol on the `theta`-mode: `a_hat + theta` upstairs,
/// `a_hat + theta - n/2` downstairs.
pub fn dirac_roots(cone: &ConeData, theta: Scalar, convention: Convention) -> IndicialRoot {
    let zeta = match convention {
        Convention::Upstairs => cone.a_hat() + theta,
        Convention::Downstairs => cone.a_hat() + theta - cone.half_n(),
    };
    IndicialRoot {
        zeta,
        source: theta,
        mult: 1,
        operator: OperatorKind::Dirac,
        convention,
    }
}

pub fn dirac_root_set(
    cone: &ConeData,
    table: &DiracSpectrumTable,
    convention: Convention,
) -> Vec<IndicialRoot> {
    table
        .entries()
        .iter()
        .map(|e| IndicialRoot {
            mult: e.mult,
            ..dirac_roots(cone, e.value, convention)
        })
        .collect()
}

/// Value of the Laplace conormal symbol on the `mu`-mode at `zeta`.
pub fn symbol_eval(cone: &ConeData, zeta: Complex64, mu: f64, convention: Convention) -> Complex64 {
    let a = cone.a().to_f64();
    let n = cone.n() as f64;
    match convention {
        Convention::Upstairs => zeta * zeta - a * zeta - mu,
        Convention::Downstairs => zeta * zeta + (n - a) * zeta + n * (n - 2.0 * a) / 4.0 - mu,
    }
}

/// Real roots of the monic quadratic `zeta^2 + b zeta + c`, ascending, kept
/// exact when the discriminant is a rational square. `None` if complex.
pub fn real_quadratic_roots(b: Scalar, c: Scalar) -> Option<[Scalar; 2]> {
    let centre = -b / 2;
    let radius = (b * b / 4 - c).sqrt()?;
    Some([centre - radius, centre + radius])
}

/// Roots of the asymptotically hyperbolic symbol `zeta^2 + (n-1) zeta + t(n-1-t)`
/// (`t = 0` for the plain Laplacian): `{-t, t-(n-1)}` sorted.
pub fn ah_roots(n: u32, t: Scalar) -> [Scalar; 2] {
    let m = Scalar::int(n as i64 - 1);
    let (x, y) = (-t, t - m);
    if x.le(y) {
        [x, y]
    } else {
        [y, x]
    }
}

/// Converts Fuchs-form coefficients `A_i(0)` (of `sum A_i D^i`) into the
/// coefficients of the conormal symbol `sum (-1)^i A_i(0) zeta^i`.
pub fn conormal_coefficients(fuchs: &[f64]) -> Vec<f64> {
    fuchs
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 0 { c } else { -c })
        .collect()
}

/// A root of a scalar conormal polynomial with its clustered multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexRoot {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
    pub is_real: bool,
}

impl ComplexRoot {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Roots closer than this are merged into one root of higher multiplicity.
pub const ROOT_CLUSTER_TOLERANCE: f64 = 1e-7;
const REAL_TOLERANCE: f64 = 1e-9;

fn poly_eval(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of `c_0 + c_1 zeta + ... + c_m zeta^m`, from the
/// eigenvalues of the companion matrix, Newton-polished, clustered at
/// [`ROOT_CLUSTER_TOLERANCE`] and sorted by real then imaginary part.
pub fn generic_conormal_roots(coeffs: &[f64]) -> Result<Vec<ComplexRoot>> {
    if coeffs.len() < 2 {
        return Err(Error::invalid("conormal polynomial must have degree at least 1"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("conormal coefficients must be finite"));
    }
    let m = coeffs.len() - 1;
    let lead = coeffs[m];
    if lead == 0.0 {
        return Err(Error::invalid("leading conormal coefficient is zero"));
    }

    let companion = DMatrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut raw: Vec<Complex64> = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();

    for z in raw.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = poly_eval(coeffs, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let candidate = *z - step;
            if poly_eval(coeffs, candidate).0.norm() < p.norm() {
                *z = candidate;
            } else {
                break;
            }
        }
    }

    // single-linkage clustering
    let mut cluster_of: Vec<usize> = (0..raw.len()).collect();
    for i in 0..raw.len() {
        for j in 0..i {
            if (raw[i] - raw[j]).norm() < ROOT_CLUSTER_TOLERANCE {
                let (ci, cj) = (cluster_of[i], cluster_of[j]);
                for c in cluster_of.iter_mut() {
                    if *c == ci {
                        *c = cj;
                    }
                }
            }
        }
    }
    let mut ids: Vec<usize> = cluster_of.clone();
    ids.sort_unstable();
    ids.dedup();
    let mut roots: Vec<ComplexRoot> = ids
        .into_iter()
        .map(|id| {
            let members: Vec<Complex64> = raw
                .iter()
                .zip(&cluster_of)
                .filter(|(_, c)| **c == id)
                .map(|(z, _)| *z)
                .collect();
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            let is_real = mean.im.abs() < REAL_TOLERANCE;
            ComplexRoot {
                re: mean.re,
                im: if is_real { 0.0 } else { mean.im },
                mult: members.len(),
                is_real,
            }
        })
        .collect();
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(n: u32, s: i64) -> ConeData {
        ConeData::new(n, s).unwrap()
    }

    fn zetas(r: &[IndicialRoot; 2]) -> [Scalar; 2] {
        [r[0].zeta, r[1].zeta]
    }

    #[test]
    fn derived_exponents() {
        let c = ConeData::new(5, Scalar::ratio(1, 2)).unwrap();
        assert_eq!(c.a().as_exact(), Some(num_rational::Rational64::new(3, 2)));
        assert_eq!(c.a_hat().as_exact(), Some(num_rational::Rational64::from_integer(1)));
        assert!(ConeData::new(2, 1).is_err());
    }

    #[test]
    fn upstairs_examples() {
        assert_eq!(zetas(&laplace_roots_upstairs(&cone(4, 1), Scalar::int(0)).unwrap()), [Scalar::int(0), Scalar::int(2)]);
        let r = laplace_roots_upstairs(&cone(4, 1), Scalar::int(3)).unwrap();
        assert_eq!(zetas(&r), [Scalar::int(-1), Scalar::int(3)]);
        assert!(r[0].zeta.is_exact());
        assert_eq!(zetas(&laplace_roots_upstairs(&cone(5, 0), Scalar::int(4)).unwrap()), [Scalar::int(-2), Scalar::int(2)]);
        assert!(laplace_roots_upstairs(&cone(4, 1), Scalar::int(-1)).is_err());
    }

    #[test]
    fn downstairs_examples() {
        assert_eq!(zetas(&laplace_roots_downstairs(&cone(4, 1), Scalar::int(0)).unwrap()), [Scalar::int(-2), Scalar::int(0)]);
        assert_eq!(zetas(&laplace_roots_downstairs(&cone(4, 1), Scalar::int(3)).unwrap()), [Scalar::int(-3), Scalar::int(1)]);
        // a = -4: Q_0 = zeta^2 + 10 zeta + 21 = (zeta + 3)(zeta + 7)
        assert_eq!(zetas(&laplace_roots_downstairs(&cone(6, -1), Scalar::int(0)).unwrap()), [Scalar::int(-7), Scalar::int(-3)]);
    }

    #[test]
    fn double_root_only_at_a_and_mu_zero() {
        let r = laplace_roots_upstairs(&cone(4, 0), Scalar::int(0)).unwrap();
        assert_eq!(r[0].zeta, r[1].zeta);
        let r = laplace_roots_upstairs(&cone(4, 0), Scalar::int(1)).unwrap();
        assert!(r[0].zeta.lt(r[1].zeta));
    }

    #[test]
    fn dirac_examples() {
        let c = cone(4, 1);
        assert_eq!(dirac_roots(&c, Scalar::ratio(3, 2), Convention::Downstairs).zeta, Scalar::int(1));
        assert_eq!(dirac_roots(&c, Scalar::ratio(-3, 2), Convention::Downstairs).zeta, Scalar::int(-2));
        let up = dirac_roots(&c, Scalar::ratio(1, 3), Convention::Upstairs).zeta;
        let down = dirac_roots(&c, Scalar::ratio(1, 3), Convention::Downstairs).zeta;
        assert_eq!(up, down + Scalar::int(2));
    }

    #[test]
    fn symbol_values() {
        let c = cone(4, 1);
        let v = symbol_eval(&c, Complex64::new(3.0, 0.0), 3.0, Convention::Upstairs);
        assert!(v.norm() < 1e-15);
        let v = symbol_eval(&c, Complex64::new(0.0, 0.0), 3.0, Convention::Upstairs);
        assert_eq!(v, Complex64::new(-3.0, 0.0));
        let v = symbol_eval(&c, Complex64::new(-2.0, 0.0), 0.0, Convention::Downstairs);
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn generic_quadratic_and_linear() {
        let roots = generic_conormal_roots(&[-3.0, -2.0, 1.0]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].re + 1.0).abs() < 1e-12 && (roots[1].re - 3.0).abs() < 1e-12);
        assert!(roots.iter().all(|r| r.is_real && r.mult == 1));
        let roots = generic_conormal_roots(&[-2.5, 1.0]).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].re - 2.5).abs() < 1e-14);
    }

    #[test]
    fn generic_double_root_clusters() {
        // (zeta - 1)^2 (zeta + 2)
        let roots = generic_conormal_roots(&[2.0, -3.0, 0.0, 1.0]).unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].mult, 1);
        assert_eq!(roots[1].mult, 2);
        assert!((roots[1].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn generic_complex_pair() {
        let roots = generic_conormal_roots(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|r| !r.is_real && (r.im.abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn generic_rejects_bad_input() {
        assert!(generic_conormal_roots(&[1.0, 0.0]).is_err());
        assert!(generic_conormal_roots(&[1.0]).is_err());
    }

    #[test]
    fn fuchs_sign_adjustment() {
        // D^2 + 2D - 3  ->  zeta^2 - 2 zeta - 3
        assert_eq!(conormal_coefficients(&[-3.0, 2.0, 1.0]), vec![-3.0, -2.0, 1.0]);
    }

    #[test]
    fn hyperbolic_roots() {
        assert_eq!(ah_roots(4, Scalar::zero()), [Scalar::int(-3), Scalar::int(0)]);
        assert_eq!(ah_roots(4, Scalar::int(3)), [Scalar::int(-3), Scalar::int(0)]);
        assert_eq!(ah_roots(5, Scalar::int(3)), [Scalar::int(-3), Scalar::int(-1)]);
    }
}
