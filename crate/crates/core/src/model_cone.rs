//! Per-mode analysis on the exact model cone.
//!
//! On the `mu`-eigenmode of the link the Laplacian reduces to
//! `L_mu = D^2 + aD - mu` with `D = x d/dx`, which is translation invariant in
//! `t = log x`. Everything here works in that coordinate: membership of
//! `x^gamma (log x)^m` in weighted spaces, the Mellin transform as a uniform
//! quadrature in `t`, Euler solutions with logarithmic resonance, exponent
//! fitting, and the scalar-curvature formulas used for the Dirac windows.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::link_spectra::SpectrumTable;
use crate::symbols::ConeData;

/// Coefficients closer than this are treated as the same exponent.
const EXPONENT_TOLERANCE: f64 = 1e-12;

/// Smallest discriminant treated as nonzero when detecting resonance.
const RESONANCE_TOLERANCE: f64 = 1e-10;

/// Condition number above which an exponent fit is refused.
pub const MAX_CONDITION: f64 = 1e10;

/// One summand `coeff * x^gamma * (log x)^logpow` on the `mu`-mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeTerm {
    pub coeff: f64,
    pub gamma: f64,
    pub logpow: u32,
    pub mu: f64,
}

impl ModeTerm {
    pub fn new(coeff: f64, gamma: f64, logpow: u32, mu: f64) -> Self {
        ModeTerm { coeff, gamma, logpow, mu }
    }

    fn same_shape(&self, other: &ModeTerm) -> bool {
        self.logpow == other.logpow
            && (self.gamma - other.gamma).abs() <= EXPONENT_TOLERANCE
            && (self.mu - other.mu).abs() <= EXPONENT_TOLERANCE
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x.ln();
        self.coeff * (self.gamma * t).exp() * t.powi(self.logpow as i32)
    }
}

/// A finite sum of [`ModeTerm`]s, kept normalized: no two terms share
/// `(gamma, logpow, mu)` and no coefficient is exactly zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModeFunction {
    terms: Vec<ModeTerm>,
}

impl ModeFunction {
    pub fn new(terms: impl IntoIterator<Item = ModeTerm>) -> Self {
        let mut merged: Vec<ModeTerm> = Vec::new();
        for term in terms {
            match merged.iter_mut().find(|m| m.same_shape(&term)) {
                Some(m) => m.coeff += term.coeff,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged.sort_by(|x, y| {
            x.mu.total_cmp(&y.mu)
                .then(x.gamma.total_cmp(&y.gamma))
                .then(x.logpow.cmp(&y.logpow))
        });
        ModeFunction { terms: merged }
    }

    pub fn zero() -> Self {
        ModeFunction::default()
    }

    pub fn terms(&self) -> &[ModeTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn sub(&self, other: &ModeFunction) -> ModeFunction {
        ModeFunction::new(
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|t| ModeTerm { coeff: -t.coeff, ..*t })),
        )
    }

    /// Largest absolute coefficient; 0 for the zero function.
    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }
}

/// Uniform grid in `t = log x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogGrid {
    t_min: f64,
    t_max: f64,
    count: usize,
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::invalid(format!("grid needs t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if count < 2 {
            return Err(Error::invalid("grid needs at least 2 points"));
        }
        Ok(LogGrid { t_min, t_max, count })
    }

    /// `t in [-30, 30]` with `2^14` points.
    pub fn reference() -> Self {
        LogGrid { t_min: -30.0, t_max: 30.0, count: 1 << 14 }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.count - 1) as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.spacing()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.t(j).exp()
    }

    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|j| self.t(j))
    }

    /// Samples `f(x_j)`.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.count).map(|j| f(self.x(j))).collect()
    }

    fn check_samples(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.count {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                self.count,
                samples.len()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// membership

/// Whether `x^gamma (log x)^logpow` lies in `x^{-beta} L^p(d+x)` near `x = 0`.
///
/// Log powers never rescue the boundary case `beta + gamma = 0`.
pub fn membership(gamma: f64, _logpow: u32, beta: f64, p: f64) -> Result<bool> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("integrability exponent must exceed 1, got {p}")));
    }
    Ok(beta + gamma > EXPONENT_TOLERANCE)
}

/// Whether `sup_{x <= x0} x^beta |u|` is finite; every term must be a member at `beta`.
pub fn decay_check(mf: &ModeFunction, beta: f64) -> Result<bool> {
    for term in mf.terms() {
        if !membership(term.gamma, term.logpow, beta, 2.0)? {
            return Err(Error::Precondition(format!(
                "term x^{} (log x)^{} is not in the weighted space at beta = {beta}",
                term.gamma, term.logpow
            )));
        }
    }
    Ok(mf.terms().iter().all(|t| t.gamma > -beta))
}

// ---------------------------------------------------------------------------
// Mellin transform

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MellinValue {
    pub re: f64,
    pub im: f64,
    /// Estimated contribution of the integrand beyond both grid ends.
    pub tail: f64,
}

impl MellinValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Tail of `int |g|` beyond an end, extrapolating the last two samples as an exponential.
fn tail_beyond(last: f64, previous: f64, h: f64, span: f64) -> f64 {
    if last == 0.0 {
        return 0.0;
    }
    if previous > last {
        let rate = (previous / last).ln() / h;
        last / rate
    } else {
        // not decaying: bound by the integrand over another grid span
        last * span
    }
}

/// Trapezoidal `M(f)(zeta) = int f(e^t) e^{zeta t} dt` with a two-sided tail estimate.
pub fn mellin_forward(grid: &LogGrid, samples: &[f64], zeta: Complex64, tolerance: f64) -> Result<MellinValue> {
    grid.check_samples(samples)?;
    let h = grid.spacing();
    let last = grid.count() - 1;
    let integrand = |j: usize| samples[j] * (zeta * grid.t(j)).exp();
    let mut sum = (integrand(0) + integrand(last)) * 0.5;
    for j in 1..last {
        sum += integrand(j);
    }
    let value = sum * h;
    let span = grid.t_max() - grid.t_min();
    let tail = tail_beyond(integrand(0).norm(), integrand(1).norm(), h, span)
        + tail_beyond(integrand(last).norm(), integrand(last - 1).norm(), h, span);
    if tail > tolerance {
        return Err(Error::GridTooShort { tail, tolerance });
    }
    Ok(MellinValue { re: value.re, im: value.im, tail })
}

/// `D f = df/dt` by fourth-order differences (centered inside, one-sided at the ends).
pub fn log_derivative(grid: &LogGrid, samples: &[f64]) -> Result<Vec<f64>> {
    grid.check_samples(samples)?;
    let n = samples.len();
    if n < 5 {
        return Err(Error::invalid("log derivative needs at least 5 samples"));
    }
    let h = grid.spacing();
    let f = samples;
    let mut out = vec![0.0; n];
    for j in 2..n - 2 {
        out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
    }
    let forward = |j: usize| {
        (-25.0 * f[j] + 48.0 * f[j + 1] - 36.0 * f[j + 2] + 16.0 * f[j + 3] - 3.0 * f[j + 4]) / (12.0 * h)
    };
    let backward = |j: usize| {
        (25.0 * f[j] - 48.0 * f[j - 1] + 36.0 * f[j - 2] - 16.0 * f[j - 3] + 3.0 * f[j - 4]) / (12.0 * h)
    };
    out[0] = forward(0);
    out[1] = forward(1);
    out[n - 1] = backward(n - 1);
    out[n - 2] = backward(n - 2);
    Ok(out)
}

/// `|M(Df)(zeta) + zeta M(f)(zeta)|`.
pub fn mellin_derivative_check(
    grid: &LogGrid,
    f: &[f64],
    df: &[f64],
    zeta: Complex64,
    tolerance: f64,
) -> Result<f64> {
    let mf = mellin_forward(grid, f, zeta, tolerance)?.value();
    let mdf = mellin_forward(grid, df, zeta, tolerance)?.value();
    Ok((mdf + zeta * mf).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    /// `||x^{-theta} f||^2` in `L^2(d+x)`.
    pub weighted_norm_sq: f64,
    /// `(1/2pi) int |M f(-theta + i omega)|^2 d omega` over the truncated line.
    pub line_integral: f64,
    pub relative_error: f64,
    /// Bound on the line integrand beyond the truncation, relative to the total.
    pub line_tail: f64,
}

/// Compares the weighted norm of `f` with the `L^2` norm of its Mellin
/// transform on the line `Re zeta = -theta`, measure `d omega / (2 pi)`.
pub fn mellin_isometry_check(
    grid: &LogGrid,
    samples: &[f64],
    theta: f64,
    line_count: usize,
    half_width: f64,
) -> Result<IsometryReport> {
    grid.check_samples(samples)?;
    if line_count < 3 || !(half_width > 0.0) {
        return Err(Error::invalid("line quadrature needs at least 3 points and a positive half width"));
    }
    let h = grid.spacing();
    let weighted: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(j, f)| f * (-theta * grid.t(j)).exp())
        .collect();
    let peak = weighted.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if peak == 0.0 {
        return Err(Error::Precondition("function vanishes on the grid".into()));
    }
    let ends = weighted[0].abs().max(weighted[weighted.len() - 1].abs());
    if ends > 1e-6 * peak {
        return Err(Error::Precondition(format!(
            "x^(-theta) f does not decay at the grid ends (theta = {theta}); f is not in the weighted L^2 space"
        )));
    }

    let last = weighted.len() - 1;
    let weighted_norm_sq = h
        * (weighted.iter().map(|w| w * w).sum::<f64>() - 0.5 * (weighted[0].powi(2) + weighted[last].powi(2)));

    let d_omega = 2.0 * half_width / (line_count - 1) as f64;
    let line_value = |omega: f64| -> f64 {
        let zeta = Complex64::new(-theta, omega);
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, f) in samples.iter().enumerate() {
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            sum += w * f * (zeta * grid.t(j)).exp();
        }
        (sum * h).norm_sqr()
    };
    let values: Vec<f64> = (0..line_count)
        .map(|k| line_value(-half_width + k as f64 * d_omega))
        .collect();
    let line_sum = d_omega * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[line_count - 1]));
    let line_integral = line_sum / (2.0 * PI);

    let edge = values[0].max(values[line_count - 1]);
    let line_peak = values.iter().fold(0.0f64, |m, v| m.max(*v));
    let line_tail = if line_peak > 0.0 { edge / line_peak } else { 0.0 };
    if line_tail > 1e-8 {
        return Err(Error::Precondition(format!(
            "line truncation at |omega| = {half_width} leaves relative tail {line_tail:e}"
        )));
    }
    Ok(IsometryReport {
        weighted_norm_sq,
        line_integral,
        relative_error: (weighted_norm_sq - line_integral).abs() / weighted_norm_sq.abs(),
        line_tail,
    })
}

// ---------------------------------------------------------------------------
// Euler equation on one mode

/// `L_mu = D^2 + aD - mu` acting on the `mu`-mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialOperator {
    pub a: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resonance {
    None,
    Simple,
    Double,
}

impl RadialOperator {
    pub fn new(a: f64, mu: f64) -> Self {
        RadialOperator { a, mu }
    }

    pub fn for_cone(cone: &ConeData, mu: f64) -> Self {
        RadialOperator { a: cone.a().to_f64(), mu }
    }

    /// `L_mu x^gamma = chi(gamma) x^gamma`.
    pub fn chi(&self, gamma: f64) -> f64 {
        gamma * gamma + self.a * gamma - self.mu
    }

    pub fn chi_prime(&self, gamma: f64) -> f64 {
        2.0 * gamma + self.a
    }

    fn discriminant(&self) -> f64 {
        self.a * self.a / 4.0 + self.mu
    }

    /// Exponents of `x^gamma` solving `L_mu u = 0`, ascending. Equal for a double root.
    pub fn homogeneous_exponents(&self) -> (f64, f64) {
        let r = self.discriminant().max(0.0).sqrt();
        (-self.a / 2.0 - r, -self.a / 2.0 + r)
    }

    pub fn resonance(&self, lambda: f64) -> Resonance {
        let (lo, hi) = self.homogeneous_exponents();
        let double = self.discriminant().abs() <= RESONANCE_TOLERANCE;
        let hits = (lambda - lo).abs() <= RESONANCE_TOLERANCE || (lambda - hi).abs() <= RESONANCE_TOLERANCE;
        match (hits, double) {
            (false, _) => Resonance::None,
            (true, false) => Resonance::Simple,
            (true, true) => Resonance::Double,
        }
    }

    /// The homogeneous basis `{x^g-, x^g+}`, or `{x^g, x^g log x}` at a double root.
    pub fn homogeneous_basis(&self) -> [ModeTerm; 2] {
        let (lo, hi) = self.homogeneous_exponents();
        if self.discriminant().abs() <= RESONANCE_TOLERANCE {
            let g = -self.a / 2.0;
            [ModeTerm::new(1.0, g, 0, self.mu), ModeTerm::new(1.0, g, 1, self.mu)]
        } else {
            [ModeTerm::new(1.0, lo, 0, self.mu), ModeTerm::new(1.0, hi, 0, self.mu)]
        }
    }
}

/// Applies `D^2 + aD - mu` term by term, each term using its own `mu`.
pub fn apply_radial_operator(a: f64, mf: &ModeFunction) -> ModeFunction {
    let mut out = Vec::new();
    for term in mf.terms() {
        let op = RadialOperator::new(a, term.mu);
        let (g, m, c) = (term.gamma, term.logpow, term.coeff);
        // D (x^g t^m) = x^g (g t^m + m t^{m-1})
        out.push(ModeTerm::new(c * op.chi(g), g, m, term.mu));
        if m >= 1 {
            out.push(ModeTerm::new(c * op.chi_prime(g) * m as f64, g, m - 1, term.mu));
        }
        if m >= 2 {
            out.push(ModeTerm::new(c * (m * (m - 1)) as f64, g, m - 2, term.mu));
        }
    }
    ModeFunction::new(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerSolution {
    pub particular: ModeFunction,
    pub resonance: Resonance,
    pub homogeneous: [ModeTerm; 2],
}

/// Particular solution of `L_mu U = c x^lambda (log x)^m`.
///
/// Writing `U = x^lambda q(log x)` gives `q'' + chi'(lambda) q' + chi(lambda) q = c t^m`,
/// solved by a polynomial `q` of degree `m`, `m + 1` or `m + 2` according to
/// whether `lambda` is a non-root, simple root or double root of `chi`.
pub fn euler_solve_mode(op: RadialOperator, rhs: ModeTerm) -> EulerSolution {
    let (c, lambda, m) = (rhs.coeff, rhs.gamma, rhs.logpow as usize);
    let resonance = op.resonance(lambda);
    let chi = op.chi(lambda);
    let chi1 = op.chi_prime(lambda);

    let q: Vec<f64> = match resonance {
        Resonance::None => {
            // chi q_k + chi' (k+1) q_{k+1} + (k+2)(k+1) q_{k+2} = c [k = m]
            let mut q = vec![0.0; m + 3];
            for k in (0..=m).rev() {
                let forcing = if k == m { c } else { 0.0 };
                q[k] = (forcing - chi1 * (k + 1) as f64 * q[k + 1] - ((k + 2) * (k + 1)) as f64 * q[k + 2]) / chi;
            }
            q.truncate(m + 1);
            q
        }
        Resonance::Simple => {
            // r = q' solves r' + chi' r = c t^m
            let mut r = vec![0.0; m + 2];
            for k in (0..=m).rev() {
                let forcing = if k == m { c } else { 0.0 };
                r[k] = (forcing - (k + 1) as f64 * r[k + 1]) / chi1;
            }
            let mut q = vec![0.0; m + 2];
            for k in 0..=m {
                q[k + 1] = r[k] / (k + 1) as f64;
            }
            q
        }
        Resonance::Double => {
            let mut q = vec![0.0; m + 3];
            q[m + 2] = c / ((m + 1) * (m + 2)) as f64;
            q
        }
    };
    let particular = ModeFunction::new(
        q.iter()
            .enumerate()
            .map(|(k, coeff)| ModeTerm::new(*coeff, lambda, k as u32, rhs.mu)),
    );
    EulerSolution { particular, resonance, homogeneous: op.homogeneous_basis() }
}

// ---------------------------------------------------------------------------
// model problem report

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomogeneousMode {
    pub mu: f64,
    pub gamma: f64,
    pub logpow: u32,
    pub mult: u64,
    pub admitted: bool,
    pub admitted_at_reference: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhsVerdict {
    pub term: ModeTerm,
    /// `lambda + 2s`: exponent of the forcing in `L_mu U = x^{2s} f`.
    pub forcing_exponent: f64,
    pub data_member: bool,
    pub particular: ModeFunction,
    pub resonance: Resonance,
    pub particular_admitted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelReport {
    pub beta: f64,
    /// Midpoint of the base window, against which kernel and cokernel are counted.
    pub reference_beta: f64,
    pub p: f64,
    pub modes: Vec<HomogeneousMode>,
    /// Homogeneous solutions admitted at `beta` but not at the reference weight.
    pub kernel: Vec<HomogeneousMode>,
    /// Homogeneous solutions admitted at the reference weight but not at `beta`.
    pub obstructed: Vec<HomogeneousMode>,
    pub rhs: Vec<RhsVerdict>,
    /// Positions of rhs terms with no admissible particular solution.
    pub unsolvable_terms: Vec<usize>,
    /// `sum mult(kernel) - sum mult(obstructed)`.
    pub index: i64,
}

/// Mode-by-mode solution of `Delta u = f` on the exact cone, with data in
/// the space of weight `beta + 2s` and solutions sought at weight `beta`.
pub fn solve_model_problem(
    cone: &ConeData,
    table: &SpectrumTable,
    rhs: &ModeFunction,
    beta: f64,
    p: f64,
) -> Result<ModelReport> {
    membership(0.0, 0, 0.0, p)?;
    let a = cone.a().to_f64();
    let s = cone.s().to_f64();
    let reference_beta = a / 2.0;
    let reach = (beta - reference_beta).abs();
    table.require_open(crate::scalar::Scalar::float(reach * reach - a * a / 4.0))?;

    let mut modes = Vec::new();
    for e in table.entries() {
        let op = RadialOperator::new(a, e.value.to_f64());
        let basis = op.homogeneous_basis();
        for term in basis {
            modes.push(HomogeneousMode {
                mu: op.mu,
                gamma: term.gamma,
                logpow: term.logpow,
                mult: e.mult,
                admitted: membership(term.gamma, term.logpow, beta, p)?,
                admitted_at_reference: membership(term.gamma, term.logpow, reference_beta, p)?,
            });
        }
    }
    let kernel: Vec<HomogeneousMode> = modes.iter().copied().filter(|m| m.admitted && !m.admitted_at_reference).collect();
    let obstructed: Vec<HomogeneousMode> = modes.iter().copied().filter(|m| !m.admitted && m.admitted_at_reference).collect();
    let index = kernel.iter().map(|m| m.mult as i64).sum::<i64>() - obstructed.iter().map(|m| m.mult as i64).sum::<i64>();

    let mut verdicts = Vec::new();
    let mut unsolvable_terms = Vec::new();
    for (i, term) in rhs.terms().iter().enumerate() {
        if !term.coeff.is_finite() || !term.gamma.is_finite() {
            return Err(Error::invalid("rhs terms must be finite"));
        }
        let forcing_exponent = term.gamma + 2.0 * s;
        let forcing = ModeTerm { gamma: forcing_exponent, ..*term };
        let solution = euler_solve_mode(RadialOperator::new(a, term.mu), forcing);
        let particular_admitted = solution
            .particular
            .terms()
            .iter()
            .map(|t| membership(t.gamma, t.logpow, beta, p))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|ok| ok);
        if !particular_admitted {
            unsolvable_terms.push(i);
        }
        verdicts.push(RhsVerdict {
            term: *term,
            forcing_exponent,
            data_member: membership(term.gamma, term.logpow, beta + 2.0 * s, p)?,
            particular: solution.particular,
            resonance: solution.resonance,
            particular_admitted,
        });
    }

    Ok(ModelReport { beta, reference_beta, p, modes, kernel, obstructed, rhs: verdicts, unsolvable_terms, index })
}

// ---------------------------------------------------------------------------
// exponent fitting

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FittedExponents {
    /// Growth rate of `log|U|` as `t -> -infinity` (the smaller exponent).
    pub at_zero: f64,
    /// Growth rate of `log|U|` as `t -> +infinity` (the larger exponent).
    pub at_infinity: f64,
}

/// Marches the three-point scheme and returns `log|U_j|` along the march.
fn march_log_abs(first: f64, second: f64, steps: usize, next: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    if !(first.is_finite() && second.is_finite()) || (first == 0.0 && second == 0.0) {
        return Err(Error::DegenerateSeed("seed values must be finite and not both zero".into()));
    }
    let mut out = Vec::with_capacity(steps);
    let (mut prev, mut cur, mut offset) = (first, second, 0.0f64);
    out.push(prev.abs().ln());
    out.push(cur.abs().ln());
    while out.len() < steps {
        let new = next(prev, cur);
        prev = cur;
        cur = new;
        let scale = cur.abs().max(prev.abs());
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::DegenerateSeed("finite-difference solution collapsed".into()));
        }
        if !(1e-100..=1e100).contains(&scale) {
            prev /= scale;
            cur /= scale;
            offset += scale.ln();
        }
        out.push(cur.abs().ln() + offset);
    }
    Ok(out)
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Finite-difference oracle for the homogeneous exponents of `L_mu`.
///
/// `U'' + aU' - mu U = 0` is discretized by centered differences in `t`,
/// marched forward from `seed` at the left end and backward from `seed` at
/// the right end; `log|U|` is fitted on the far quarter of each march.
pub fn fd_exponent_oracle(op: RadialOperator, grid: &LogGrid, seed: (f64, f64)) -> Result<FittedExponents> {
    if grid.t_max() - grid.t_min() < 6.0 * std::f64::consts::LN_10 {
        return Err(Error::invalid("finite-difference oracle needs a grid spanning at least 6 decades"));
    }
    if op.mu < 0.0 {
        return Err(Error::invalid("eigenvalue must be nonnegative"));
    }
    let n = grid.count();
    if n < 16 {
        return Err(Error::invalid("finite-difference oracle needs at least 16 points"));
    }
    let h = grid.spacing();
    let (plus, minus, centre) = (1.0 + op.a * h / 2.0, 1.0 - op.a * h / 2.0, 2.0 + op.mu * h * h);

    let forward = march_log_abs(seed.0, seed.1, n, |prev, cur| (centre * cur - minus * prev) / plus)?;
    let backward = march_log_abs(seed.0, seed.1, n, |prev, cur| (centre * cur - plus * prev) / minus)?;

    let quarter = n / 4;
    let ts: Vec<f64> = grid.ts().collect();
    let right_t = &ts[n - quarter..];
    let right_y = &forward[n - quarter..];
    // backward[j] sits at t_{n-1-j}
    let left_t: Vec<f64> = (n - quarter..n).map(|j| ts[n - 1 - j]).collect();
    let left_y = &backward[n - quarter..];

    let fitted = FittedExponents {
        at_zero: regression_slope(&left_t, left_y),
        at_infinity: regression_slope(right_t, right_y),
    };
    if !(fitted.at_zero.is_finite() && fitted.at_infinity.is_finite()) {
        return Err(Error::DegenerateSeed("fit produced a non-finite slope".into()));
    }
    Ok(fitted)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub coefficients: Vec<f64>,
    /// `||A c - y|| / ||y||`.
    pub relative_residual: f64,
    pub condition: f64,
}

/// Least-squares coefficients of `samples` against `x^gamma (log x)^m` for each candidate.
pub fn asymptotics_extraction(grid: &LogGrid, samples: &[f64], candidates: &[(f64, u32)]) -> Result<Extraction> {
    grid.check_samples(samples)?;
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate exponents"));
    }
    for (i, c) in candidates.iter().enumerate() {
        if candidates[..i].iter().any(|d| d.1 == c.1 && (d.0 - c.0).abs() <= EXPONENT_TOLERANCE) {
            return Err(Error::invalid(format!("duplicate candidate (gamma {}, log power {})", c.0, c.1)));
        }
    }
    let rows = grid.count();
    let cols = candidates.len();
    let mut design = DMatrix::<f64>::zeros(rows, cols);
    for (j, t) in grid.ts().enumerate() {
        for (k, (gamma, m)) in candidates.iter().enumerate() {
            design[(j, k)] = (gamma * t).exp() * t.powi(*m as i32);
        }
    }
    let scales: Vec<f64> = (0..cols).map(|k| design.column(k).norm()).collect();
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    for (k, s) in scales.iter().enumerate() {
        design.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let y = DVector::from_column_slice(samples);
    let scaled = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::invalid(format!("least squares failed: {e}")))?;
    let residual = (&design * &scaled - &y).norm();
    let norm = y.norm();
    let coefficients = scaled.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok(Extraction {
        coefficients,
        relative_residual: if norm > 0.0 { residual / norm } else { residual },
        condition,
    })
}

// ---------------------------------------------------------------------------
// scalar curvature

/// Coefficient of `x^{-2}` in the scalar curvature of `dx^2 + x^2 g_F`.
pub fn scalar_curvature_leading(n: u32, kappa_f: f64) -> f64 {
    let n = n as f64;
    kappa_f - (n - 1.0) * (n - 2.0)
}

/// Scalar curvature of `g_s = x^{2s-2} g_bar` from that of `g_bar`:
/// `x^{-alpha(n+2)/(n-2)} ((n-1)(n-2)(1-s^2) x^{alpha-2} + kappa_bar(x) x^alpha)`
/// with `alpha = (s-1)(n-2)/2`.
pub fn conformal_scalar_identity(n: u32, s: f64, kappa_bar: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("conformal identity needs n >= 3, got {n}")));
    }
    if !(x > 0.0) {
        return Err(Error::invalid(format!("radial coordinate must be positive, got {x}")));
    }
    let nf = n as f64;
    let alpha = (s - 1.0) * (nf - 2.0) / 2.0;
    let prefactor = x.powf(-alpha * (nf + 2.0) / (nf - 2.0));
    Ok(prefactor * ((nf - 1.0) * (nf - 2.0) * (1.0 - s * s) * x.powf(alpha - 2.0) + kappa_bar(x) * x.powf(alpha)))
}
