//! Fredholm verdicts from root sets and spectra: ellipticity on a weight
//! line, weight windows, the index ladder, closed-extension criteria and
//! spectral (Witt) conditions, plus the named application windows.
//!
//! Conventions:
//! - weights are open intervals; a query exactly at an indicial root is
//!   reported as on-breakpoint, never as window membership;
//! - the index is 0 on the base window `I_a` (between `0` and `a`) and
//!   increases by the root multiplicity whenever `beta` crosses an upstairs
//!   Laplace root upward.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::link_spectra::{DiracSpectrumTable, SpectrumTable};
use crate::scalar::Scalar;
use crate::symbols::{laplace_roots, ConeData, Convention};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametrization {
    Beta,
    Gamma,
    Delta,
}

impl Parametrization {
    pub fn tag(self) -> &'static str {
        match self {
            Parametrization::Beta => "beta",
            Parametrization::Gamma => "gamma",
            Parametrization::Delta => "delta",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowOperator {
    Laplace,
    Dirac,
    HyperbolicLaplace,
    ShiftedHyperbolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Endpoint {
    NegInf,
    Finite(Scalar),
    PosInf,
}

impl Endpoint {
    pub fn finite(self) -> Option<Scalar> {
        match self {
            Endpoint::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn lt(self, other: Endpoint) -> bool {
        match (self, other) {
            (Endpoint::Finite(a), Endpoint::Finite(b)) => a.lt(b),
            (Endpoint::NegInf, Endpoint::NegInf) | (Endpoint::PosInf, Endpoint::PosInf) => false,
            (Endpoint::NegInf, _) | (_, Endpoint::PosInf) => true,
            _ => false,
        }
    }

    fn map(self, scale: Scalar, offset: Scalar) -> Endpoint {
        let flip = scale.is_negative();
        match self {
            Endpoint::Finite(v) => Endpoint::Finite(v * scale + offset),
            Endpoint::NegInf if flip => Endpoint::PosInf,
            Endpoint::PosInf if flip => Endpoint::NegInf,
            e => e,
        }
    }

    pub fn display(self) -> String {
        match self {
            Endpoint::NegInf => "-inf".to_string(),
            Endpoint::PosInf => "+inf".to_string(),
            Endpoint::Finite(v) => v.display(),
        }
    }
}

/// An open interval of weights on which an operator is Fredholm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightWindow {
    pub lo: Endpoint,
    pub hi: Endpoint,
    pub parametrization: Parametrization,
    pub index: Option<i64>,
    pub operator: WindowOperator,
}

impl WeightWindow {
    pub fn new(
        lo: Endpoint,
        hi: Endpoint,
        parametrization: Parametrization,
        index: Option<i64>,
        operator: WindowOperator,
    ) -> Result<Self> {
        if !lo.lt(hi) {
            return Err(Error::invalid(format!(
                "empty window ({}, {})",
                lo.display(),
                hi.display()
            )));
        }
        Ok(WeightWindow { lo, hi, parametrization, index, operator })
    }

    pub fn finite(
        lo: Scalar,
        hi: Scalar,
        parametrization: Parametrization,
        index: Option<i64>,
        operator: WindowOperator,
    ) -> Result<Self> {
        WeightWindow::new(Endpoint::Finite(lo), Endpoint::Finite(hi), parametrization, index, operator)
    }

    /// Strict membership.
    pub fn contains(&self, value: Scalar) -> bool {
        let v = Endpoint::Finite(value);
        self.lo.lt(v) && v.lt(self.hi)
    }

    /// Finite endpoints, if both are finite.
    pub fn bounds(&self) -> Option<(Scalar, Scalar)> {
        Some((self.lo.finite()?, self.hi.finite()?))
    }

    /// Image under `v -> scale * v + offset`; decreasing maps swap the ends.
    pub fn map_affine(&self, scale: Scalar, offset: Scalar, parametrization: Parametrization) -> WeightWindow {
        let (a, b) = (self.lo.map(scale, offset), self.hi.map(scale, offset));
        let (lo, hi) = if scale.is_negative() { (b, a) } else { (a, b) };
        WeightWindow { lo, hi, parametrization, ..*self }
    }

    pub fn display(&self) -> String {
        format!("({}, {})", self.lo.display(), self.hi.display())
    }
}

/// A weighted Sobolev-Mellin index `(beta, sigma, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedIndex {
    pub beta: Scalar,
    pub sigma: Scalar,
    pub p: Scalar,
}

impl WeightedIndex {
    pub fn new(beta: Scalar, sigma: Scalar, p: Scalar) -> Result<Self> {
        if !p.gt(Scalar::int(1)) {
            return Err(Error::invalid(format!("integrability exponent must exceed 1, got {p}")));
        }
        Ok(WeightedIndex { beta, sigma, p })
    }
}

// ---------------------------------------------------------------------------
// reparametrizations

/// `gamma = n/2 - beta`.
pub fn to_gamma(n: u32, beta: Scalar) -> Scalar {
    Scalar::ratio(n as i64, 2) - beta
}

/// `beta = n/2 - gamma`.
pub fn gamma_to_beta(n: u32, gamma: Scalar) -> Scalar {
    Scalar::ratio(n as i64, 2) - gamma
}

/// Cylindrical ends (`x = e^{-r}`): `delta = -beta`.
pub fn to_delta_acyl(beta: Scalar) -> Scalar {
    -beta
}

/// Asymptotically hyperbolic ends: `beta = -delta + (1-n)/p`.
pub fn to_delta_ah(n: u32, p: Scalar, beta: Scalar) -> Scalar {
    Scalar::int(1 - n as i64) / p - beta
}

pub fn delta_ah_to_beta(n: u32, p: Scalar, delta: Scalar) -> Scalar {
    Scalar::int(1 - n as i64) / p - delta
}

pub fn to_gamma_window(n: u32, window: &WeightWindow) -> WeightWindow {
    window.map_affine(Scalar::int(-1), Scalar::ratio(n as i64, 2), Parametrization::Gamma)
}

pub fn to_delta_acyl_window(window: &WeightWindow) -> WeightWindow {
    window.map_affine(Scalar::int(-1), Scalar::zero(), Parametrization::Delta)
}

pub fn to_delta_ah_window(n: u32, p: Scalar, window: &WeightWindow) -> WeightWindow {
    window.map_affine(Scalar::int(-1), Scalar::int(1 - n as i64) / p, Parametrization::Delta)
}

// ---------------------------------------------------------------------------
// Laplacian on a conformally conical space

/// Every eigenvalue `mu` whose upstairs roots `a/2 -+ r` have reach `r <= reach`
/// satisfies `mu <= reach^2 - a^2/4`.
fn mu_for_reach(cone: &ConeData, reach: Scalar) -> Scalar {
    let a = cone.a();
    reach * reach - a * a / 4
}

/// Whether no upstairs Laplace root lies on the weight line `beta`.
pub fn is_elliptic_at(cone: &ConeData, table: &SpectrumTable, beta: Scalar) -> Result<bool> {
    let reach = (beta - cone.a() / 2).abs();
    table.require_closed(mu_for_reach(cone, reach))?;
    for e in table.entries() {
        for r in laplace_roots(cone, e.value, e.mult, Convention::Upstairs)? {
            if r.zeta.approx_eq(beta) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The window `I_a` between `0` and `a = (n-2)s`, index 0. Needs `n >= 4`, `a != 0`.
pub fn base_window(cone: &ConeData) -> Result<WeightWindow> {
    if cone.n() < 4 {
        return Err(Error::invalid(format!(
            "base window needs n >= 4, got n = {}",
            cone.n()
        )));
    }
    let a = cone.a();
    if a.is_zero() {
        return Err(Error::CylindricalRegime);
    }
    let zero = Scalar::zero();
    WeightWindow::finite(a.min(zero), a.max(zero), Parametrization::Beta, Some(0), WindowOperator::Laplace)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Breakpoint {
    pub beta: Scalar,
    pub jump: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderStep {
    pub beta_lo: Scalar,
    pub beta_hi: Scalar,
    pub index: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum LadderQuery {
    Index(i64),
    OnBreakpoint,
    OutOfRange,
}

/// The Fredholm index of the Laplacian as a step function of `beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexLadder {
    pub beta_min: Scalar,
    pub beta_max: Scalar,
    pub base_window: WeightWindow,
    pub breakpoints: Vec<Breakpoint>,
    pub steps: Vec<LadderStep>,
}

impl IndexLadder {
    pub fn index_at(&self, beta: Scalar) -> LadderQuery {
        if !(self.beta_min.lt(beta) && beta.lt(self.beta_max)) {
            return LadderQuery::OutOfRange;
        }
        if self.breakpoints.iter().any(|b| b.beta.approx_eq(beta)) {
            return LadderQuery::OnBreakpoint;
        }
        self.steps
            .iter()
            .find(|s| s.beta_lo.lt(beta) && beta.lt(s.beta_hi))
            .map(|s| LadderQuery::Index(s.index))
            .unwrap_or(LadderQuery::OutOfRange)
    }
}

/// Index ladder over the open range `(beta_min, beta_max)`.
///
/// The table must list every eigenvalue whose roots fall between the base
/// window and the far ends of the range.
pub fn index_ladder(
    cone: &ConeData,
    table: &SpectrumTable,
    beta_min: Scalar,
    beta_max: Scalar,
) -> Result<IndexLadder> {
    if !beta_min.lt(beta_max) {
        return Err(Error::invalid(format!("invalid range ({beta_min}, {beta_max})")));
    }
    let base = base_window(cone)?;
    let (base_lo, base_hi) = base.bounds().expect("base window is finite");
    let centre = cone.a() / 2;

    // Roots that matter lie in [base_hi, beta_max) or (beta_min, base_lo];
    // all of them have reach strictly below `reach`.
    let mut reach = Scalar::zero();
    if beta_max.gt(base_hi) {
        reach = reach.max(beta_max - centre);
    }
    if beta_min.lt(base_lo) {
        reach = reach.max(centre - beta_min);
    }
    table.require_open(mu_for_reach(cone, reach))?;

    let mut roots: Vec<(Scalar, u64)> = Vec::new();
    for e in table.entries() {
        for r in laplace_roots(cone, e.value, e.mult, Convention::Upstairs)? {
            if (r.zeta - centre).abs().lt(reach) {
                roots.push((r.zeta, r.mult));
            }
        }
    }
    roots.sort_by(|x, y| x.0.cmp_tol(y.0));

    let reference = (base_lo + base_hi) / 2;
    let index_of = |beta: Scalar| -> i64 {
        let mut index = 0i64;
        for &(zeta, mult) in &roots {
            if reference.le(zeta) && zeta.lt(beta) {
                index += mult as i64;
            } else if beta.le(zeta) && zeta.lt(reference) {
                index -= mult as i64;
            }
        }
        index
    };

    let mut breakpoints: Vec<Breakpoint> = Vec::new();
    for &(zeta, mult) in &roots {
        if !(beta_min.lt(zeta) && zeta.lt(beta_max)) {
            continue;
        }
        match breakpoints.last_mut() {
            Some(last) if last.beta.approx_eq(zeta) => last.jump += mult,
            _ => breakpoints.push(Breakpoint { beta: zeta, jump: mult }),
        }
    }

    let mut cuts = vec![beta_min];
    cuts.extend(breakpoints.iter().map(|b| b.beta));
    cuts.push(beta_max);
    let steps = cuts
        .windows(2)
        .map(|w| LadderStep {
            beta_lo: w[0],
            beta_hi: w[1],
            index: index_of((w[0] + w[1]) / 2),
        })
        .collect();

    Ok(IndexLadder { beta_min, beta_max, base_window: base, breakpoints, steps })
}

/// Asymptotically conical at the origin (`s = 1`), in `gamma`: `((4-n)/2, n/2)`.
pub fn window_ac0(n: u32) -> Result<WeightWindow> {
    if n < 4 {
        return Err(Error::invalid(format!("AC0 window needs n >= 4, got n = {n}")));
    }
    let n = n as i64;
    WeightWindow::finite(
        Scalar::ratio(4 - n, 2),
        Scalar::ratio(n, 2),
        Parametrization::Gamma,
        Some(0),
        WindowOperator::Laplace,
    )
}

/// Asymptotically conical at infinity (`s = -1`), in `beta`: `(2-n, 0)`.
pub fn window_acinf(n: u32) -> Result<WeightWindow> {
    if n < 4 {
        return Err(Error::invalid(format!("ACinf window needs n >= 4, got n = {n}")));
    }
    WeightWindow::finite(
        Scalar::int(2 - n as i64),
        Scalar::zero(),
        Parametrization::Beta,
        Some(0),
        WindowOperator::Laplace,
    )
}

/// Cylindrical ends (`s = 0`) in `delta = -beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AcylReport {
    /// `(0, sqrt(mu_1))`.
    pub primary: WeightWindow,
    /// Every `delta = -+sqrt(mu)` within the covered range, ascending.
    pub failure_points: Vec<Scalar>,
    /// Fredholm intervals between consecutive failure points.
    pub gaps: Vec<WeightWindow>,
    /// Failure points are known for `|delta|` up to this bound (`None`: everywhere).
    pub known_up_to: Option<Scalar>,
}

impl AcylReport {
    /// Fredholm unless `delta` is a failure point; errors beyond the covered range.
    pub fn is_fredholm(&self, delta: Scalar) -> Result<bool> {
        if let Some(bound) = self.known_up_to {
            if delta.abs().ge(bound) {
                return Err(Error::InsufficientSpectrum {
                    label: "acyl".into(),
                    required: delta.abs() * delta.abs(),
                    available: format!("|delta| < {bound}"),
                });
            }
        }
        Ok(!self.failure_points.iter().any(|f| f.approx_eq(delta)))
    }
}

pub fn acyl_windows(n: u32, table: &SpectrumTable) -> Result<AcylReport> {
    let cone = ConeData::new(n, 0)?;
    let mu1 = crate::link_spectra::first_positive_eigenvalue(table)?;
    let root1 = mu1.sqrt().ok_or_else(|| Error::invalid("negative eigenvalue"))?;
    let primary = WeightWindow::finite(Scalar::zero(), root1, Parametrization::Delta, None, WindowOperator::Laplace)?;

    let mut points: Vec<Scalar> = Vec::new();
    for e in table.entries() {
        for r in laplace_roots(&cone, e.value, e.mult, Convention::Upstairs)? {
            let delta = to_delta_acyl(r.zeta);
            if !points.iter().any(|p| p.approx_eq(delta)) {
                points.push(delta);
            }
        }
    }
    points.sort_by(|x, y| x.cmp_tol(*y));

    let known_up_to = match table.truncation() {
        crate::link_spectra::Truncation::Complete => None,
        crate::link_spectra::Truncation::Through(b) | crate::link_spectra::Truncation::Below(b) => {
            // Through(b) also knows delta = sqrt(b) itself; keep the bound conservative.
            Some(b.sqrt().unwrap_or_else(Scalar::zero))
        }
    };
    let mut gaps = Vec::new();
    if known_up_to.is_none() {
        if let Some(first) = points.first() {
            gaps.push(WeightWindow::new(Endpoint::NegInf, Endpoint::Finite(*first), Parametrization::Delta, None, WindowOperator::Laplace)?);
        }
    }
    for w in points.windows(2) {
        gaps.push(WeightWindow::finite(w[0], w[1], Parametrization::Delta, None, WindowOperator::Laplace)?);
    }
    if known_up_to.is_none() {
        if let Some(last) = points.last() {
            gaps.push(WeightWindow::new(Endpoint::Finite(*last), Endpoint::PosInf, Parametrization::Delta, None, WindowOperator::Laplace)?);
        }
    }
    Ok(AcylReport { primary, failure_points: points, gaps, known_up_to })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// Asymptotically conical at the origin; weight given as `gamma`.
    Ac0,
    /// Asymptotically conical at infinity; weight given as `beta`.
    AcInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConifoldEnd {
    pub kind: EndKind,
    pub n: u32,
    pub weight: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndVerdict {
    /// 1-based position in the input list.
    pub end: usize,
    pub kind: EndKind,
    pub weight: Scalar,
    pub window: WeightWindow,
    pub inside: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConifoldVerdict {
    pub ends: Vec<EndVerdict>,
    pub pass: bool,
    pub failing: Vec<usize>,
}

/// Checks each end's weight against its own window; the product weight is
/// admissible only if every end passes.
pub fn conifold_windows(ends: &[ConifoldEnd]) -> Result<ConifoldVerdict> {
    let first = ends.first().ok_or_else(|| Error::invalid("a conifold needs at least one end"))?;
    if ends.iter().any(|e| e.n != first.n) {
        return Err(Error::invalid("all conifold ends must share the same dimension"));
    }
    let mut verdicts = Vec::with_capacity(ends.len());
    for (i, end) in ends.iter().enumerate() {
        let window = match end.kind {
            EndKind::Ac0 => window_ac0(end.n)?,
            EndKind::AcInf => window_acinf(end.n)?,
        };
        verdicts.push(EndVerdict {
            end: i + 1,
            kind: end.kind,
            weight: end.weight,
            window,
            inside: window.contains(end.weight),
        });
    }
    let failing: Vec<usize> = verdicts.iter().filter(|v| !v.inside).map(|v| v.end).collect();
    Ok(ConifoldVerdict { pass: failing.is_empty(), ends: verdicts, failing })
}

// ---------------------------------------------------------------------------
// asymptotically hyperbolic (pure edge, s = 0)

fn check_p(p: Scalar) -> Result<()> {
    if p.gt(Scalar::int(1)) && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("integrability exponent must exceed 1, got {p}")))
    }
}

/// `((1-n)/p, (n-1)(p-1)/p)` in `delta`.
pub fn window_ah(n: u32, p: Scalar) -> Result<WeightWindow> {
    if n < 3 {
        return Err(Error::invalid(format!("AH window needs n >= 3, got n = {n}")));
    }
    check_p(p)?;
    let m = Scalar::int(n as i64 - 1);
    WeightWindow::finite(
        -m / p,
        m * (p - 1) / p,
        Parametrization::Delta,
        Some(0),
        WindowOperator::HyperbolicLaplace,
    )
}

/// Window of `Delta + t(n-1-t)` with `2t > n-1`:
/// `(((n-1-t)p + 1 - n)/p, (tp + 1 - n)/p)` in `delta`.
pub fn window_ah_shifted(n: u32, p: Scalar, t: Scalar) -> Result<WeightWindow> {
    if n < 3 {
        return Err(Error::invalid(format!("AH window needs n >= 3, got n = {n}")));
    }
    check_p(p)?;
    let m = Scalar::int(n as i64 - 1);
    if !(t * 2).gt(m) {
        return Err(Error::invalid(format!(
            "shifted AH window needs 2t > n-1 (got t = {t}); reflect t -> n-1-t first"
        )));
    }
    WeightWindow::finite(
        ((m - t) * p - m) / p,
        (t * p - m) / p,
        Parametrization::Delta,
        Some(0),
        WindowOperator::ShiftedHyperbolic,
    )
}

// ---------------------------------------------------------------------------
// Dirac operator

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "theta")]
pub enum WittVerdict {
    Satisfied,
    Violated(Scalar),
    Unknown,
}

/// `(n/2 - a_hat - s, n/2 - a_hat)`; empty when `s <= 0`.
pub fn witt_interval(cone: &ConeData) -> (Scalar, Scalar) {
    let hi = cone.half_n() - cone.a_hat();
    (hi - cone.s(), hi)
}

/// `((1-n)/2, (n-1)/2)`.
pub fn enhanced_witt_interval(n: u32) -> (Scalar, Scalar) {
    let h = Scalar::ratio(n as i64 - 1, 2);
    (-h, h)
}

/// Whether the link Dirac spectrum avoids the Witt interval.
pub fn witt_check(cone: &ConeData, dirac: &DiracSpectrumTable) -> WittVerdict {
    let (lo, hi) = witt_interval(cone);
    if let Some(e) = dirac.entries().iter().find(|e| lo.lt(e.value) && e.value.lt(hi)) {
        return WittVerdict::Violated(e.value);
    }
    match dirac.interval_is_free(lo, hi) {
        Some(true) => WittVerdict::Satisfied,
        Some(false) => unreachable!("listed eigenvalues were checked above"),
        None => WittVerdict::Unknown,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum WindowOutcome {
    Window { window: WeightWindow },
    NoVerdict { failed_hypothesis: String },
}

impl WindowOutcome {
    pub fn window(&self) -> Option<&WeightWindow> {
        match self {
            WindowOutcome::Window { window } => Some(window),
            WindowOutcome::NoVerdict { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracWindows {
    /// `(n/2 - s, n/2)` under `s > 0` and the Witt condition.
    pub basic: WindowOutcome,
    /// `((n-1)(s-1)/2, (n-1)(s+1)/2)` under `|s| <= 1` and nonnegative scalar curvature.
    pub enhanced: WindowOutcome,
    /// `ns/2`, the weight at which the operator is symmetric.
    pub symmetric_weight: Scalar,
    /// Whether `ns/2` lies in the enhanced window.
    pub symmetric_weight_in_enhanced: bool,
}

/// Dirac Fredholm windows. `kappa_nonneg` asserts nonnegative scalar
/// curvature near the tip, which supplies the link gap `(n-1)/2`.
pub fn dirac_windows(
    cone: &ConeData,
    dirac: Option<&DiracSpectrumTable>,
    kappa_nonneg: bool,
) -> Result<DiracWindows> {
    let n = cone.n() as i64;
    let s = cone.s();
    let curvature_gap = Scalar::ratio(n - 1, 2);
    let effective = match (dirac, kappa_nonneg) {
        (Some(t), true) => Some(t.with_gap_at_least(curvature_gap)?),
        (Some(t), false) => Some(t.clone()),
        (None, true) => Some(DiracSpectrumTable::gap_only("curvature gap", curvature_gap)?),
        (None, false) => None,
    };

    let basic = if !s.is_positive() {
        WindowOutcome::NoVerdict { failed_hypothesis: format!("s > 0 (s = {s})") }
    } else {
        match effective.as_ref().map(|t| witt_check(cone, t)) {
            Some(WittVerdict::Satisfied) => WindowOutcome::Window {
                window: WeightWindow::finite(
                    cone.half_n() - s,
                    cone.half_n(),
                    Parametrization::Beta,
                    Some(0),
                    WindowOperator::Dirac,
                )?,
            },
            Some(WittVerdict::Violated(theta)) => WindowOutcome::NoVerdict {
                failed_hypothesis: format!("geometric Witt condition (eigenvalue {theta} in the interval)"),
            },
            Some(WittVerdict::Unknown) => WindowOutcome::NoVerdict {
                failed_hypothesis: "geometric Witt condition (undecidable from the given spectrum)".into(),
            },
            None => WindowOutcome::NoVerdict {
                failed_hypothesis: "geometric Witt condition (no Dirac spectrum, gap or curvature bound)".into(),
            },
        }
    };

    let symmetric_weight = self_adjoint_weight(cone);
    let mut symmetric_weight_in_enhanced = false;
    let enhanced = if !s.abs().le(Scalar::int(1)) {
        WindowOutcome::NoVerdict { failed_hypothesis: format!("|s| <= 1 (s = {s})") }
    } else if !kappa_nonneg {
        WindowOutcome::NoVerdict { failed_hypothesis: "nonnegative scalar curvature near the tip".into() }
    } else {
        let half = Scalar::ratio(n - 1, 2);
        let window = WeightWindow::finite(
            half * (s - 1),
            half * (s + 1),
            Parametrization::Beta,
            Some(0),
            WindowOperator::Dirac,
        )?;
        symmetric_weight_in_enhanced = window.contains(symmetric_weight);
        WindowOutcome::Window { window }
    };

    Ok(DiracWindows { basic, enhanced, symmetric_weight, symmetric_weight_in_enhanced })
}

// ---------------------------------------------------------------------------
// closed extensions

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticsMember {
    /// Generating link eigenvalue (`mu` or `theta`).
    pub eigenvalue: Scalar,
    /// `+1` or `-1` for the Laplace branches `delta_mu^{+-}`; `0` for Dirac.
    pub branch: i8,
    /// The quantity that fell inside the critical strip.
    pub position: Scalar,
    pub mult: u64,
}

/// Eigenvalues `mu` with `delta^{+-}_mu = +-sqrt(a^2 + 4mu)/2` strictly inside
/// `(-2s + beta - a/2, beta - a/2)`. Empty whenever `s <= 0`.
pub fn asymptotics_set_laplace(
    cone: &ConeData,
    table: &SpectrumTable,
    beta: Scalar,
) -> Result<Vec<AsymptoticsMember>> {
    let s = cone.s();
    if !s.is_positive() {
        return Ok(Vec::new());
    }
    let a = cone.a();
    let hi = beta - a / 2;
    let lo = hi - s * 2;
    let reach = lo.abs().max(hi.abs());
    table.require_open(reach * reach - a * a / 4)?;

    let mut members = Vec::new();
    for e in table.entries() {
        let half = (a * a + e.value * 4)
            .sqrt()
            .ok_or_else(|| Error::invalid("negative eigenvalue"))?
            / 2;
        for (branch, delta) in [(1i8, half), (-1i8, -half)] {
            if lo.lt(delta) && delta.lt(hi) {
                members.push(AsymptoticsMember { eigenvalue: e.value, branch, position: delta, mult: e.mult });
            }
            if half.is_zero() {
                break;
            }
        }
    }
    Ok(members)
}

/// Dirac eigenvalues `theta` whose downstairs root `a_hat + theta - n/2` lies
/// strictly inside `(-s + beta - n/2, beta - n/2)`. Empty whenever `s <= 0`.
pub fn asymptotics_set_dirac(
    cone: &ConeData,
    dirac: &DiracSpectrumTable,
    beta: Scalar,
) -> Result<Vec<AsymptoticsMember>> {
    let s = cone.s();
    if !s.is_positive() {
        return Ok(Vec::new());
    }
    let hi = beta - cone.half_n();
    let lo = hi - s;
    // theta-interval equivalent to the strip
    let theta_hi = beta - cone.a_hat();
    let theta_lo = theta_hi - s;
    if dirac.interval_is_free(theta_lo, theta_hi).is_none() {
        return Err(Error::InsufficientSpectrum {
            label: dirac.label().to_string(),
            required: theta_lo.abs().max(theta_hi.abs()),
            available: format!(
                "gap {} and listed {}",
                dirac.gap_bound().map(|g| g.display()).unwrap_or_else(|| "none".into()),
                dirac.truncation().describe()
            ),
        });
    }
    Ok(dirac
        .entries()
        .iter()
        .filter_map(|e| {
            let root = crate::symbols::dirac_roots(cone, e.value, Convention::Downstairs).zeta;
            (lo.lt(root) && root.lt(hi)).then_some(AsymptoticsMember {
                eigenvalue: e.value,
                branch: 0,
                position: root,
                mult: e.mult,
            })
        })
        .collect())
}

/// Link data for the closed-extension criteria.
#[derive(Clone, Copy, Debug)]
pub enum LinkData<'a> {
    Laplace(&'a SpectrumTable),
    Dirac(&'a DiracSpectrumTable),
}

/// The core operator has a unique closed extension when its asymptotics set is empty.
pub fn unique_closed_extension(cone: &ConeData, link: LinkData<'_>, beta: Scalar) -> Result<bool> {
    Ok(match link {
        LinkData::Laplace(t) => asymptotics_set_laplace(cone, t, beta)?.is_empty(),
        LinkData::Dirac(t) => {
            // a listed member decides the question even when the table is partial
            let s = cone.s();
            let listed_hit = s.is_positive()
                && t.entries().iter().any(|e| {
                    let theta_hi = beta - cone.a_hat();
                    (theta_hi - s).lt(e.value) && e.value.lt(theta_hi)
                });
            if listed_hit {
                false
            } else {
                asymptotics_set_dirac(cone, t, beta)?.is_empty()
            }
        }
    })
}

/// `ns/2`, the only weight at which the core operator is symmetric.
pub fn self_adjoint_weight(cone: &ConeData) -> Scalar {
    cone.s() * cone.n() as i64 / 2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionReport {
    pub beta: Scalar,
    pub unique_closed_extension: bool,
    pub symmetric_weight: Scalar,
    /// Unique closed extension at the symmetric weight.
    pub essentially_self_adjoint: bool,
}

pub fn extension_report(cone: &ConeData, link: LinkData<'_>, beta: Scalar) -> Result<ExtensionReport> {
    let unique = unique_closed_extension(cone, link, beta)?;
    let symmetric_weight = self_adjoint_weight(cone);
    Ok(ExtensionReport {
        beta,
        unique_closed_extension: unique,
        symmetric_weight,
        essentially_self_adjoint: unique && beta.approx_eq(symmetric_weight),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    Continuous,
    Compact,
    None,
}

/// Embedding `H^{sigma', p}_{beta'} -> H^{sigma, p}_{beta}` (`from -> into`).
pub fn sobolev_embedding(from: &WeightedIndex, into: &WeightedIndex) -> Result<Embedding> {
    if !from.p.approx_eq(into.p) {
        return Err(Error::invalid("embeddings are only classified for equal integrability exponents"));
    }
    Ok(if from.beta.lt(into.beta) && from.sigma.gt(into.sigma) {
        Embedding::Compact
    } else if from.beta.le(into.beta) && from.sigma.ge(into.sigma) {
        Embedding::Continuous
    } else {
        Embedding::None
    })
}
