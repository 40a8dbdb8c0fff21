//! Link spectra: eigenvalue/multiplicity tables of the link Laplacian and
//! link Dirac operator, which feed every indicial computation.
//!
//! Truncation is explicit. Every consumer that needs "all eigenvalues below
//! some bound" asks the table's [`Truncation`] first and fails with
//! [`Error::InsufficientSpectrum`] instead of under-counting.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How much of the spectrum a table is known to contain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "bound", rename_all = "snake_case")]
pub enum Truncation {
    /// Every eigenvalue is listed.
    Complete,
    /// Every eigenvalue `<= bound` is listed (for Dirac tables: every `|theta| <= bound`).
    Through(Scalar),
    /// Every eigenvalue `< bound` is listed (for Dirac tables: every `|theta| < bound`).
    Below(Scalar),
}

impl Truncation {
    /// True when every eigenvalue `<= value` is listed.
    pub fn covers_closed(&self, value: Scalar) -> bool {
        match *self {
            Truncation::Complete => true,
            Truncation::Through(b) => value.le(b),
            Truncation::Below(b) => value.lt(b),
        }
    }

    /// True when every eigenvalue `< value` is listed.
    pub fn covers_open(&self, value: Scalar) -> bool {
        match *self {
            Truncation::Complete => true,
            Truncation::Through(b) | Truncation::Below(b) => value.le(b),
        }
    }

    fn map(&self, f: impl Fn(Scalar) -> Scalar) -> Truncation {
        match *self {
            Truncation::Complete => Truncation::Complete,
            Truncation::Through(b) => Truncation::Through(f(b)),
            Truncation::Below(b) => Truncation::Below(f(b)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Truncation::Complete => "complete".to_string(),
            Truncation::Through(b) => format!("through {b}"),
            Truncation::Below(b) => format!("below {b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub value: Scalar,
    pub mult: u64,
}

impl SpectrumEntry {
    pub fn new(value: impl Into<Scalar>, mult: u64) -> Self {
        SpectrumEntry {
            value: value.into(),
            mult,
        }
    }
}

/// Eigenvalues of the link Laplacian with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTable {
    label: String,
    entries: Vec<SpectrumEntry>,
    truncation: Truncation,
    /// Highest harmonic degree represented, for analytically generated tables.
    max_degree: Option<u32>,
}

/// Eigenvalues of the link Dirac operator, optionally with a known spectral gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracSpectrumTable {
    label: String,
    entries: Vec<SpectrumEntry>,
    gap_bound: Option<Scalar>,
    truncation: Truncation,
}

/// Index of the first offending entry and a message.
type EntryViolation = (usize, String);

fn check_sorted_positive_mults(entries: &[SpectrumEntry]) -> std::result::Result<(), EntryViolation> {
    for (i, e) in entries.iter().enumerate() {
        if e.mult == 0 {
            return Err((i, format!("multiplicity of {} must be at least 1", e.value)));
        }
        if !e.value.is_finite() {
            return Err((i, "eigenvalue is not finite".to_string()));
        }
        if i > 0 && !entries[i - 1].value.lt(e.value) {
            return Err((
                i,
                format!(
                    "eigenvalues must be strictly increasing ({} follows {})",
                    e.value,
                    entries[i - 1].value
                ),
            ));
        }
    }
    Ok(())
}

fn check_laplace(entries: &[SpectrumEntry]) -> std::result::Result<(), EntryViolation> {
    if let Some(i) = entries.iter().position(|e| e.value.is_negative()) {
        return Err((i, format!("Laplace eigenvalue {} is negative", entries[i].value)));
    }
    check_sorted_positive_mults(entries)
}

fn check_dirac(
    entries: &[SpectrumEntry],
    gap_bound: Option<Scalar>,
) -> std::result::Result<(), EntryViolation> {
    check_sorted_positive_mults(entries)?;
    if let Some(g) = gap_bound {
        if g.is_negative() {
            return Err((0, format!("gap bound {g} is negative")));
        }
        if let Some(i) = entries.iter().position(|e| e.value.abs().lt(g)) {
            return Err((i, format!("eigenvalue {} lies inside the gap (-{g}, {g})", entries[i].value)));
        }
    }
    Ok(())
}

impl SpectrumTable {
    pub fn new(
        label: impl Into<String>,
        entries: Vec<SpectrumEntry>,
        truncation: Truncation,
    ) -> Result<Self> {
        check_laplace(&entries).map_err(|(i, m)| Error::invalid(format!("entry {i}: {m}")))?;
        Ok(SpectrumTable {
            label: label.into(),
            entries,
            truncation,
            max_degree: None,
        })
    }

    /// The spectrum of a point: `{(0, 1)}`, complete. Identity for products.
    pub fn point() -> Self {
        SpectrumTable {
            label: "point".to_string(),
            entries: vec![SpectrumEntry::new(0, 1)],
            truncation: Truncation::Complete,
            max_degree: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.max_degree
    }

    /// Whether the table starts with `(0, 1)`, as it does for a connected link.
    pub fn is_connected_link(&self) -> bool {
        self.entries
            .first()
            .is_some_and(|e| e.value.is_zero() && e.mult == 1)
    }

    /// Fails unless every eigenvalue `<= value` is listed.
    pub fn require_closed(&self, value: Scalar) -> Result<()> {
        if self.truncation.covers_closed(value) {
            Ok(())
        } else {
            Err(self.insufficient(value))
        }
    }

    /// Fails unless every eigenvalue `< value` is listed.
    pub fn require_open(&self, value: Scalar) -> Result<()> {
        if self.truncation.covers_open(value) {
            Ok(())
        } else {
            Err(self.insufficient(value))
        }
    }

    fn insufficient(&self, value: Scalar) -> Error {
        Error::InsufficientSpectrum {
            label: self.label.clone(),
            required: value,
            available: self.truncation.describe(),
        }
    }

    /// Total multiplicity of eigenvalues `<= bound`.
    pub fn count_through(&self, bound: Scalar) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.value.le(bound))
            .map(|e| e.mult)
            .sum()
    }
}

impl DiracSpectrumTable {
    pub fn new(
        label: impl Into<String>,
        entries: Vec<SpectrumEntry>,
        gap_bound: Option<Scalar>,
        truncation: Truncation,
    ) -> Result<Self> {
        check_dirac(&entries, gap_bound).map_err(|(i, m)| Error::invalid(format!("entry {i}: {m}")))?;
        Ok(DiracSpectrumTable {
            label: label.into(),
            entries,
            gap_bound,
            truncation,
        })
    }

    /// A table that only records `Spec ∩ (-g, g) = ∅`.
    pub fn gap_only(label: impl Into<String>, gap: Scalar) -> Result<Self> {
        DiracSpectrumTable::new(label, Vec::new(), Some(gap), Truncation::Through(Scalar::zero()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn gap_bound(&self) -> Option<Scalar> {
        self.gap_bound
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Returns a copy whose gap bound is at least `gap`.
    pub fn with_gap_at_least(&self, gap: Scalar) -> Result<Self> {
        let merged = match self.gap_bound {
            Some(g) => g.max(gap),
            None => gap,
        };
        DiracSpectrumTable::new(self.label.clone(), self.entries.clone(), Some(merged), self.truncation)
    }

    /// Whether the open interval `(lo, hi)` is free of Dirac spectrum.
    ///
    /// `Some(false)` when a listed eigenvalue lies inside; `Some(true)` when the
    /// interval is empty or lies within what the gap and the listed range
    /// jointly determine; `None` when the table cannot decide.
    pub fn interval_is_free(&self, lo: Scalar, hi: Scalar) -> Option<bool> {
        if !lo.lt(hi) {
            return Some(true);
        }
        if self.entries.iter().any(|e| lo.lt(e.value) && e.value.lt(hi)) {
            return Some(false);
        }
        let gap_covers = self
            .gap_bound
            .is_some_and(|g| (-g).le(lo) && hi.le(g));
        let listed_covers = match self.truncation {
            Truncation::Complete => true,
            Truncation::Through(b) | Truncation::Below(b) => (-b).le(lo) && hi.le(b),
        };
        if gap_covers || listed_covers {
            Some(true)
        } else {
            None
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of degree-`k` harmonic polynomials in `n` variables.
pub fn harmonic_dimension(n: u32, k: u32) -> u64 {
    let (n, k) = (n as u64, k as u64);
    let all = binomial(n + k - 1, k);
    let lower = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    (all - lower) as u64
}

fn sphere_eigenvalue(n: u32, k: u32) -> i64 {
    k as i64 * (k as i64 + n as i64 - 2)
}

/// Laplace spectrum of the unit round sphere `S^{n-1}` (the link of `R^n`),
/// degrees `0..=k_max`: eigenvalues `k(k+n-2)` with harmonic-polynomial
/// multiplicities.
pub fn sphere_laplace_spectrum(n: u32, k_max: u32) -> Result<SpectrumTable> {
    if n < 3 {
        return Err(Error::invalid(format!("sphere link needs n >= 3, got n = {n}")));
    }
    let entries = (0..=k_max)
        .map(|k| SpectrumEntry::new(sphere_eigenvalue(n, k), harmonic_dimension(n, k)))
        .collect();
    Ok(SpectrumTable {
        label: format!("S^{}", n - 1),
        entries,
        truncation: Truncation::Below(Scalar::int(sphere_eigenvalue(n, k_max + 1))),
        max_degree: Some(k_max),
    })
}

/// Smallest `k_max` whose sphere table lists every eigenvalue `<= mu_max`.
pub fn sphere_degree_covering(n: u32, mu_max: Scalar) -> u32 {
    let mut k = 0;
    while Scalar::int(sphere_eigenvalue(n, k + 1)).le(mu_max) {
        k += 1;
    }
    k
}

fn merge_sorted(mut pairs: Vec<(Scalar, u64)>) -> Vec<SpectrumEntry> {
    pairs.sort_by(|a, b| a.0.cmp_tol(b.0));
    let mut out: Vec<SpectrumEntry> = Vec::with_capacity(pairs.len());
    for (value, mult) in pairs {
        match out.last_mut() {
            Some(last) if last.value.approx_eq(value) => last.mult += mult,
            _ => out.push(SpectrumEntry { value, mult }),
        }
    }
    out
}

/// Spectrum of a Riemannian product of links, truncated at `mu_max`.
///
/// Eigenvalues add and multiplicities multiply. Both factors must list every
/// eigenvalue `<= mu_max`, otherwise the product would silently miss sums.
pub fn product_link_spectrum(
    first: &SpectrumTable,
    second: &SpectrumTable,
    mu_max: Scalar,
) -> Result<SpectrumTable> {
    first.require_closed(mu_max)?;
    second.require_closed(mu_max)?;
    let mut pairs = Vec::new();
    for a in &first.entries {
        for b in &second.entries {
            let sum = a.value + b.value;
            if sum.le(mu_max) {
                pairs.push((sum, a.mult * b.mult));
            }
        }
    }
    Ok(SpectrumTable {
        label: format!("{} x {}", first.label, second.label),
        entries: merge_sorted(pairs),
        truncation: Truncation::Through(mu_max),
        max_degree: None,
    })
}

/// Effect of replacing the link metric `g_F` by `c^2 g_F`.
pub trait RescaleLink: Sized {
    fn rescaled(&self, c: Scalar) -> Result<Self>;
}

fn check_scale(c: Scalar) -> Result<()> {
    if c.is_positive() && c.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("rescaling factor must be positive, got {c}")))
    }
}

impl RescaleLink for SpectrumTable {
    /// Laplace eigenvalues scale by `1/c^2`.
    fn rescaled(&self, c: Scalar) -> Result<Self> {
        check_scale(c)?;
        let c2 = c * c;
        Ok(SpectrumTable {
            label: self.label.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| SpectrumEntry::new(e.value / c2, e.mult))
                .collect(),
            truncation: self.truncation.map(|b| b / c2),
            max_degree: self.max_degree,
        })
    }
}

impl RescaleLink for DiracSpectrumTable {
    /// Dirac eigenvalues and the gap scale by `1/c`.
    fn rescaled(&self, c: Scalar) -> Result<Self> {
        check_scale(c)?;
        Ok(DiracSpectrumTable {
            label: self.label.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| SpectrumEntry::new(e.value / c, e.mult))
                .collect(),
            gap_bound: self.gap_bound.map(|g| g / c),
            truncation: self.truncation.map(|b| b / c),
        })
    }
}

pub fn rescale_link<T: RescaleLink>(table: &T, c: Scalar) -> Result<T> {
    table.rescaled(c)
}

/// Either kind of table, as read from a spectrum file.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoadedSpectrum {
    Laplace(SpectrumTable),
    Dirac(DiracSpectrumTable),
}

impl RescaleLink for LoadedSpectrum {
    fn rescaled(&self, c: Scalar) -> Result<Self> {
        Ok(match self {
            LoadedSpectrum::Laplace(t) => LoadedSpectrum::Laplace(t.rescaled(c)?),
            LoadedSpectrum::Dirac(t) => LoadedSpectrum::Dirac(t.rescaled(c)?),
        })
    }
}

#[derive(Clone, Copy, PartialEq)]
enum FileKind {
    Laplace,
    Dirac,
}

/// Parses the spectrum text format:
///
/// ```text
/// #spectrum laplace|dirac <label>
/// #gap <g>            (dirac only, optional)
/// <eigenvalue> <mult> # trailing comments allowed
/// ```
///
/// Eigenvalues accept integers, decimals and `p/q`. A loaded table is taken
/// to be complete through its largest listed eigenvalue (largest `|theta|`
/// for Dirac tables).
pub fn load_spectrum<R: Read>(reader: R) -> Result<LoadedSpectrum> {
    let mut header: Option<(FileKind, String)> = None;
    let mut gap: Option<Scalar> = None;
    let mut entries = Vec::new();
    let mut entry_lines = Vec::new();

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(directive) = trimmed.strip_prefix("#spectrum") {
            if header.is_some() {
                return Err(Error::Parse { line: line_no, message: "duplicate #spectrum header".into() });
            }
            let mut words = directive.split_whitespace();
            let kind = match words.next() {
                Some("laplace") => FileKind::Laplace,
                Some("dirac") => FileKind::Dirac,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown spectrum kind {:?}, expected laplace or dirac", other.unwrap_or("")),
                    })
                }
            };
            let label = words.collect::<Vec<_>>().join(" ");
            header = Some((kind, if label.is_empty() { "unnamed".into() } else { label }));
            continue;
        }
        if header.is_none() {
            if trimmed.starts_with('#') && !trimmed.starts_with("#gap") {
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                message: "expected `#spectrum laplace|dirac <label>` header first".into(),
            });
        }
        if let Some(rest) = trimmed.strip_prefix("#gap") {
            let value = rest.split('#').next().unwrap_or("").trim();
            let g: Scalar = value.parse().map_err(|e: crate::scalar::ParseScalarError| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if header.as_ref().is_some_and(|h| h.0 == FileKind::Laplace) {
                return Err(Error::Parse { line: line_no, message: "#gap is only valid for dirac spectra".into() });
            }
            if g.is_negative() {
                return Err(Error::Invariant { line: line_no, message: format!("gap bound {g} is negative") });
            }
            gap = Some(g);
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `<eigenvalue> <multiplicity>`, found {} fields", fields.len()),
            });
        }
        let value: Scalar = fields[0].parse().map_err(|e: crate::scalar::ParseScalarError| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let mult: i64 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("multiplicity `{}` is not an integer", fields[1]),
        })?;
        if mult < 1 {
            return Err(Error::Invariant {
                line: line_no,
                message: format!("multiplicity must be at least 1, got {mult}"),
            });
        }
        entries.push(SpectrumEntry::new(value, mult as u64));
        entry_lines.push(line_no);
    }

    let (kind, label) = header.ok_or(Error::Parse { line: 0, message: "empty spectrum file".into() })?;
    let at_line = |(i, message): EntryViolation| Error::Invariant {
        line: entry_lines.get(i).copied().unwrap_or(0),
        message,
    };
    match kind {
        FileKind::Laplace => {
            check_laplace(&entries).map_err(at_line)?;
            let bound = entries.last().map(|e| e.value).unwrap_or_else(Scalar::zero);
            Ok(LoadedSpectrum::Laplace(SpectrumTable {
                label,
                entries,
                truncation: Truncation::Through(bound),
                max_degree: None,
            }))
        }
        FileKind::Dirac => {
            check_dirac(&entries, gap).map_err(at_line)?;
            let bound = entries
                .iter()
                .map(|e| e.value.abs())
                .fold(Scalar::zero(), Scalar::max);
            Ok(LoadedSpectrum::Dirac(DiracSpectrumTable {
                label,
                entries,
                gap_bound: gap,
                truncation: Truncation::Through(bound),
            }))
        }
    }
}

pub fn load_spectrum_file(path: impl AsRef<Path>) -> Result<LoadedSpectrum> {
    load_spectrum(std::fs::File::open(path)?)
}

/// Smallest positive eigenvalue.
pub fn first_positive_eigenvalue(table: &SpectrumTable) -> Result<Scalar> {
    table
        .entries
        .iter()
        .find(|e| e.value.is_positive())
        .map(|e| e.value)
        .ok_or_else(|| Error::InsufficientSpectrum {
            label: table.label.clone(),
            required: Scalar::zero(),
            available: format!("{} with no positive eigenvalue listed", table.truncation.describe()),
        })
}

/// Spectral gap of the link Dirac operator implied by a scalar-curvature
/// lower bound `kappa_F >= (n-1)(n-2)`: then `|theta| >= (n-1)/2`.
pub fn dirac_gap_from_scalar_curvature(n: u32, kappa_min: Scalar) -> Option<Scalar> {
    let n = n as i64;
    if kappa_min.ge(Scalar::int((n - 1) * (n - 2))) {
        Some(Scalar::ratio(n - 1, 2))
    } else {
        None
    }
}
