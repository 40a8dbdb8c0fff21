use std::path::PathBuf;
use std::str::FromStr;

use cone_weights::link_spectra::{
    load_spectrum_file, product_link_spectrum, sphere_degree_covering, sphere_laplace_spectrum,
    DiracSpectrumTable, LoadedSpectrum, SpectrumTable,
};
use cone_weights::Scalar;

use crate::UsageError;

/// Sphere degree used when nothing else pins the truncation.
pub const DEFAULT_KMAX: u32 = 4;

/// A parsed `--link` expression.
#[derive(Clone, Debug, PartialEq)]
pub enum LinkExpr {
    /// `S^{n-1}` for the cone dimension `n`.
    Sphere,
    /// `S^m`.
    SphereOf(u32),
    Point,
    File(PathBuf),
    Product(Vec<LinkExpr>),
}

impl FromStr for LinkExpr {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors: Vec<&str> = s.split('*').map(str::trim).collect();
        if factors.len() > 1 {
            return factors.iter().map(|f| f.parse()).collect::<Result<_, _>>().map(LinkExpr::Product);
        }
        let text = factors[0];
        Ok(match text {
            "" => return Err(UsageError(format!("empty link expression `{s}`"))),
            "sphere" => LinkExpr::Sphere,
            "point" => LinkExpr::Point,
            _ => {
                if let Some(m) = text.strip_prefix("sphere:") {
                    let m = m.parse().map_err(|_| UsageError(format!("invalid sphere dimension in `{text}`")))?;
                    LinkExpr::SphereOf(m)
                } else {
                    LinkExpr::File(PathBuf::from(text.strip_prefix("file:").unwrap_or(text)))
                }
            }
        })
    }
}

/// How much of a link spectrum a computation needs.
#[derive(Clone, Copy, Debug)]
pub struct Coverage {
    pub n: u32,
    pub kmax: Option<u32>,
    pub mu_max: Option<Scalar>,
    /// Every eigenvalue up to this bound must be listed.
    pub needed: Option<Scalar>,
}

impl Coverage {
    fn sphere_degree(&self, sphere_n: u32, bound: Option<Scalar>) -> u32 {
        match (self.kmax, bound) {
            (Some(k), _) => k,
            (None, Some(mu)) => sphere_degree_covering(sphere_n, mu),
            (None, None) => DEFAULT_KMAX,
        }
    }
}

pub fn laplace_table(expr: &LinkExpr, coverage: Coverage) -> anyhow::Result<SpectrumTable> {
    match expr {
        LinkExpr::Product(factors) => {
            let mu_max = coverage.mu_max.or(coverage.needed).ok_or_else(|| {
                UsageError("product links need --mu-max".into())
            })?;
            let inner = Coverage { mu_max: Some(mu_max), needed: Some(mu_max), ..coverage };
            let mut tables = factors.iter().map(|f| laplace_table(f, inner));
            let first = tables.next().expect("a product has factors")?;
            tables.try_fold(first, |acc, next| Ok(product_link_spectrum(&acc, &next?, mu_max)?))
        }
        LinkExpr::Sphere => {
            Ok(sphere_laplace_spectrum(coverage.n, coverage.sphere_degree(coverage.n, coverage.needed))?)
        }
        LinkExpr::SphereOf(m) => {
            let sphere_n = m + 1;
            Ok(sphere_laplace_spectrum(sphere_n, coverage.sphere_degree(sphere_n, coverage.needed))?)
        }
        LinkExpr::Point => Ok(SpectrumTable::point()),
        LinkExpr::File(path) => match load_spectrum_file(path)? {
            LoadedSpectrum::Laplace(table) => Ok(table),
            LoadedSpectrum::Dirac(_) => {
                Err(UsageError(format!("{} holds a Dirac spectrum; a Laplace spectrum is needed", path.display())).into())
            }
        },
    }
}

/// Dirac data from `--dirac-file`, a Dirac `--link` file, or `--gap`, in that order.
pub fn dirac_table(
    dirac_file: Option<&PathBuf>,
    link: Option<&LinkExpr>,
    gap: Option<Scalar>,
) -> anyhow::Result<Option<DiracSpectrumTable>> {
    let path = match (dirac_file, link) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(LinkExpr::File(p))) => Some(p.clone()),
        (None, Some(other)) => {
            return Err(UsageError(format!("link {other:?} has no Dirac spectrum; use --dirac-file or --gap")).into())
        }
        (None, None) => None,
    };
    let table = match path {
        Some(p) => match load_spectrum_file(&p)? {
            LoadedSpectrum::Dirac(t) => Some(t),
            LoadedSpectrum::Laplace(_) => {
                return Err(UsageError(format!("{} holds a Laplace spectrum; a Dirac spectrum is needed", p.display())).into())
            }
        },
        None => None,
    };
    Ok(match (table, gap) {
        (Some(t), Some(g)) => Some(t.with_gap_at_least(g)?),
        (Some(t), None) => Some(t),
        (None, Some(g)) => Some(DiracSpectrumTable::gap_only("gap bound", g)?),
        (None, None) => None,
    })
}
