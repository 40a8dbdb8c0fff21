use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cone_weights::Scalar;
use serde::de::{self, Deserializer};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(
    name = "coneweights",
    version,
    about = "Fredholm weight windows, indicial roots and index ladders on conformally conical spaces",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Indicial roots for every listed link eigenvalue
    Roots(ProblemCmd),
    /// Fredholm weight windows
    Windows(ProblemCmd),
    /// Fredholm index as a step function of the weight
    Ladder(ProblemCmd),
    /// Geometric Witt condition for the Dirac operator
    Witt(ProblemCmd),
    /// Closed-extension criteria at a weight
    Extension(ProblemCmd),
    /// Numerical Mellin transform checks
    Mellin(MellinCmd),
    /// Mode-by-mode model problem on the exact cone
    Solve(ProblemCmd),
    /// Run the invariant battery
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct ProblemCmd {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// TOML file with the same keys as the flags; flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Laplace,
    Dirac,
    Generic,
    Ah,
    #[value(alias = "ah_shifted")]
    #[serde(alias = "ah_shifted")]
    AhShifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    #[value(alias = "upstairs")]
    #[serde(alias = "upstairs")]
    Up,
    #[value(alias = "downstairs")]
    #[serde(alias = "downstairs")]
    Down,
}

/// Problem description shared by the computational subcommands.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub op: Option<OpKind>,
    /// Dimension of the smooth locus
    #[arg(long)]
    pub n: Option<u32>,
    /// Conformal exponent
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<ScalarArg>,
    /// Integrability exponent
    #[arg(long)]
    pub p: Option<ScalarArg>,
    /// Spectral shift of the hyperbolic Laplacian
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<ScalarArg>,
    /// sphere | sphere:<m> | point | file:<path> | <path>, joined by `*` for products
    #[arg(long)]
    pub link: Option<String>,
    /// Highest spherical-harmonic degree kept for sphere links
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Eigenvalue cutoff for product links
    #[arg(long)]
    pub mu_max: Option<ScalarArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<ScalarArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<ScalarArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<ScalarArg>,
    /// Weight range `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<RangeArg>,
    /// Scalar curvature is nonnegative near the tip
    #[arg(long)]
    pub kappa_nonneg: bool,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Lower bound on |theta| for the link Dirac spectrum
    #[arg(long)]
    pub gap: Option<ScalarArg>,
    /// Link Dirac spectrum file
    #[arg(long, value_name = "FILE")]
    pub dirac_file: Option<PathBuf>,
    /// Conormal polynomial coefficients `c0,c1,...,cm`
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<CoeffList>,
    /// Right-hand side terms `coeff:exponent:logpow:mu`, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub rhs: Option<RhsList>,
}

impl ProblemArgs {
    /// Fills every field left unset on the command line from `file`.
    pub fn merged_over(self, file: ProblemArgs) -> ProblemArgs {
        ProblemArgs {
            op: self.op.or(file.op),
            n: self.n.or(file.n),
            s: self.s.or(file.s),
            p: self.p.or(file.p),
            t: self.t.or(file.t),
            link: self.link.or(file.link),
            kmax: self.kmax.or(file.kmax),
            mu_max: self.mu_max.or(file.mu_max),
            beta: self.beta.or(file.beta),
            gamma: self.gamma.or(file.gamma),
            delta: self.delta.or(file.delta),
            range: self.range.or(file.range),
            kappa_nonneg: self.kappa_nonneg || file.kappa_nonneg,
            convention: self.convention.or(file.convention),
            gap: self.gap.or(file.gap),
            dirac_file: self.dirac_file.or(file.dirac_file),
            coeffs: self.coeffs.or(file.coeffs),
            rhs: self.rhs.or(file.rhs),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MellinCheck {
    Forward,
    Derivative,
    Isometry,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleFunction {
    /// e^{-x}
    Exp,
    /// e^{-x^2}
    Gauss,
    /// x e^{-x}
    Xexp,
    /// smooth bump in log x, supported in |log x| < 2
    Bump,
}

#[derive(Args, Debug)]
pub struct MellinCmd {
    #[arg(long, value_enum, default_value_t = MellinCheck::All)]
    pub check: MellinCheck,
    #[arg(long, value_enum, default_value_t = SampleFunction::Exp)]
    pub function: SampleFunction,
    /// CSV with columns t,value on a uniform grid in t = log x
    #[arg(long, value_name = "FILE", conflicts_with = "function")]
    pub samples: Option<PathBuf>,
    /// Evaluation point `re[,im]`
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub zeta: ComplexArg,
    /// Weight of the isometry check
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 2001)]
    pub line_count: usize,
    #[arg(long, default_value_t = 120.0)]
    pub half_width: f64,
    /// Residual above which a check fails
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyCmd {
    /// Only run checks whose name starts with this prefix
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long, hide = true, value_name = "CHECK")]
    pub inject_failure: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

// ---------------------------------------------------------------------------
// value types accepted both as flags and as TOML values

#[derive(Debug, Clone)]
pub struct InvalidValue(String);

impl fmt::Display for InvalidValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidValue {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarArg(pub Scalar);

impl FromStr for ScalarArg {
    type Err = InvalidValue;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(ScalarArg).map_err(|e: cone_weights::scalar::ParseScalarError| InvalidValue(e.to_string()))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RawNumber {
    fn into_scalar<E: de::Error>(self) -> Result<Scalar, E> {
        let text = match self {
            RawNumber::Int(i) => return Ok(Scalar::int(i)),
            // through the decimal text so 0.5 stays exact
            RawNumber::Float(v) => v.to_string(),
            RawNumber::Text(t) => t,
        };
        text.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for ScalarArg {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        RawNumber::deserialize(deserializer)?.into_scalar().map(ScalarArg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeArg {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl FromStr for RangeArg {
    type Err = InvalidValue;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| InvalidValue(format!("range must be `lo,hi`, got `{s}`")))?;
        let lo: ScalarArg = lo.parse()?;
        let hi: ScalarArg = hi.parse()?;
        Ok(RangeArg { lo: lo.0, hi: hi.0 })
    }
}

impl<'de> Deserialize<'de> for RangeArg {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Pair(ScalarArg, ScalarArg),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(t) => t.parse().map_err(de::Error::custom),
            Raw::Pair(lo, hi) => Ok(RangeArg { lo: lo.0, hi: hi.0 }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffList(pub Vec<f64>);

impl FromStr for CoeffList {
    type Err = InvalidValue;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|c| {
                c.trim()
                    .parse::<ScalarArg>()
                    .map(|v| v.0.to_f64())
                    .map_err(|_| InvalidValue(format!("invalid coefficient `{c}`")))
            })
            .collect::<Result<_, _>>()
            .map(CoeffList)
    }
}

impl<'de> Deserialize<'de> for CoeffList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<ScalarArg>),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(t) => t.parse().map_err(de::Error::custom),
            Raw::List(v) => Ok(CoeffList(v.into_iter().map(|c| c.0.to_f64()).collect())),
        }
    }
}

/// One right-hand side term `coeff * x^exponent * (log x)^logpow` on the `mu`-mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsTerm {
    pub coeff: f64,
    pub exponent: f64,
    pub logpow: u32,
    pub mu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhsList(pub Vec<RhsTerm>);

impl FromStr for RhsList {
    type Err = InvalidValue;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(parse_rhs_term).collect::<Result<_, _>>().map(RhsList)
    }
}

fn parse_rhs_term(text: &str) -> Result<RhsTerm, InvalidValue> {
    let bad = || InvalidValue(format!("rhs term must be `coeff:exponent:logpow:mu`, got `{text}`"));
    let parts: Vec<&str> = text.trim().split(':').collect();
    let [coeff, exponent, logpow, mu] = parts.as_slice() else {
        return Err(bad());
    };
    let number = |t: &str| t.trim().parse::<ScalarArg>().map(|v| v.0.to_f64()).map_err(|_| bad());
    Ok(RhsTerm {
        coeff: number(coeff)?,
        exponent: number(exponent)?,
        logpow: logpow.trim().parse().map_err(|_| bad())?,
        mu: number(mu)?,
    })
}

impl<'de> Deserialize<'de> for RhsList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg {
    pub re: f64,
    pub im: f64,
}

impl FromStr for ComplexArg {
    type Err = InvalidValue;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InvalidValue(format!("expected `re` or `re,im`, got `{s}`"));
        let (re, im) = match s.split_once(',') {
            Some((re, im)) => (re, im),
            None => (s, "0"),
        };
        Ok(ComplexArg {
            re: re.trim().parse().map_err(|_| bad())?,
            im: im.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_accepts_numbers_and_strings() {
        let parsed: ProblemArgs = toml::from_str(
            "op = \"ah-shifted\"\nn = 5\np = 1.5\nt = \"7/2\"\nrange = [-1, \"3/2\"]\nkappa-nonneg = true\n",
        )
        .unwrap();
        assert_eq!(parsed.op, Some(OpKind::AhShifted));
        assert_eq!(parsed.p.unwrap().0, Scalar::ratio(3, 2));
        assert_eq!(parsed.t.unwrap().0, Scalar::ratio(7, 2));
        assert_eq!(parsed.range.unwrap().hi, Scalar::ratio(3, 2));
        assert!(parsed.kappa_nonneg);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<ProblemArgs>("dimension = 4").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let flags = ProblemArgs { n: Some(6), ..Default::default() };
        let file = ProblemArgs { n: Some(4), s: Some(ScalarArg(Scalar::int(1))), ..Default::default() };
        let merged = flags.merged_over(file);
        assert_eq!(merged.n, Some(6));
        assert_eq!(merged.s.unwrap().0, Scalar::int(1));
    }

    #[test]
    fn rhs_terms_parse() {
        let rhs: RhsList = "1:0:0:0, -2.5:-1:1:3".parse().unwrap();
        assert_eq!(rhs.0.len(), 2);
        assert_eq!(rhs.0[1], RhsTerm { coeff: -2.5, exponent: -1.0, logpow: 1, mu: 3.0 });
        assert!("1:0:0".parse::<RhsList>().is_err());
    }
}
