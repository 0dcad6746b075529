//! Experiment descriptions and their TOML form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::mallows::QSchedule;

/// How the index `k` of `N_k` depends on `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum KRule {
    Fixed { k: usize },
    /// `⌊n^alpha⌋`.
    Alpha { alpha: f64 },
    /// `⌊d n⌋`.
    Dn { d: f64 },
    /// `n - offset`.
    Top { offset: usize },
    /// `⌊factor · log_base n⌋`, or the ceiling when `ceil` is set.
    Log {
        base: f64,
        #[serde(default = "one")]
        factor: f64,
        #[serde(default)]
        ceil: bool,
    },
}

fn one() -> f64 {
    1.0
}

impl KRule {
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let nf = n as f64;
        let k = match *self {
            KRule::Fixed { k } => k,
            KRule::Alpha { alpha } => nf.powf(alpha).floor() as usize,
            KRule::Dn { d } => (d * nf).floor() as usize,
            KRule::Top { offset } => n.saturating_sub(offset),
            KRule::Log { base, factor, ceil } => {
                let raw = factor * nf.ln() / base.ln();
                // Guard against log2(2^m) landing a hair below m.
                let nudged = raw.round();
                let raw = if (raw - nudged).abs() < 1e-9 { nudged } else { raw };
                if ceil {
                    raw.ceil() as usize
                } else {
                    raw.floor() as usize
                }
            }
        };
        check_range("k", k, 1, n)?;
        Ok(k)
    }
}

impl fmt::Display for KRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KRule::Fixed { k } => write!(f, "fixed:{k}"),
            KRule::Alpha { alpha } => write!(f, "alpha:{alpha}"),
            KRule::Dn { d } => write!(f, "dn:{d}"),
            KRule::Top { offset } => write!(f, "top:{offset}"),
            KRule::Log { base, factor, ceil } => {
                write!(f, "log:{base}:{factor}:{}", if ceil { "ceil" } else { "floor" })
            }
        }
    }
}

/// Which statistic of the parking function is recorded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Pi1,
    Nk(KRule),
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Pi1 => "pi1",
            Statistic::Nk(_) => "nk",
        }
    }
}

/// Normalization applied to the raw statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scaling {
    None,
    N,
    NAlpha(f64),
    LogN,
}

impl Scaling {
    pub fn divisor(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            Scaling::None => 1.0,
            Scaling::N => nf,
            Scaling::NAlpha(a) => nf.powf(a),
            Scaling::LogN => nf.ln(),
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaling::None => f.write_str("none"),
            Scaling::N => f.write_str("n"),
            Scaling::NAlpha(a) => write!(f, "n^{a}"),
            Scaling::LogN => f.write_str("log_n"),
        }
    }
}

impl FromStr for Scaling {
    type Err = Error;

    /// `none`, `n`, `n^0.5`, `log_n`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "none" | "1" => Ok(Scaling::None),
            "n" => Ok(Scaling::N),
            "log_n" | "logn" | "log n" => Ok(Scaling::LogN),
            _ => s
                .strip_prefix("n^")
                .and_then(|a| a.parse::<f64>().ok())
                .filter(|a| a.is_finite() && *a > 0.0)
                .map(Scaling::NAlpha)
                .ok_or_else(|| Error::Parse(format!("invalid scaling `{s}`"))),
        }
    }
}

impl TryFrom<String> for Scaling {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scaling> for String {
    fn from(s: Scaling) -> String {
        s.to_string()
    }
}

/// The law a sample is compared against. Parameters left out are inferred
/// from the schedule and `n` where possible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ReferenceLaw {
    /// The exact finite-`n` law of the statistic.
    Exact,
    /// `x - x ln x`.
    Untilted,
    /// `F_c`; `c` defaults to the constant of a `1 + c/n` schedule.
    Tilted { c: Option<f64> },
    /// `1 - e^{-rate x}`; `rate` defaults to `-c` of a `1 + c/n^a` schedule.
    Exponential { rate: Option<f64> },
    /// `(1 - q) q^{k-1}` on `k >= 1`.
    Geometric,
    Poisson { lambda: f64 },
    /// Poisson with mean `lambda_c(c, d)`, defaults from the schedule and
    /// the `Dn` rule.
    PoissonTilted { c: Option<f64>, d: Option<f64> },
    /// Poisson with mean `(1 - q) L / q`, `L = n q^k`.
    PoissonGeometric,
    /// Limit law of `N_k` for fixed `q > 1` and fixed `k`.
    Zsum {
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// `Σ_{i <= kmax} Y_i`; `kmax = None` is the infinite sum.
    Ysum {
        kmax: Option<usize>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    PointMass { at: i64 },
    /// Only the mean is compared.
    Constant { value: f64 },
}

fn default_tol() -> f64 {
    1e-12
}

impl ReferenceLaw {
    pub fn is_continuous(&self) -> bool {
        matches!(
            self,
            ReferenceLaw::Untilted | ReferenceLaw::Tilted { .. } | ReferenceLaw::Exponential { .. }
        )
    }
}

/// Which sampler produces the statistic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerPath {
    /// Draws only what the statistic needs.
    #[default]
    Fast,
    /// Builds the whole parking function for every sample.
    Full,
}

/// One Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExperiment")]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    pub schedule: QSchedule,
    pub statistic: Statistic,
    pub samples: usize,
    pub seed: u64,
    pub reference: ReferenceLaw,
    pub scaling: Scaling,
    pub sampler: SamplerPath,
}

impl ExperimentConfig {
    /// Structural checks that do not need sampling.
    pub fn validate(&self) -> Result<()> {
        check_range("n", self.n, 1, u32::MAX as usize)?;
        check_range("samples", self.samples, 1, usize::MAX)?;
        self.schedule.validate_range(self.n, self.n)?;
        if let Statistic::Nk(rule) = self.statistic {
            rule.resolve(self.n)?;
        }
        let continuous = self.reference.is_continuous();
        let scaled = self.scaling != Scaling::None;
        if continuous && !scaled {
            return Err(Error::Incompatible(format!(
                "continuous reference {:?} needs a scaling for an integer statistic",
                self.reference
            )));
        }
        if !continuous && scaled && !matches!(self.reference, ReferenceLaw::Constant { .. }) {
            return Err(Error::Incompatible(format!(
                "discrete reference {:?} cannot be compared with a scaled statistic",
                self.reference
            )));
        }
        let needs_count = matches!(
            self.reference,
            ReferenceLaw::PoissonTilted { .. }
                | ReferenceLaw::PoissonGeometric
                | ReferenceLaw::Zsum { .. }
                | ReferenceLaw::Ysum { .. }
        );
        let needs_first = matches!(
            self.reference,
            ReferenceLaw::Untilted
                | ReferenceLaw::Tilted { .. }
                | ReferenceLaw::Exponential { .. }
                | ReferenceLaw::Geometric
        );
        match self.statistic {
            Statistic::Pi1 if needs_count => Err(Error::Incompatible(format!(
                "{:?} is a law of N_k, not of π_1",
                self.reference
            ))),
            Statistic::Nk(_) if needs_first => Err(Error::Incompatible(format!(
                "{:?} is a law of π_1, not of N_k",
                self.reference
            ))),
            _ => Ok(()),
        }
    }

    /// Resolved `q_n`.
    pub fn q(&self) -> Result<f64> {
        self.schedule.evaluate(self.n)
    }

    /// Resolved `k`, if the statistic is `N_k`.
    pub fn k(&self) -> Result<Option<usize>> {
        match self.statistic {
            Statistic::Pi1 => Ok(None),
            Statistic::Nk(rule) => rule.resolve(self.n).map(Some),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    n: usize,
    q: String,
    statistic: String,
    k: Option<KRule>,
    samples: usize,
    seed: u64,
    reference: ReferenceLaw,
    #[serde(default = "default_scaling")]
    scaling: Scaling,
    #[serde(default)]
    sampler: SamplerPath,
}

fn default_scaling() -> Scaling {
    Scaling::None
}

impl TryFrom<RawExperiment> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawExperiment) -> Result<Self> {
        let statistic = match (raw.statistic.as_str(), raw.k) {
            ("pi1", None) => Statistic::Pi1,
            ("pi1", Some(_)) => {
                return Err(Error::Parse("`k` is only meaningful for statistic `nk`".into()))
            }
            ("nk", Some(rule)) => Statistic::Nk(rule),
            ("nk", None) => return Err(Error::Parse("statistic `nk` needs `k`".into())),
            (other, _) => {
                return Err(Error::Parse(format!(
                    "unknown statistic `{other}` (expected `pi1` or `nk`)"
                )))
            }
        };
        let config = ExperimentConfig {
            name: raw.name,
            n: raw.n,
            schedule: raw.q.parse()?,
            statistic,
            samples: raw.samples,
            seed: raw.seed,
            reference: raw.reference,
            scaling: raw.scaling,
            sampler: raw.sampler,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, rename = "experiment")]
    experiments: Vec<ExperimentConfig>,
}

/// Parses a TOML file holding `[[experiment]]` tables. Errors carry the line
/// and column reported by the TOML parser.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    toml::from_str::<ConfigFile>(text)
        .map(|f| f.experiments)
        .map_err(|e| Error::Parse(e.to_string()))
}
