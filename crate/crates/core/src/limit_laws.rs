//! Limiting distributions of `π_1` and `N_k` across the `q` regimes, plus the
//! Borel comparators for the uniform measure.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_positive, Error, Result};
use crate::pmf::{poisson_binomial, poisson_binomial_full, DiscretePMF};

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: x,
            reason: "must lie in [0, 1]",
        })
    }
}

fn check_q_above_one(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must exceed 1",
        })
    }
}

/// `ln |e^y - 1|` without overflow for large `|y|`.
fn ln_abs_expm1(y: f64) -> f64 {
    if y > 0.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        (-y.exp_m1()).ln()
    }
}

/// `ln((1 - e^{-c}) / (1 - e^{-cx}))`, valid for either sign of `c`.
fn tilt_log_ratio(x: f64, c: f64) -> f64 {
    ln_abs_expm1(-c) - ln_abs_expm1(-c * x)
}

/// `x - x ln x`, the `q = 1` limit law of `π_1 / n`.
pub fn law_q1_cdf(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(q1_cdf(x))
}

fn q1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x - x * x.ln()
    }
}

/// Limit CDF of `π_1 / n` when `q = 1 + c/n`; `c = 0` gives [`law_q1_cdf`].
pub fn law_fc_cdf(x: f64, c: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(fc_cdf(x, c))
}

fn fc_cdf(x: f64, c: f64) -> f64 {
    if c == 0.0 {
        return q1_cdf(x);
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    (x + (c * x).exp_m1() / c * tilt_log_ratio(x, c)).clamp(0.0, 1.0)
}

/// Density of [`law_fc_cdf`]: `e^{cx} ln((1 - e^{-c}) / (1 - e^{-cx}))`.
pub fn law_fc_density(x: f64, c: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "must lie in (0, 1]",
        });
    }
    Ok(fc_density(x, c))
}

fn fc_density(x: f64, c: f64) -> f64 {
    if c == 0.0 {
        return -x.ln();
    }
    ((c * x).exp() * tilt_log_ratio(x, c)).max(0.0)
}

/// `1 - e^{-cx}`.
pub fn law_exponential_cdf(x: f64, rate: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    Ok(if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })
}

/// `(1 - q) q^{k-1}`, the fixed `q < 1` limit of `P(π_1 = k)`.
pub fn law_geometric_pmf(k: usize, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must lie in (0, 1)",
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "k",
            value: 0,
            lo: 1,
            hi: i64::MAX,
        });
    }
    Ok((1.0 - q) * q.powi(k as i32 - 1))
}

/// `(1/n)(1 - q^{-(k+1)})`, the fixed `q > 1` approximation of
/// `P(π_1 = n - k)`.
pub fn corner_upper_q(n: usize, q: f64, k: usize) -> Result<f64> {
    check_q_above_one(q)?;
    if k >= n {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as i64,
            lo: 0,
            hi: n as i64 - 1,
        });
    }
    Ok(-(-((k + 1) as f64) * q.ln()).exp_m1() / n as f64)
}

/// Poisson parameter of `N_{⌊dn⌋}` when `q = 1 + c/n`. Coincides with the
/// limit density of `π_1 / n` at `d`.
pub fn lambda_c(c: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(fc_density(d, c))
}

/// A piecewise-continuous limit law on `[0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ContinuousLaw {
    /// `x - x ln x` on `[0, 1]`.
    Untilted,
    /// `F_c` on `[0, 1]`.
    Tilted { c: f64 },
    Exponential { rate: f64 },
    Uniform01,
}

impl ContinuousLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ContinuousLaw::Untilted => q1_cdf(x.clamp(0.0, 1.0)),
            ContinuousLaw::Tilted { c } => fc_cdf(x.clamp(0.0, 1.0), c),
            ContinuousLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            ContinuousLaw::Uniform01 => x.clamp(0.0, 1.0),
        }
    }

    /// Density where it exists; `None` outside the support or at a
    /// singularity.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            ContinuousLaw::Untilted if x > 0.0 && x <= 1.0 => Some(-x.ln()),
            ContinuousLaw::Tilted { c } if x > 0.0 && x <= 1.0 => Some(fc_density(x, c)),
            ContinuousLaw::Exponential { rate } if x >= 0.0 => Some(rate * (-rate * x).exp()),
            ContinuousLaw::Uniform01 if (0.0..=1.0).contains(&x) => Some(1.0),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ContinuousLaw::Untilted => 0.25,
            ContinuousLaw::Tilted { c } => tilted_mean(c),
            ContinuousLaw::Exponential { rate } => 1.0 / rate,
            ContinuousLaw::Uniform01 => 0.5,
        }
    }
}

/// `∫_0^1 (1 - F_c(x)) dx` by composite Simpson on a fine grid.
fn tilted_mean(c: f64) -> f64 {
    let m = 4096;
    let h = 1.0 / m as f64;
    let g = |x: f64| 1.0 - fc_cdf(x, c);
    let mut acc = g(0.0) + g(1.0);
    for i in 1..m {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Certified truncation of an infinite Bernoulli sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    /// Index of the last term kept.
    pub truncation: usize,
    /// Upper bound on the total variation error from the neglected terms.
    pub bound: f64,
}

/// Law of `Σ_{j >= k} Z_j` with `Z_j ~ Bernoulli((q-1) q^{k-1} / (q^j - 1))`,
/// the fixed `q > 1` limit of `N_k`.
///
/// Terms past `M` carry at most `q^{k-M-1} / (1 - q^{-(M+1)})` mass in total.
pub fn law_zsum(q: f64, k: usize, tol: f64) -> Result<(DiscretePMF, TailBound)> {
    check_q_above_one(q)?;
    check_positive("tol", tol)?;
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "k",
            value: 0,
            lo: 1,
            hi: i64::MAX,
        });
    }
    let lq = q.ln();
    let bound = |m: usize| {
        let edge = -((m + 1) as f64) * lq;
        ((k as f64) * lq + edge).exp() / -edge.exp_m1()
    };
    let mut m = k;
    while bound(m) >= tol / 10.0 {
        m += 1;
    }
    let ps: Vec<f64> = (k..=m)
        .map(|j| {
            // (q-1) q^{k-1} / (q^j - 1) = (q-1) q^{k-1-j} / (1 - q^{-j})
            let tail = -(-(j as f64) * lq).exp_m1();
            ((q - 1.0) * ((k as f64 - 1.0 - j as f64) * lq).exp() / tail).min(1.0)
        })
        .collect();
    let pmf = poisson_binomial(&ps)?;
    Ok((
        pmf,
        TailBound {
            truncation: m,
            bound: bound(m),
        },
    ))
}

/// Law of `Σ_{i=0}^{kmax} Y_i` with `Y_i ~ Bernoulli((q-1) / q^{i+1})`.
///
/// `None` means the infinite sum, truncated once the neglected mass
/// `q^{-(M+1)}` drops below `tol / 10`. Finite horizons are exact.
pub fn law_ysum(q: f64, kmax: Option<usize>, tol: f64) -> Result<(DiscretePMF, TailBound)> {
    check_q_above_one(q)?;
    check_positive("tol", tol)?;
    let lq = q.ln();
    let neglected = |m: usize| (-((m + 1) as f64) * lq).exp();
    let (last, bound) = match kmax {
        Some(k) => (k, 0.0),
        None => {
            let mut m = 0;
            while neglected(m) >= tol / 10.0 {
                m += 1;
            }
            (m, neglected(m))
        }
    };
    let ps: Vec<f64> = (0..=last)
        .map(|i| (q - 1.0) * (-((i + 1) as f64) * lq).exp())
        .collect();
    let pmf = match kmax {
        Some(_) => poisson_binomial_full(&ps)?,
        None => poisson_binomial(&ps)?,
    };
    Ok((
        pmf,
        TailBound {
            truncation: last,
            bound,
        },
    ))
}

/// `e^{-j} j^{j-1} / j!`.
pub fn borel_pmf(j: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::OutOfRange {
            what: "j",
            value: 0,
            lo: 1,
            hi: i64::MAX,
        });
    }
    let jf = j as f64;
    Ok((-jf + (jf - 1.0) * jf.ln() - ln_gamma(jf + 1.0)).exp())
}

/// Which corner of the uniform `π_1` law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `P(π_1 = k) ~ c_k / n` for fixed `k`.
    Low,
    /// `P(π_1 = n - k) ~ c_k / n` for fixed `k`.
    High,
}

/// Coefficient `c_k` of the uniform corner asymptotics, with `X` Borel:
/// `1 + P(X >= k)` on the low side, `P(X <= k + 1)` on the high side.
pub fn dh_corner(k: usize, side: Side) -> Result<f64> {
    match side {
        Side::Low => {
            if k == 0 {
                return Err(Error::OutOfRange {
                    what: "k",
                    value: 0,
                    lo: 1,
                    hi: i64::MAX,
                });
            }
            let below: f64 = (1..k).map(|j| borel_pmf(j).expect("j >= 1")).sum();
            Ok(2.0 - below)
        }
        Side::High => Ok((1..=k + 1).map(|j| borel_pmf(j).expect("j >= 1")).sum()),
    }
}
