//! The Mallows measure on permutations.
//!
//! Under the Mallows law with parameter `q` the Lehmer-code entries
//! `Ĩ_{<1}, ..., Ĩ_{<n}` are independent and `Ĩ_{<j}` is truncated geometric
//! on `{1, ..., j}` with mass proportional to `q^{i-1}`. Every expression of
//! the form `(1 - q^a) / (1 - q^b)` is evaluated through `t = ln q` with
//! `expm1`, so schedules like `q = 1 + c/n` do not cancel catastrophically.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_range, Error, Result};
use crate::perm::{lehmer_decode, LehmerCode, Permutation};
use crate::rng::RandomStream;

/// Below this value of `|t| * j` the `q = 1` branch with a first-order
/// correction is used.
pub const NEAR_ONE: f64 = 1e-8;

/// `ln q`, accurate for `q` close to 1.
#[inline]
pub fn log_q(q: f64) -> f64 {
    (q - 1.0).ln_1p()
}

/// `(1 - q^a) / (1 - q^b)` given `t = ln q`, for `0 <= a <= b`, `b >= 1`.
#[inline]
pub fn geom_ratio_t(a: usize, b: usize, t: f64) -> f64 {
    if a == 0 {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let (af, bf) = (a as f64, b as f64);
    if (t * bf).abs() < NEAR_ONE {
        return af / bf * (1.0 + (af - bf) * t / 2.0);
    }
    if t < 0.0 {
        (af * t).exp_m1() / (bf * t).exp_m1()
    } else {
        ((af - bf) * t).exp() * (-af * t).exp_m1() / (-bf * t).exp_m1()
    }
}

/// `(1 - q^a) / (1 - q^b)`; equals `a / b` at `q = 1`.
pub fn geom_ratio(a: usize, b: usize, q: f64) -> f64 {
    geom_ratio_t(a, b, log_q(q))
}

/// `P(Ĩ_{<j} = i) = (1 - q) q^{i-1} / (1 - q^j)` given `t = ln q`.
#[inline]
pub fn trunc_geom_pmf_t(j: usize, i: usize, t: f64) -> f64 {
    if i == 0 || i > j {
        return 0.0;
    }
    let (jf, im1) = (j as f64, (i - 1) as f64);
    if (t * jf).abs() < NEAR_ONE {
        return (1.0 + t * (im1 - (jf - 1.0) / 2.0)) / jf;
    }
    if t < 0.0 {
        (im1 * t).exp() * t.exp_m1() / (jf * t).exp_m1()
    } else {
        ((i as f64 - jf) * t).exp() * (-t).exp_m1() / (-jf * t).exp_m1()
    }
}

/// `P(Ĩ_{<j} > i)` given `t = ln q`.
#[inline]
pub fn trunc_geom_sf_t(j: usize, i: usize, t: f64) -> f64 {
    if i >= j {
        return 0.0;
    }
    geom_ratio_t(j - i, j, -t)
}

/// Truncated geometric law on `{1, ..., j}` with mass proportional to `q^{i-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncGeomParams {
    j: usize,
    q: f64,
    t: f64,
}

impl TruncGeomParams {
    pub fn new(j: usize, q: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::OutOfRange {
                what: "support size j",
                value: 0,
                lo: 1,
                hi: i64::MAX,
            });
        }
        check_positive("q", q)?;
        Ok(Self { j, q, t: log_q(q) })
    }

    pub fn support_size(&self) -> usize {
        self.j
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn pmf(&self, i: usize) -> f64 {
        trunc_geom_pmf_t(self.j, i, self.t)
    }

    /// `P(X <= i)`.
    pub fn cdf(&self, i: usize) -> f64 {
        if i >= self.j {
            1.0
        } else {
            geom_ratio_t(i, self.j, self.t)
        }
    }

    /// Mean of `X - 1`.
    pub fn mean_excess(&self) -> f64 {
        expected_excess_t(self.j, self.t)
    }
}

/// Draws from the truncated geometric law by closed-form CDF inversion.
pub fn sample_trunc_geom(params: &TruncGeomParams, rng: &mut RandomStream) -> usize {
    sample_trunc_geom_t(params.j, params.t, rng)
}

#[inline]
pub(crate) fn sample_trunc_geom_t(j: usize, t: f64, rng: &mut RandomStream) -> usize {
    if j == 1 {
        return 1;
    }
    let u = rng.next_f64();
    if t == 0.0 {
        return ((j as f64 * u) as usize + 1).min(j);
    }
    // For q > 1 draw the reflected value under 1/q.
    let s = -t.abs();
    let y = (u * (j as f64 * s).exp_m1()).ln_1p() / s;
    let i = if y.is_finite() { (y as usize + 1).clamp(1, j) } else { j };
    if t > 0.0 {
        j + 1 - i
    } else {
        i
    }
}

/// Samples `σ ~ P_n^(q)` by drawing each Lehmer-code entry independently.
pub fn sample_mallows(n: usize, q: f64, rng: &mut RandomStream) -> Result<Permutation> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    Ok(lehmer_decode(&sample_code(n, log_q(q), rng)))
}

pub(crate) fn sample_code(n: usize, t: f64, rng: &mut RandomStream) -> LehmerCode {
    let code = (1..=n).map(|j| sample_trunc_geom_t(j, t, rng)).collect();
    LehmerCode::new_unchecked(code)
}

/// `ln [j]_q` where `[j]_q = 1 + q + ... + q^{j-1}`.
fn log_q_integer(j: usize, t: f64) -> f64 {
    let jf = j as f64;
    if j == 1 {
        return 0.0;
    }
    if (t * jf).abs() < NEAR_ONE {
        return jf.ln() + (jf - 1.0) * t / 2.0;
    }
    if t < 0.0 {
        ((jf * t).exp_m1() / t.exp_m1()).ln()
    } else {
        (jf - 1.0) * t + ((-jf * t).exp_m1() / (-t).exp_m1()).ln()
    }
}

/// `ln Σ_{σ ∈ S_n} q^{I_n(σ)} = Σ_j ln [j]_q`. Never overflows.
pub fn log_q_normalizer(n: usize, q: f64) -> Result<f64> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    let t = log_q(q);
    Ok((1..=n).map(|j| log_q_integer(j, t)).sum())
}

/// `Σ_{σ ∈ S_n} q^{I_n(σ)} = Π_{j=1}^n (1 + q + ... + q^{j-1})`; `n!` at `q = 1`.
///
/// Fails with [`Error::Overflow`] when the value exceeds the `f64` range.
pub fn q_normalizer(n: usize, q: f64) -> Result<f64> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    let value = if q == 1.0 {
        (1..=n).map(|j| j as f64).product()
    } else {
        log_q_normalizer(n, q)?.exp()
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("q_normalizer"))
    }
}

/// `ln P_n^(q)(σ)`.
pub fn log_mallows_pmf(sigma: &Permutation, q: f64) -> Result<f64> {
    let n = sigma.len();
    let log_z = log_q_normalizer(n, q)?;
    Ok(sigma.inversions() as f64 * log_q(q) - log_z)
}

/// `P_n^(q)(σ) = q^{I_n(σ)} / Σ_τ q^{I_n(τ)}`, evaluated in the log domain.
pub fn mallows_pmf(sigma: &Permutation, q: f64) -> Result<f64> {
    Ok(log_mallows_pmf(sigma, q)?.exp())
}

/// `E[Ĩ_{<j} - 1] = q/(1-q) - j q^j/(1-q^j)` given `t = ln q`.
pub(crate) fn expected_excess_t(j: usize, t: f64) -> f64 {
    let jf = j as f64;
    if j == 1 {
        return 0.0;
    }
    if (t * jf).abs() < 1e-3 {
        // Cumulant expansion of the tilted uniform law on {0, ..., j-1}.
        let j2 = jf * jf;
        let t2 = t * t;
        return (jf - 1.0) / 2.0 + t * (j2 - 1.0) / 12.0 - t * t2 * (j2 * j2 - 1.0) / 720.0
            + t * t2 * t2 * (j2 * j2 * j2 - 1.0) / 30240.0;
    }
    if t < 0.0 {
        let e = (jf * t).exp();
        t.exp() / -t.exp_m1() - jf * e / -(jf * t).exp_m1()
    } else {
        (jf - 1.0) - expected_excess_t(j, -t)
    }
}

/// Exact `E_n^(q) I_n = Σ_j E I_{n,<j}`.
pub fn expected_inversions(n: usize, q: f64) -> Result<f64> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    let t = log_q(q);
    Ok((1..=n).map(|j| expected_excess_t(j, t)).sum())
}

/// A rule `n ↦ q_n` for the Mallows parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QSchedule {
    Fixed(f64),
    /// `q_n = 1 + c/n`.
    OnePlusOverN { c: f64 },
    /// `q_n = 1 + c/n^alpha`, `c != 0`, `alpha ∈ (0, 1)`.
    OnePlusOverNAlpha { c: f64, alpha: f64 },
}

impl QSchedule {
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let q = match *self {
            QSchedule::Fixed(q) => q,
            QSchedule::OnePlusOverN { c } => 1.0 + c / nf,
            QSchedule::OnePlusOverNAlpha { c, alpha } => 1.0 + c / nf.powf(alpha),
        };
        check_positive("q_n", q)?;
        Ok(q)
    }

    /// Checks the schedule's own parameters (independent of `n`).
    pub fn check_params(&self) -> Result<()> {
        match *self {
            QSchedule::Fixed(q) => check_positive("q", q),
            QSchedule::OnePlusOverN { c } => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "c",
                        value: c,
                        reason: "must be finite",
                    })
                }
            }
            QSchedule::OnePlusOverNAlpha { c, alpha } => {
                if c == 0.0 || !c.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "c",
                        value: c,
                        reason: "must be finite and nonzero",
                    });
                }
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        value: alpha,
                        reason: "must lie in (0, 1)",
                    });
                }
                Ok(())
            }
        }
    }

    /// Checks `q_n > 0` for every `n` in `lo..=hi`.
    pub fn validate_range(&self, lo: usize, hi: usize) -> Result<()> {
        check_range("n", lo, 1, hi)?;
        self.check_params()?;
        // q_n is monotone in n, so the smallest n is the worst case.
        self.evaluate(lo).map(drop)
    }

    /// The constant `c` of a `1 + c/n` schedule (0 for `q = 1`).
    pub fn near_one_constant(&self) -> Option<f64> {
        match *self {
            QSchedule::OnePlusOverN { c } => Some(c),
            QSchedule::Fixed(1.0) => Some(0.0),
            _ => None,
        }
    }
}

impl fmt::Display for QSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |c: f64| if c < 0.0 { '-' } else { '+' };
        match *self {
            QSchedule::Fixed(q) => write!(f, "q={q}"),
            QSchedule::OnePlusOverN { c } => write!(f, "q=1{}c/n:c={}", sign(c), c.abs()),
            QSchedule::OnePlusOverNAlpha { c, alpha } => {
                write!(f, "q=1{}c/n^a:c={},a={alpha}", sign(c), c.abs())
            }
        }
    }
}

impl FromStr for QSchedule {
    type Err = Error;

    /// Accepts `0.5`, `q=0.5`, `q=1+c/n:c=2`, `q=1-c/n:c=2`, `q=1-c/n^a:c=1,a=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid q-schedule `{s}`"));
        let body = s.trim();
        let body = body.strip_prefix("q=").unwrap_or(body);
        let (form, params) = match body.split_once(':') {
            Some((form, params)) => (form.trim(), params.trim()),
            None => (body, ""),
        };
        let mut c = None;
        let mut a = None;
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "c" => c = Some(v),
                "a" | "alpha" => a = Some(v),
                _ => return Err(bad()),
            }
        }
        let schedule = match form {
            "1+c/n" => QSchedule::OnePlusOverN { c: c.ok_or_else(bad)? },
            "1-c/n" => QSchedule::OnePlusOverN { c: -c.ok_or_else(bad)? },
            "1+c/n^a" => QSchedule::OnePlusOverNAlpha {
                c: c.ok_or_else(bad)?,
                alpha: a.ok_or_else(bad)?,
            },
            "1-c/n^a" => QSchedule::OnePlusOverNAlpha {
                c: -c.ok_or_else(bad)?,
                alpha: a.ok_or_else(bad)?,
            },
            other => {
                if !params.is_empty() {
                    return Err(bad());
                }
                QSchedule::Fixed(other.parse().map_err(|_| bad())?)
            }
        };
        schedule.check_params()?;
        Ok(schedule)
    }
}

impl Serialize for QSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
