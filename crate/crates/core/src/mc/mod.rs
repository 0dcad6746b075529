//! Seeded Monte Carlo for `π_1` and `N_k`, with goodness-of-fit reports.
//!
//! Samples are produced in fixed-size chunks; chunk `i` always draws from
//! stream `i` of the configured seed and chunks are concatenated in index
//! order, so output does not depend on the number of worker threads.

pub mod config;
pub mod gof;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_positive, check_range, Error, Result};
use crate::exact_laws::{nk_bernoulli_params, nk_pmf, pi1_pmf_table};
use crate::limit_laws::{lambda_c, law_ysum, law_zsum, ContinuousLaw};
use crate::mallows::{log_q, sample_code, sample_trunc_geom_t, QSchedule};
use crate::parking::{from_code, ParkingFunction};
use crate::perm::Permutation;
use crate::pmf::{poisson_pmf, tv_distance, DiscretePMF};
use crate::rng::RandomStream;

pub use config::{parse_config, ExperimentConfig, KRule, ReferenceLaw, SamplerPath, Scaling, Statistic};
pub use gof::{chi_square, empirical_pmf, histogram, ks_against, ks_discrete, ks_distance, ChiSquare};

/// Samples per random stream.
pub const CHUNK: usize = 4096;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "PARKFN_THREADS";

/// Draws a parking function from the induced measure: a Mallows(`q`) Lehmer
/// code read off along an independent uniform permutation.
pub fn sample_pf(n: usize, q: f64, rng: &mut RandomStream) -> Result<ParkingFunction> {
    check_range("n", n, 1, usize::MAX)?;
    check_positive("q", q)?;
    Ok(sample_pf_t(n, log_q(q), rng))
}

fn sample_pf_t(n: usize, t: f64, rng: &mut RandomStream) -> ParkingFunction {
    let code = sample_code(n, t, rng);
    let mut word: Vec<usize> = (1..=n).collect();
    word.shuffle(rng);
    let tau = Permutation::new(word).expect("shuffle of the identity");
    from_code(&code, &tau)
}

/// A run of indices sharing one thinning envelope.
#[derive(Clone, Debug)]
struct Block {
    start: usize,
    end: usize,
    bound: f64,
    log_miss: f64,
}

/// Sampler for a sum of independent Bernoullis with decreasing parameters.
///
/// Indices are grouped into blocks whose parameters stay within a factor of
/// two of the block maximum. Inside a block, candidate indices are reached
/// by geometric jumps at the block maximum and accepted with probability
/// `p_j / bound`, so a draw costs O(#blocks + mean) rather than O(#terms).
#[derive(Clone, Debug)]
pub struct ThinnedCount {
    ps: Vec<f64>,
    blocks: Vec<Block>,
}

impl ThinnedCount {
    pub fn new(ps: Vec<f64>) -> Self {
        let mut blocks = Vec::new();
        let mut start = 0;
        while start < ps.len() {
            let mut bound = ps[start];
            let mut end = start + 1;
            while end < ps.len() && ps[end] >= 0.5 * bound {
                bound = bound.max(ps[end]);
                end += 1;
            }
            if bound > 0.0 {
                blocks.push(Block {
                    start,
                    end,
                    bound: bound.min(1.0),
                    log_miss: (-bound.min(1.0)).ln_1p(),
                });
            }
            start = end;
        }
        Self { ps, blocks }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn draw(&self, rng: &mut RandomStream) -> u32 {
        let mut count = 0;
        for b in &self.blocks {
            let mut i = b.start;
            loop {
                if b.bound < 1.0 {
                    let u = 1.0 - rng.next_f64();
                    let gap = u.ln() / b.log_miss;
                    if gap >= (b.end - i) as f64 {
                        break;
                    }
                    i += gap as usize;
                }
                if i >= b.end {
                    break;
                }
                let p = self.ps[i];
                if p >= b.bound || rng.next_f64() * b.bound < p {
                    count += 1;
                }
                i += 1;
            }
        }
        count
    }
}

/// Produces one value of the configured statistic per call.
#[derive(Clone, Debug)]
pub enum StatSampler {
    /// `π_1` from a uniform position and a single code entry.
    FirstFast { n: usize, t: f64 },
    /// `N_k` from the independent indicators `1{code[j] = k}`, `j >= k`.
    CountFast(ThinnedCount),
    FirstFull { n: usize, t: f64 },
    CountFull { n: usize, t: f64, k: usize },
}

impl StatSampler {
    pub fn new(n: usize, q: f64, k: Option<usize>, path: SamplerPath) -> Result<Self> {
        check_range("n", n, 1, usize::MAX)?;
        check_positive("q", q)?;
        let t = log_q(q);
        Ok(match (k, path) {
            (None, SamplerPath::Fast) => StatSampler::FirstFast { n, t },
            (None, SamplerPath::Full) => StatSampler::FirstFull { n, t },
            (Some(k), SamplerPath::Fast) => {
                StatSampler::CountFast(ThinnedCount::new(nk_bernoulli_params(n, q, k)?))
            }
            (Some(k), SamplerPath::Full) => {
                check_range("k", k, 1, n)?;
                StatSampler::CountFull { n, t, k }
            }
        })
    }

    pub fn draw(&self, rng: &mut RandomStream) -> u32 {
        match self {
            StatSampler::FirstFast { n, t } => {
                let position = rng.uniform_index(*n);
                sample_trunc_geom_t(position, *t, rng) as u32
            }
            StatSampler::CountFast(thinned) => thinned.draw(rng),
            StatSampler::FirstFull { n, t } => sample_pf_t(*n, *t, rng).first() as u32,
            StatSampler::CountFull { n, t, k } => {
                let pf = sample_pf_t(*n, *t, rng);
                pf.as_slice().iter().filter(|&&p| p == *k).count() as u32
            }
        }
    }
}

/// Worker count from `PARKFN_THREADS`, else rayon's default.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// `count` draws from `sampler` using chunked streams of `seed`.
pub fn draw_samples(sampler: &StatSampler, count: usize, seed: u64, threads: usize) -> Vec<u32> {
    let chunks = count.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = RandomStream::new(seed, c as u64);
                let len = CHUNK.min(count - c * CHUNK);
                (0..len).map(|_| sampler.draw(&mut rng)).collect::<Vec<u32>>()
            })
            .collect::<Vec<Vec<u32>>>()
    };
    let parts = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    };
    parts.concat()
}

/// Raw (unscaled) statistic values for an experiment.
pub fn sample_values(cfg: &ExperimentConfig) -> Result<Vec<u32>> {
    sample_values_with_threads(cfg, thread_count())
}

pub fn sample_values_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<u32>> {
    cfg.validate()?;
    let sampler = StatSampler::new(cfg.n, cfg.q()?, cfg.k()?, cfg.sampler)?;
    Ok(draw_samples(&sampler, cfg.samples, cfg.seed, threads))
}

/// A reference law with any defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub enum ResolvedReference {
    Continuous(ContinuousLaw),
    Discrete(DiscretePMF),
    Constant(f64),
}

const POISSON_TAIL: f64 = 1e-15;

fn geometric_table(q: f64) -> Result<DiscretePMF> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Incompatible(format!("geometric reference needs q < 1, got {q}")));
    }
    let mut probs = Vec::new();
    let mut survive = 1.0;
    while survive > POISSON_TAIL {
        probs.push(survive * (1.0 - q));
        survive *= q;
    }
    if let Some(last) = probs.last_mut() {
        *last += survive;
    }
    DiscretePMF::from_dense(1, probs)
}

/// Fills in reference parameters from the schedule and `k` rule.
pub fn resolve_reference(cfg: &ExperimentConfig) -> Result<ResolvedReference> {
    let n = cfg.n;
    let q = cfg.q()?;
    let k = cfg.k()?;
    let need_k = || k.ok_or_else(|| Error::Incompatible("reference needs statistic nk".into()));
    let near_one = || {
        cfg.schedule.near_one_constant().ok_or_else(|| {
            Error::Incompatible(format!("cannot infer c from schedule {}", cfg.schedule))
        })
    };
    Ok(match &cfg.reference {
        ReferenceLaw::Exact => ResolvedReference::Discrete(match k {
            None => DiscretePMF::from_dense(1, pi1_pmf_table(n, q)?)?,
            Some(k) => nk_pmf(n, q, k)?,
        }),
        ReferenceLaw::Untilted => ResolvedReference::Continuous(ContinuousLaw::Untilted),
        ReferenceLaw::Tilted { c } => {
            let c = match c {
                Some(c) => *c,
                None => near_one()?,
            };
            ResolvedReference::Continuous(ContinuousLaw::Tilted { c })
        }
        ReferenceLaw::Exponential { rate } => {
            let rate = match (rate, cfg.schedule) {
                (Some(r), _) => *r,
                (None, QSchedule::OnePlusOverNAlpha { c, .. }) if c < 0.0 => -c,
                _ => {
                    return Err(Error::Incompatible(format!(
                        "cannot infer exponential rate from schedule {}",
                        cfg.schedule
                    )))
                }
            };
            check_positive("rate", rate)?;
            ResolvedReference::Continuous(ContinuousLaw::Exponential { rate })
        }
        ReferenceLaw::Geometric => ResolvedReference::Discrete(geometric_table(q)?),
        ReferenceLaw::Poisson { lambda } => ResolvedReference::Discrete(poisson_pmf(*lambda, POISSON_TAIL)?),
        ReferenceLaw::PoissonTilted { c, d } => {
            let c = match c {
                Some(c) => *c,
                None => near_one()?,
            };
            let d = match (d, cfg.statistic) {
                (Some(d), _) => *d,
                (None, Statistic::Nk(KRule::Dn { d })) => d,
                _ => return Err(Error::Incompatible("cannot infer d without a `dn` rule".into())),
            };
            ResolvedReference::Discrete(poisson_pmf(lambda_c(c, d)?, POISSON_TAIL)?)
        }
        ReferenceLaw::PoissonGeometric => {
            let k = need_k()?;
            let level = n as f64 * q.powi(k as i32);
            ResolvedReference::Discrete(poisson_pmf((1.0 - q) * level / q, POISSON_TAIL)?)
        }
        ReferenceLaw::Zsum { tol } => ResolvedReference::Discrete(law_zsum(q, need_k()?, *tol)?.0),
        ReferenceLaw::Ysum { kmax, tol } => ResolvedReference::Discrete(law_ysum(q, *kmax, *tol)?.0),
        ReferenceLaw::PointMass { at } => ResolvedReference::Discrete(DiscretePMF::point_mass(*at)),
        ReferenceLaw::Constant { value } => ResolvedReference::Constant(*value),
    })
}

/// Column order of [`GofReport::csv_row`].
pub const REPORT_HEADER: &str = "experiment,n,q_resolved,k_resolved,N,ks,chi2,dof,tv,emp_mean,ref_mean,seed";

/// Outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub experiment: String,
    pub statistic: String,
    pub n: usize,
    pub q_resolved: f64,
    pub k_resolved: Option<usize>,
    pub samples: usize,
    pub ks: Option<f64>,
    pub chi2: Option<f64>,
    pub dof: Option<usize>,
    pub chi2_p: Option<f64>,
    pub tv: Option<f64>,
    pub emp_mean: f64,
    pub emp_var: f64,
    pub ref_mean: Option<f64>,
    pub seed: u64,
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl GofReport {
    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        let _ = write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.q_resolved,
            opt(self.k_resolved),
            self.samples,
            opt(self.ks),
            opt(self.chi2),
            opt(self.dof),
            opt(self.tv),
            self.emp_mean,
            opt(self.ref_mean),
            self.seed
        );
        row
    }
}

/// Samples, scales and compares against the configured reference.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<GofReport> {
    run_experiment_with_threads(cfg, thread_count())
}

pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<GofReport> {
    cfg.validate()?;
    let reference = resolve_reference(cfg)?;
    let raw = sample_values_with_threads(cfg, threads)?;
    evaluate(cfg, &reference, &raw)
}

/// Compares already drawn raw values with a resolved reference.
pub fn evaluate(cfg: &ExperimentConfig, reference: &ResolvedReference, raw: &[u32]) -> Result<GofReport> {
    if raw.is_empty() {
        return Err(Error::EmptySample);
    }
    let divisor = cfg.scaling.divisor(cfg.n);
    let scaled: Vec<f64> = raw.iter().map(|&v| f64::from(v) / divisor).collect();
    let count = scaled.len() as f64;
    let emp_mean = scaled.iter().sum::<f64>() / count;
    let emp_var = scaled.iter().map(|x| (x - emp_mean).powi(2)).sum::<f64>() / count;
    let mut report = GofReport {
        experiment: cfg.name.clone(),
        statistic: cfg.statistic.name().to_string(),
        n: cfg.n,
        q_resolved: cfg.q()?,
        k_resolved: cfg.k()?,
        samples: raw.len(),
        ks: None,
        chi2: None,
        dof: None,
        chi2_p: None,
        tv: None,
        emp_mean,
        emp_var,
        ref_mean: None,
        seed: cfg.seed,
    };
    match reference {
        ResolvedReference::Continuous(law) => {
            report.ks = Some(ks_distance(&scaled, law)?);
            report.ref_mean = Some(law.mean());
        }
        ResolvedReference::Discrete(pmf) => {
            let empirical = empirical_pmf(raw)?;
            report.ks = Some(ks_discrete(&empirical, pmf));
            report.tv = Some(tv_distance(&empirical, pmf));
            if let Some(chi) = chi_square(&histogram(raw), pmf) {
                report.chi2 = Some(chi.statistic);
                report.dof = Some(chi.dof);
                report.chi2_p = Some(chi.p_value);
            }
            report.ref_mean = Some(pmf.mean());
        }
        ResolvedReference::Constant(value) => report.ref_mean = Some(*value),
    }
    Ok(report)
}
