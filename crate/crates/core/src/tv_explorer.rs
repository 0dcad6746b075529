//! Lower bounds on the limiting total variation distance between the
//! `q`-measure (fixed `q > 1`) and the uniform measure on parking functions,
//! built from the limit laws of `N_1` and `N_n`.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_positive, Error, Result};
use crate::limit_laws::law_zsum;

/// Series tolerance used throughout the scan.
pub const SERIES_TOL: f64 = 1e-12;

/// Largest value of `N_1` that an event set may mention.
pub const MAX_EVENT: usize = 4;

/// Grid spacing of the coarse scan.
pub const GRID_STEP: f64 = 1e-3;

/// Target width of the golden-section bracket.
pub const REFINE_TOL: f64 = 1e-6;

/// Events `{N_1 ∈ A}` for `A ⊆ {1, 2, 3, 4}`, optionally joined by
/// `{N_n = 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BoundSpec {
    events: Vec<usize>,
    include_top: bool,
}

impl BoundSpec {
    pub fn new(mut events: Vec<usize>, include_top: bool) -> Result<Self> {
        events.sort_unstable();
        events.dedup();
        if events.is_empty() {
            return Err(Error::Parse("event set must be nonempty".into()));
        }
        if let Some(&bad) = events.iter().find(|&&m| m == 0 || m > MAX_EVENT) {
            return Err(Error::OutOfRange {
                what: "event",
                value: bad as i64,
                lo: 1,
                hi: MAX_EVENT as i64,
            });
        }
        Ok(Self { events, include_top })
    }

    pub fn events(&self) -> &[usize] {
        &self.events
    }

    pub fn include_top(&self) -> bool {
        self.include_top
    }

    /// All 15 nonempty subsets, in binary order.
    pub fn all_subsets(include_top: bool) -> Vec<BoundSpec> {
        (1u32..1 << MAX_EVENT)
            .map(|mask| {
                let events = (1..=MAX_EVENT).filter(|m| mask >> (m - 1) & 1 == 1).collect();
                BoundSpec { events, include_top }
            })
            .collect()
    }
}

/// `1|2|4` style label.
impl fmt::Display for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.events.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join("|"))
    }
}

impl FromStr for BoundSpec {
    type Err = Error;

    /// Comma- or bar-separated event list, e.g. `2` or `1,2`; the `N_n`
    /// event is included.
    fn from_str(s: &str) -> Result<Self> {
        let events = s
            .split([',', '|'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("invalid event set `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        BoundSpec::new(events, true)
    }
}

/// Uniform-measure limit `P(N_1 = m) = e^{-1} / (m - 1)!`.
pub fn limit_unif_n1_pmf(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::OutOfRange {
            what: "m",
            value: 0,
            lo: 1,
            hi: i64::MAX,
        });
    }
    let log_fact: f64 = (1..m).map(|i| (i as f64).ln()).sum();
    Ok((-1.0 - log_fact).exp())
}

/// Fixed `q > 1` limit of `P(N_1 = m)`.
pub fn limit_q_n1_pmf(q: f64, m: usize, tol: f64) -> Result<f64> {
    Ok(law_zsum(q, 1, tol)?.0.prob(m as i64))
}

/// Fixed `q > 1` limit of `P(N_n = 1)`.
pub fn limit_q_nn_one(q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must exceed 1",
        });
    }
    Ok((q - 1.0) / q)
}

/// `P(Σ_j Z_j = m)` for `m = 0..=MAX_EVENT` only, by a DP that never tracks
/// counts above `MAX_EVENT`.
fn n1_head(q: f64, tol: f64) -> [f64; MAX_EVENT + 1] {
    let lq = q.ln();
    let mut head = [0.0; MAX_EVENT + 1];
    head[0] = 1.0;
    let mut j = 1usize;
    loop {
        let jf = j as f64;
        let inv = -(-jf * lq).exp_m1();
        let p = ((q - 1.0) * (-jf * lq).exp() / inv).min(1.0);
        for m in (1..=MAX_EVENT).rev() {
            head[m] = head[m] * (1.0 - p) + head[m - 1] * p;
        }
        head[0] *= 1.0 - p;
        // Remaining terms carry at most q^{1-(j+1)} / (1 - q^{-(j+1)}) mass.
        let edge = -((j + 1) as f64) * lq;
        if (lq + edge).exp() / -edge.exp_m1() < tol / 10.0 {
            break;
        }
        j += 1;
    }
    head
}

fn unif_head() -> [f64; MAX_EVENT + 1] {
    let mut head = [0.0; MAX_EVENT + 1];
    for (m, h) in head.iter_mut().enumerate().skip(1) {
        *h = limit_unif_n1_pmf(m).expect("m >= 1");
    }
    head
}

fn bound_from_head(q: f64, head: &[f64; MAX_EVENT + 1], unif: &[f64; MAX_EVENT + 1], spec: &BoundSpec) -> f64 {
    let diff: f64 = spec.events.iter().map(|&m| head[m] - unif[m]).sum();
    let mut value = diff.abs();
    if spec.include_top {
        value = value.max(((q - 1.0) / q - 1.0 / E).abs());
    }
    value
}

/// `L(A, q)`: the largest gap between the two limits over the events in `spec`.
pub fn lower_bound(q: f64, spec: &BoundSpec) -> Result<f64> {
    limit_q_nn_one(q)?;
    Ok(bound_from_head(q, &n1_head(q, SERIES_TOL), &unif_head(), spec))
}

/// Minimizer of `L(A, ·)` over a range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Minimum {
    pub spec: String,
    pub q_star: f64,
    pub value: f64,
}

/// Scan range for `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QRange {
    pub lo: f64,
    pub hi: f64,
}

impl QRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        check_positive("hi", hi)?;
        if !(lo > 1.0 && lo.is_finite() && hi > lo + 2.0 * GRID_STEP) {
            return Err(Error::InvalidParameter {
                name: "lo",
                value: lo,
                reason: "range must satisfy 1 < lo < hi with room for the grid",
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn grid(&self) -> Vec<f64> {
        let steps = ((self.hi - self.lo) / GRID_STEP).floor() as usize;
        (0..=steps).map(|i| self.lo + i as f64 * GRID_STEP).collect()
    }
}

impl FromStr for QRange {
    type Err = Error;

    /// `lo:hi`, e.g. `1.01:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid range `{s}` (expected lo:hi)"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        QRange::new(lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
    }
}

/// One grid point: the `N_1` head at `q`.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub q: f64,
    head: [f64; MAX_EVENT + 1],
}

impl GridPoint {
    pub fn bound(&self, spec: &BoundSpec) -> f64 {
        bound_from_head(self.q, &self.head, &unif_head(), spec)
    }
}

/// Evaluates the `N_1` head on the range's grid.
pub fn scan_grid(range: &QRange) -> Vec<GridPoint> {
    range
        .grid()
        .into_par_iter()
        .map(|q| GridPoint {
            q,
            head: n1_head(q, SERIES_TOL),
        })
        .collect()
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > REFINE_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn refine(spec: &BoundSpec, range: &QRange, grid: &[GridPoint]) -> Minimum {
    let unif = unif_head();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, g)| (i, bound_from_head(g.q, &g.head, &unif, spec)))
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let a = grid[best.saturating_sub(1)].q;
    let b = grid[(best + 1).min(grid.len() - 1)].q;
    let objective = |q: f64| bound_from_head(q, &n1_head(q, SERIES_TOL), &unif, spec);
    let mut q_star = golden_section(objective, a, b).clamp(range.lo, range.hi);
    let mut value = objective(q_star);
    let grid_value = bound_from_head(grid[best].q, &grid[best].head, &unif, spec);
    if grid_value < value {
        q_star = grid[best].q;
        value = grid_value;
    }
    Minimum {
        spec: spec.to_string(),
        q_star,
        value,
    }
}

/// Grid scan at step [`GRID_STEP`] then golden-section refinement to
/// [`REFINE_TOL`] around the best grid point.
pub fn minimize_bound(spec: &BoundSpec, range: &QRange) -> Minimum {
    refine(spec, range, &scan_grid(range))
}

/// Minimizers for every nonempty `A ⊆ {1, 2, 3, 4}`, sharing one grid scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetReport {
    pub minima: Vec<Minimum>,
}

impl SubsetReport {
    pub fn smallest(&self) -> &Minimum {
        self.minima
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("nonempty")
    }

    pub fn largest(&self) -> &Minimum {
        self.minima
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .expect("nonempty")
    }
}

pub fn minimize_all_subsets(range: &QRange, include_top: bool) -> SubsetReport {
    let grid = scan_grid(range);
    let minima = BoundSpec::all_subsets(include_top)
        .iter()
        .map(|spec| refine(spec, range, &grid))
        .collect();
    SubsetReport { minima }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coincidence() -> f64 {
        E / (E - 1.0)
    }

    #[test]
    fn uniform_limit() {
        assert!((limit_unif_n1_pmf(1).unwrap() - 1.0 / E).abs() < 1e-16);
        assert!((limit_unif_n1_pmf(2).unwrap() - 1.0 / E).abs() < 1e-16);
        let total: f64 = (1..40).map(|m| limit_unif_n1_pmf(m).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(limit_unif_n1_pmf(0).is_err());
    }

    #[test]
    fn q_limits() {
        assert!((limit_q_n1_pmf(coincidence(), 1, SERIES_TOL).unwrap() - 1.0 / E).abs() < 1e-10);
        assert!((limit_q_nn_one(coincidence()).unwrap() - 1.0 / E).abs() < 1e-10);
        assert!((limit_q_n1_pmf(2.0, 1, SERIES_TOL).unwrap() - 0.5).abs() < 1e-12);
        let series: f64 = (1..200).map(|l| 1.0 / (2f64.powi(l) - 1.0)).sum();
        assert!((limit_q_n1_pmf(2.0, 2, SERIES_TOL).unwrap() - 0.25 * series).abs() < 1e-12);
        assert_eq!(limit_q_nn_one(2.0).unwrap(), 0.5);
        let (ysum0, _) = crate::limit_laws::law_ysum(2.0, Some(0), 1e-12).unwrap();
        assert_eq!(limit_q_nn_one(2.0).unwrap(), ysum0.prob(1));
        assert!(limit_q_nn_one(1.0).is_err());
        let mass: f64 = (1..60).map(|m| limit_q_n1_pmf(1.5, m, SERIES_TOL).unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn head_matches_full_law() {
        for &q in &[1.05, 1.74, 3.0, 9.0] {
            let head = n1_head(q, SERIES_TOL);
            let (law, _) = law_zsum(q, 1, SERIES_TOL).unwrap();
            for (m, h) in head.iter().enumerate() {
                assert!((h - law.prob(m as i64)).abs() < 1e-12, "q={q} m={m}");
            }
        }
    }

    #[test]
    fn bound_examples() {
        let spec: BoundSpec = "2".parse().unwrap();
        assert!((lower_bound(1.74, &spec).unwrap() - 0.058).abs() < 0.002);
        let at = lower_bound(coincidence(), &spec).unwrap();
        let direct = (limit_q_n1_pmf(coincidence(), 2, SERIES_TOL).unwrap() - 1.0 / E).abs();
        assert!((at - direct).abs() < 1e-12);
        for spec in BoundSpec::all_subsets(true) {
            for &q in &[1.01, 1.5, 4.0] {
                assert!(lower_bound(q, &spec).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn minimizer_for_two() {
        let spec: BoundSpec = "2".parse().unwrap();
        let range = QRange::new(1.01, 10.0).unwrap();
        let min = minimize_bound(&spec, &range);
        assert!((min.q_star - 1.74).abs() < 0.01, "{min:?}");
        assert!((min.value - 0.058).abs() < 0.005, "{min:?}");
        assert_eq!(min.value, lower_bound(min.q_star, &spec).unwrap());
        assert!(lower_bound(1.01, &spec).unwrap() > min.value);
        assert!(lower_bound(10.0, &spec).unwrap() > min.value);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("1,2".parse::<BoundSpec>().unwrap().events(), &[1, 2]);
        assert_eq!("2|1".parse::<BoundSpec>().unwrap().to_string(), "1|2");
        assert!("5".parse::<BoundSpec>().is_err());
        assert!("".parse::<BoundSpec>().is_err());
        assert_eq!(BoundSpec::all_subsets(true).len(), 15);
        assert!("1.01:5".parse::<QRange>().is_ok());
        assert!("0.5:5".parse::<QRange>().is_err());
        assert!("3:2".parse::<QRange>().is_err());
    }
}
