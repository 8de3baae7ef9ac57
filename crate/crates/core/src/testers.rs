//! Test-k-Linear, Test-k-Sparse and Test-k-Junta, with the bucket search
//! they share and Monte Carlo influence estimation.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::hankel::approx_poly_sparsity_test;
use crate::oracle::{sample_gaussian, splice, Queryable};
use crate::reference::mean_stderr;
use crate::selfcorrect::{additivity_tester, approx_low_degree_tester, gaussian_radius, ApproxQueryG, ApproximateG};
use crate::verdict::{Run, TesterVerdict};

pub use crate::verdict::Decision;

/// A random assignment of the coordinates `0..n` to buckets `0..r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketPartition {
    n: usize,
    r: usize,
    assign: Vec<usize>,
}

impl BucketPartition {
    /// Each coordinate goes to a uniformly random bucket, independently.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self> {
        if r == 0 {
            return Err(invalid("need at least one bucket"));
        }
        let assign = (0..n).map(|_| rng.random_range(0..r)).collect();
        Ok(Self { n, r, assign })
    }

    pub fn from_assignment(r: usize, assign: Vec<usize>) -> Result<Self> {
        if let Some(&b) = assign.iter().find(|&&b| b >= r) {
            return Err(Error::IndexOutOfRange { index: b, n: r });
        }
        Ok(Self { n: assign.len(), r, assign })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn bucket_of(&self, coord: usize) -> usize {
        self.assign[coord]
    }

    pub fn members(&self, bucket: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assign[i] == bucket).collect()
    }

    /// Coordinates lying in any of `buckets`.
    pub fn union(&self, buckets: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = buckets.iter().copied().collect();
        (0..self.n).filter(|i| set.contains(&self.assign[*i])).collect()
    }
}

/// Query bound for one bucket search over `s` buckets: `8 ceil(lg s)^2`,
/// but never below the 2 queries the top-level check always makes.
pub fn find_inf_bucket_bound(s: usize) -> u64 {
    let lg = (s.max(1) as f64).log2().ceil() as u64;
    (8 * lg * lg).max(2)
}

/// Result of one [`find_inf_bucket`] call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketSearch {
    pub bucket: Option<usize>,
    /// Calls made to the oracle passed in (not to any oracle it wraps).
    pub oracle_calls: u64,
    /// The buckets searched, sorted.
    pub set: Vec<usize>,
}

/// Binary search for a bucket whose coordinates change `f`: compare
/// `f(x_V y_rest)` with `f(y)` for `V` the union of `set`; if they differ by
/// more than `tau` (floored relative to the answer magnitudes), recurse on
/// the lower half of the bucket indices, then on the upper half.
pub fn find_inf_bucket<Q, R>(
    oracle: &mut Q,
    part: &BucketPartition,
    set: &[usize],
    tau: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<BucketSearch>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if set.is_empty() {
        return Err(invalid("bucket search needs a nonempty set"));
    }
    if let Some(&b) = set.iter().find(|&&b| b >= part.r()) {
        return Err(Error::IndexOutOfRange { index: b, n: part.r() });
    }
    if part.n() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), got: part.n() });
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut calls = 0;
    let bucket = search(oracle, part, &sorted, tau, cfg, rng, &mut calls)?;
    Ok(BucketSearch { bucket, oracle_calls: calls, set: sorted })
}

fn search<Q, R>(
    oracle: &mut Q,
    part: &BucketPartition,
    set: &[usize],
    tau: f64,
    cfg: &Config,
    rng: &mut R,
    calls: &mut u64,
) -> Result<Option<usize>>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    let n = oracle.dim();
    let x = sample_gaussian(n, rng);
    let y = sample_gaussian(n, rng);
    let mixed = oracle.ask(&splice(&x, &y, &part.union(set))?)?;
    let base = oracle.ask(&y)?;
    *calls += 2;
    if (mixed.value - base.value).abs() <= cfg.floored(tau, mixed.scale.max(base.scale)) {
        return Ok(None);
    }
    if set.len() == 1 {
        return Ok(Some(set[0]));
    }
    let (left, right) = set.split_at(set.len().div_ceil(2));
    if let Some(b) = search(oracle, part, left, tau, cfg, rng, calls)? {
        return Ok(Some(b));
    }
    search(oracle, part, right, tau, cfg, rng, calls)
}

/// Result of [`find_inf_buckets`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundBuckets {
    pub buckets: BTreeSet<usize>,
    pub searches: Vec<BucketSearch>,
}

/// `iterations` bucket searches over the not-yet-found part of `set`;
/// found buckets are removed from the search set.
pub fn find_inf_buckets<Q, R>(
    oracle: &mut Q,
    part: &BucketPartition,
    set: &[usize],
    iterations: u64,
    tau: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<FoundBuckets>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if set.is_empty() {
        return Err(invalid("bucket search needs a nonempty set"));
    }
    let mut remaining: BTreeSet<usize> = set.iter().copied().collect();
    let mut found = FoundBuckets { buckets: BTreeSet::new(), searches: Vec::new() };
    for _ in 0..iterations {
        if remaining.is_empty() {
            break;
        }
        let current: Vec<usize> = remaining.iter().copied().collect();
        let s = find_inf_bucket(oracle, part, &current, tau, cfg, rng)?;
        if let Some(b) = s.bucket {
            remaining.remove(&b);
            found.buckets.insert(b);
        }
        found.searches.push(s);
    }
    Ok(found)
}

/// A verdict plus the individual bucket searches behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedVerdict {
    pub verdict: TesterVerdict,
    pub searches: Vec<BucketSearch>,
    /// Empty (zero buckets over zero coordinates) when the tester stopped
    /// before partitioning.
    pub partition: BucketPartition,
}

/// Test-k-Linear: the additivity tester, then a bucket search against the
/// additively self-corrected oracle over `8k^2` random buckets; reject iff
/// more than `k` influential buckets turn up.
pub fn test_k_linear<Q, R>(
    oracle: &mut Q,
    k: usize,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    test_k_linear_traced(oracle, k, epsilon, eta, cfg, rng).map(|t| t.verdict)
}

pub fn test_k_linear_traced<Q, R>(
    oracle: &mut Q,
    k: usize,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TracedVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    check_common(k, epsilon, eta)?;
    let n = oracle.dim();
    let mut run = Run::start(oracle);
    let additivity = additivity_tester(oracle, epsilon, gaussian_radius(n), eta, cfg, rng)?;
    if let Some(v) = run.absorb(oracle, additivity) {
        let partition = BucketPartition { n: 0, r: 0, assign: Vec::new() };
        return Ok(TracedVerdict { verdict: v, searches: Vec::new(), partition });
    }
    let part = BucketPartition::random(n, cfg.buckets(k), rng)?;
    let all: Vec<usize> = (0..part.r()).collect();
    let tau = cfg.g_threshold_factor * eta * (n as f64).powf(1.5);
    let iterations = cfg.find_buckets_factor * k as u64;
    let found = {
        let mut g = ApproximateG::new(&mut *oracle, cfg, rng);
        find_inf_buckets(&mut g, &part, &all, iterations, tau, cfg, rng)?
    };
    run.rounds += found.searches.len() as u64;
    let verdict = if found.buckets.len() > k {
        run.reject(oracle, "k-linear/buckets", format!("{} influential buckets", found.buckets.len()))
    } else {
        run.accept(oracle)
    };
    Ok(TracedVerdict { verdict, searches: found.searches, partition: part })
}

/// Test-k-Sparse: the low-degree tester with `R = L = 2 d sqrt n`, then the
/// approximate Hankel sparsity test against the degree-d self-corrected
/// oracle.
pub fn test_k_sparse<Q, R>(
    oracle: &mut Q,
    k: usize,
    d: u32,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    check_common(k, epsilon, eta)?;
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    let n = oracle.dim();
    let mut run = Run::start(oracle);
    let radius = 2.0 * d as f64 * (n as f64).sqrt();
    let low = approx_low_degree_tester(oracle, d, epsilon, radius, radius, eta, cfg, rng)?;
    if let Some(v) = run.absorb(oracle, low) {
        return Ok(v);
    }
    let sparse = {
        let mut g = ApproxQueryG::new(&mut *oracle, d, cfg, rng);
        approx_poly_sparsity_test(&mut g, k, d, eta, cfg, rng)?
    };
    match run.absorb(oracle, sparse) {
        Some(v) => Ok(v),
        None => Ok(run.accept(oracle)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Monte Carlo estimate of `E |f(y) - f(x_S y_rest)|` over `m` independent
/// Gaussian pairs (`2m` queries).
pub fn estimate_influence<Q, R>(oracle: &mut Q, set: &[usize], m: u64, rng: &mut R) -> Result<InfluenceEstimate>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let n = oracle.dim();
    let samples = (0..m)
        .map(|_| {
            let x = sample_gaussian(n, rng);
            let y = sample_gaussian(n, rng);
            let a = oracle.query(&y)?;
            let b = oracle.query(&splice(&x, &y, set)?)?;
            Ok((a - b).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(&samples);
    Ok(InfluenceEstimate { mean, stderr, samples: m })
}

/// Test-k-Junta: `8k^2` random buckets and `ceil(8k/epsilon)` bucket
/// searches with threshold `2 eta`; reject as soon as more than `k`
/// influential buckets are found.
pub fn test_k_junta<Q, R>(
    oracle: &mut Q,
    k: usize,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    test_k_junta_traced(oracle, k, epsilon, eta, cfg, rng).map(|t| t.verdict)
}

pub fn test_k_junta_traced<Q, R>(
    oracle: &mut Q,
    k: usize,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TracedVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    check_common(k, epsilon, eta)?;
    let mut run = Run::start(oracle);
    let part = BucketPartition::random(oracle.dim(), cfg.buckets(k), rng)?;
    let mut remaining: BTreeSet<usize> = (0..part.r()).collect();
    let mut influential = BTreeSet::new();
    let mut searches = Vec::new();
    for _ in 0..cfg.junta_rounds(k, epsilon) {
        if remaining.is_empty() {
            break;
        }
        run.rounds += 1;
        let current: Vec<usize> = remaining.iter().copied().collect();
        let s = find_inf_bucket(oracle, &part, &current, 2.0 * eta, cfg, rng)?;
        let found = s.bucket;
        searches.push(s);
        if let Some(b) = found {
            remaining.remove(&b);
            influential.insert(b);
            if influential.len() > k {
                let detail = format!("{} influential buckets", influential.len());
                let verdict = run.reject(oracle, "k-junta/buckets", detail);
                return Ok(TracedVerdict { verdict, searches, partition: part });
            }
        }
    }
    Ok(TracedVerdict { verdict: run.accept(oracle), searches, partition: part })
}

/// Worst-case query count of [`test_k_junta`]:
/// `ceil(8k/epsilon) * 8 ceil(lg 8k^2)^2`.
pub fn junta_query_budget(k: usize, epsilon: f64, cfg: &Config) -> u64 {
    cfg.junta_rounds(k, epsilon) * find_inf_bucket_bound(cfg.buckets(k))
}

fn check_common(k: usize, epsilon: f64, eta: f64) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon must lie in (0, 1)"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(invalid("eta must be a non-negative number"));
    }
    Ok(())
}
