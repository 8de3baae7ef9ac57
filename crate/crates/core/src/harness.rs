//! Instance generators and the seeded Monte Carlo experiment runner.
//!
//! A run is a pure function of its [`ExperimentConfig`]: trial `i` uses the
//! seed `derive_seed(seed, i)`, trials run in parallel, and results are
//! collected in trial order, so the CSV output of a replay is byte-identical.
//! Wall-clock times only appear in the JSON output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::hankel::{approx_poly_sparsity_test, exact_sparsity_test};
use crate::oracle::{derive_seed, stream_from_seed, FunctionInstance, JuntaInstance, NoiseModel, OracleHandle, SparsePolynomial};
use crate::selfcorrect::{additivity_tester, approx_low_degree_tester, gaussian_radius};
use crate::testers::{find_inf_bucket_bound, junta_query_budget, test_k_junta, test_k_linear, test_k_sparse};
use crate::verdict::{Decision, TesterVerdict};

/// Version tag written into every CSV row.
pub const CSV_SCHEMA: &str = "sparsetest-trials/1";

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPARSETEST_OUT";

/// Two-sided 95% normal quantile used for accept-rate intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterKind {
    Klinear,
    Ksparse,
    Kjunta,
    Additivity,
    Lowdegree,
    HankelExact,
    HankelApprox,
}

impl TesterKind {
    pub const ALL: [TesterKind; 7] = [
        TesterKind::Klinear,
        TesterKind::Ksparse,
        TesterKind::Kjunta,
        TesterKind::Additivity,
        TesterKind::Lowdegree,
        TesterKind::HankelExact,
        TesterKind::HankelApprox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Klinear => "klinear",
            TesterKind::Ksparse => "ksparse",
            TesterKind::Kjunta => "kjunta",
            TesterKind::Additivity => "additivity",
            TesterKind::Lowdegree => "lowdegree",
            TesterKind::HankelExact => "hankel-exact",
            TesterKind::HankelApprox => "hankel-approx",
        }
    }
}

impl fmt::Display for TesterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TesterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TesterKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| invalid(format!("unknown tester {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Yes,
    No,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Yes => "yes",
            Family::No => "no",
        })
    }
}

fn random_coeff<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mag = rng.random_range(0.5..=2.0);
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

fn distinct_coords<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k > n {
        return Err(invalid(format!("cannot pick {k} distinct coordinates out of {n}")));
    }
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    Ok(v)
}

/// Number of monomials of total degree `1..=d` in `n` variables, saturating.
fn monomial_count(n: usize, d: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=d as u128 {
        c = c.saturating_mul(n as u128 + i) / i;
    }
    c - 1
}

fn random_exponent<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> Vec<u32> {
    let deg = rng.random_range(1..=d);
    let mut e = vec![0; n];
    for _ in 0..deg {
        e[rng.random_range(0..n)] += 1;
    }
    e
}

/// `k` terms with distinct exponents of total degree in `1..=d` and
/// coefficients uniform in `±[0.5, 2]`.
pub fn random_sparse<R: Rng + ?Sized>(n: usize, k: usize, d: u32, rng: &mut R) -> Result<SparsePolynomial> {
    if n == 0 || d == 0 {
        return Err(invalid("need n >= 1 and d >= 1"));
    }
    if monomial_count(n, d) < k as u128 {
        return Err(invalid(format!("only {} monomials of degree <= {d} in {n} variables", monomial_count(n, d))));
    }
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(k);
    let mut attempts = 0u64;
    while terms.len() < k {
        attempts += 1;
        if attempts > 10_000 * (k as u64 + 1) {
            return Err(invalid("could not draw distinct monomials"));
        }
        let e = random_exponent(n, d, rng);
        if seen.insert(e.clone()) {
            terms.push((random_coeff(rng), e));
        }
    }
    SparsePolynomial::new(n, terms)
}

/// Linear form on `k` random coordinates with coefficients in `±[0.5, 2]`.
pub fn random_k_linear<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<SparsePolynomial> {
    let mut c = vec![0.0; n];
    for i in distinct_coords(n, k, rng)? {
        c[i] = random_coeff(rng);
    }
    SparsePolynomial::linear(&c)
}

fn random_junta<R: Rng + ?Sized>(n: usize, k: usize, d: u32, rng: &mut R) -> Result<JuntaInstance> {
    let relevant = distinct_coords(n, k, rng)?;
    let mut c = vec![0.0; k];
    for v in &mut c {
        *v = random_coeff(rng);
    }
    let linear = SparsePolynomial::linear(&c)?;
    let mut terms: Vec<(f64, Vec<u32>)> = linear.terms().iter().map(|t| (t.coeff, t.expo.clone())).collect();
    if d >= 2 {
        let e = random_exponent(k, d, rng);
        terms.push((random_coeff(rng), e));
    }
    let mut order = relevant;
    // Shuffle which relevant coordinate plays which inner role.
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    JuntaInstance::new(n, order, SparsePolynomial::new(k, terms)?)
}

/// A random member of the class the tester accepts.
pub fn gen_yes_instance<R: Rng + ?Sized>(
    kind: TesterKind,
    k: usize,
    d: u32,
    n: usize,
    rng: &mut R,
) -> Result<FunctionInstance> {
    match kind {
        TesterKind::Klinear | TesterKind::Additivity => Ok(random_k_linear(n, k, rng)?.into()),
        TesterKind::Ksparse | TesterKind::Lowdegree | TesterKind::HankelExact | TesterKind::HankelApprox => {
            Ok(random_sparse(n, k, d, rng)?.into())
        }
        TesterKind::Kjunta => Ok(random_junta(n, k, d, rng)?.into()),
    }
}

/// A random member of the far family for the tester: `(2k+2)`-linear with
/// unit coefficients (k-linear, k-junta), `(k+1)`-sparse (sparsity testers),
/// plus a degree-`d+1` monomial (low degree) or a square (additivity).
pub fn gen_no_instance<R: Rng + ?Sized>(
    kind: TesterKind,
    k: usize,
    d: u32,
    n: usize,
    rng: &mut R,
) -> Result<FunctionInstance> {
    match kind {
        TesterKind::Klinear | TesterKind::Kjunta => {
            let mut c = vec![0.0; n];
            for i in distinct_coords(n, 2 * k + 2, rng)? {
                c[i] = 1.0;
            }
            Ok(SparsePolynomial::linear(&c)?.into())
        }
        TesterKind::Ksparse | TesterKind::HankelExact | TesterKind::HankelApprox => {
            Ok(random_sparse(n, k + 1, d, rng)?.into())
        }
        TesterKind::Lowdegree => {
            let base = random_sparse(n, k, d, rng)?;
            Ok(with_extra_power(&base, d + 1, rng)?.into())
        }
        TesterKind::Additivity => {
            let base = random_k_linear(n, k, rng)?;
            Ok(with_extra_power(&base, 2, rng)?.into())
        }
    }
}

fn with_extra_power<R: Rng + ?Sized>(base: &SparsePolynomial, power: u32, rng: &mut R) -> Result<SparsePolynomial> {
    let n = base.n();
    let mut e = vec![0; n];
    e[rng.random_range(0..n)] = power;
    let mut terms: Vec<(f64, Vec<u32>)> = base.terms().iter().map(|t| (t.coeff, t.expo.clone())).collect();
    terms.push((random_coeff(rng), e));
    SparsePolynomial::new(n, terms)
}

pub fn gen_instance<R: Rng + ?Sized>(
    kind: TesterKind,
    family: Family,
    k: usize,
    d: u32,
    n: usize,
    rng: &mut R,
) -> Result<FunctionInstance> {
    match family {
        Family::Yes => gen_yes_instance(kind, k, d, n, rng),
        Family::No => gen_no_instance(kind, k, d, n, rng),
    }
}

/// Everything that determines an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tester: TesterKind,
    pub family: Family,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "one_u32")]
    pub d: u32,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// η handed to the tester; defaults to the noise model's nominal η.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Tester constants overridden by name (see [`Config`]).
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

fn one() -> usize {
    1
}
fn one_u32() -> u32 {
    1
}
fn default_n() -> usize {
    16
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_trials() -> u64 {
    100
}

impl ExperimentConfig {
    pub fn new(tester: TesterKind, family: Family) -> Self {
        Self {
            tester,
            family,
            k: 1,
            d: 1,
            n: default_n(),
            epsilon: default_epsilon(),
            eta: None,
            noise: NoiseModel::default(),
            trials: default_trials(),
            seed: 0,
            overrides: BTreeMap::new(),
        }
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or_else(|| self.noise.nominal_eta())
    }

    pub fn tester_config(&self) -> Result<Config> {
        Config::default().with_overrides(&self.overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.tester != TesterKind::HankelExact && self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon must lie in (0, 1)"));
        }
        if !(self.eta() >= 0.0 && self.eta().is_finite()) {
            return Err(invalid("eta must be a non-negative number"));
        }
        self.tester_config()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Worst-case query count of one run of the configured tester, from the
/// round counts in `cfg`.
pub fn query_budget(kind: TesterKind, k: usize, d: u32, epsilon: f64, cfg: &Config) -> u64 {
    let m = cfg.median_samples;
    let additivity = 7 * cfg.additivity_rounds + cfg.additivity_outer_rounds(epsilon) * (1 + 2 * m);
    let d64 = d as u64;
    let low_degree = cfg.characterization_rounds_for(d) * (d64 + 1) * (2 * (d64 + 2) + 1) * (d64 + 2)
        + cfg.low_degree_outer_rounds(epsilon) * (1 + (d64 + 1) * (d64 + 1));
    let hankel_round = 2 * k as u64 + 1;
    match kind {
        TesterKind::Klinear => {
            additivity
                + cfg.find_buckets_factor * k as u64 * find_inf_bucket_bound(cfg.buckets(k)) * 2 * m
        }
        TesterKind::Ksparse => {
            low_degree + cfg.sparsity_rounds(k, d) * hankel_round * (d64 + 1) * (d64 + 1)
        }
        TesterKind::Kjunta => junta_query_budget(k, epsilon, cfg),
        TesterKind::Additivity => additivity,
        TesterKind::Lowdegree => low_degree,
        TesterKind::HankelExact => hankel_round,
        TesterKind::HankelApprox => cfg.sparsity_rounds(k, d) * hankel_round,
    }
}

/// Runs the configured tester once on `oracle`.
#[allow(clippy::too_many_arguments)]
pub fn run_tester<R: Rng + ?Sized>(
    kind: TesterKind,
    oracle: &mut OracleHandle,
    k: usize,
    d: u32,
    epsilon: f64,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict> {
    let n = oracle.instance().n();
    match kind {
        TesterKind::Klinear => test_k_linear(oracle, k, epsilon, eta, cfg, rng),
        TesterKind::Ksparse => test_k_sparse(oracle, k, d, epsilon, eta, cfg, rng),
        TesterKind::Kjunta => test_k_junta(oracle, k, epsilon, eta, cfg, rng),
        TesterKind::Additivity => additivity_tester(oracle, epsilon, gaussian_radius(n), eta, cfg, rng),
        TesterKind::Lowdegree => {
            let radius = 2.0 * d as f64 * (n as f64).sqrt();
            approx_low_degree_tester(oracle, d, epsilon, radius, radius, eta, cfg, rng)
        }
        TesterKind::HankelExact => exact_sparsity_test(oracle, k, cfg, rng),
        TesterKind::HankelApprox => approx_poly_sparsity_test(oracle, k, d, eta, cfg, rng),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub decision: Decision,
    pub queries_used: u64,
    pub rounds: u64,
    /// Check that triggered a rejection, empty on accept.
    pub stage: String,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub accepted: u64,
    pub accept_rate: f64,
    /// Wilson 95% interval for the accept rate.
    pub ci_low: f64,
    pub ci_high: f64,
    pub queries_min: u64,
    pub queries_median: f64,
    pub queries_max: u64,
    pub query_budget: u64,
    pub budget_respected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// The tester constants after applying overrides.
    pub resolved: Config,
    pub summary: Summary,
    pub trials: Vec<TrialRecord>,
    pub wall_time_secs: f64,
}

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn median(sorted: &[u64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) as f64 / 2.0
    }
}

/// One trial: generate the instance, wrap it in a noisy oracle, run the
/// tester. All randomness derives from `trial_seed`.
pub fn run_trial(config: &ExperimentConfig, cfg: &Config, trial: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = derive_seed(config.seed, trial);
    let mut gen_rng = stream_from_seed(derive_seed(seed, 0));
    let instance = gen_instance(config.tester, config.family, config.k, config.d, config.n, &mut gen_rng)?;
    let mut oracle = OracleHandle::new(instance, config.noise, derive_seed(seed, 1));
    let mut rng = stream_from_seed(derive_seed(seed, 2));
    let v = run_tester(config.tester, &mut oracle, config.k, config.d, config.epsilon, config.eta(), cfg, &mut rng)?;
    Ok(TrialRecord {
        trial,
        seed,
        decision: v.decision,
        queries_used: v.queries_used,
        rounds: v.rounds,
        stage: v.witness.map(|w| w.stage).unwrap_or_default(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Runs every trial (in parallel) and aggregates. Any failing trial aborts
/// the whole run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let cfg = config.tester_config()?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, &cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let accepted = trials.iter().filter(|t| t.decision.is_accept()).count() as u64;
    let (ci_low, ci_high) = wilson_interval(accepted, config.trials, Z95);
    let mut queries: Vec<u64> = trials.iter().map(|t| t.queries_used).collect();
    queries.sort_unstable();
    let budget = query_budget(config.tester, config.k, config.d, config.epsilon, &cfg);
    let summary = Summary {
        trials: config.trials,
        accepted,
        accept_rate: accepted as f64 / config.trials as f64,
        ci_low,
        ci_high,
        queries_min: queries[0],
        queries_median: median(&queries),
        queries_max: *queries.last().expect("at least one trial"),
        query_budget: budget,
        budget_respected: *queries.last().expect("at least one trial") <= budget,
    };
    Ok(RunRecord {
        schema: CSV_SCHEMA.into(),
        config: config.clone(),
        config_hash: config.hash(),
        resolved: cfg,
        summary,
        trials,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema: &'a str,
    config_hash: &'a str,
    tester: &'a str,
    family: String,
    k: usize,
    d: u32,
    n: usize,
    epsilon: f64,
    eta: f64,
    trial: u64,
    seed: u64,
    decision: Decision,
    queries_used: u64,
    rounds: u64,
    stage: &'a str,
}

/// One row per trial, with a header. Contains no timing data.
pub fn write_csv<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let c = &record.config;
    for t in &record.trials {
        w.serialize(CsvRow {
            schema: &record.schema,
            config_hash: &record.config_hash,
            tester: c.tester.name(),
            family: c.family.to_string(),
            k: c.k,
            d: c.d,
            n: c.n,
            epsilon: c.epsilon,
            eta: c.eta(),
            trial: t.trial,
            seed: t.seed,
            decision: t.decision,
            queries_used: t.queries_used,
            rounds: t.rounds,
            stage: &t.stage,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(record: &RunRecord) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(record, &mut buf)?;
    String::from_utf8(buf).map_err(|e| invalid(e.to_string()))
}

/// Output directory: `explicit`, else `$SPARSETEST_OUT`, else `.`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir` and returns both paths.
pub fn write_outputs(record: &RunRecord, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(record, std::fs::File::create(&csv_path)?)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(record)? + "\n")?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::brute_force_influential_coords;

    #[test]
    fn yes_generators_respect_contracts() {
        let mut rng = stream_from_seed(1);
        for _ in 0..50 {
            let f = gen_yes_instance(TesterKind::Klinear, 2, 1, 5, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.sparsity(), 2);
            assert!(f.coeffs().all(|c| (0.5..=2.0).contains(&c.abs())));
            let f = gen_yes_instance(TesterKind::Ksparse, 3, 2, 4, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.sparsity(), 3);
            assert!(f.total_degree().unwrap() <= 2);
            let FunctionInstance::Junta(j) = gen_yes_instance(TesterKind::Kjunta, 3, 2, 16, &mut rng).unwrap() else {
                panic!("junta generator returned another kind");
            };
            assert_eq!(j.relevant().len(), 3);
            let relevant: BTreeSet<usize> = j.relevant().iter().copied().collect();
            assert!(brute_force_influential_coords(&j.to_polynomial()).is_subset(&relevant));
        }
    }

    #[test]
    fn no_generators_respect_contracts() {
        let mut rng = stream_from_seed(2);
        for _ in 0..50 {
            let f = gen_no_instance(TesterKind::Klinear, 2, 1, 10, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.sparsity(), 6);
            assert!(f.coeffs().all(|c| c == 1.0));
            let f = gen_no_instance(TesterKind::Ksparse, 2, 2, 4, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.sparsity(), 3);
            let f = gen_no_instance(TesterKind::Lowdegree, 2, 2, 4, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.total_degree(), Some(3));
            let f = gen_no_instance(TesterKind::Additivity, 1, 1, 4, &mut rng).unwrap().to_polynomial();
            assert_eq!(f.total_degree(), Some(2));
        }
    }

    #[test]
    fn infeasible_parameters_are_refused() {
        let mut rng = stream_from_seed(3);
        assert!(gen_yes_instance(TesterKind::Klinear, 5, 1, 3, &mut rng).is_err());
        assert!(gen_no_instance(TesterKind::Klinear, 2, 1, 5, &mut rng).is_err());
        assert!(gen_yes_instance(TesterKind::Ksparse, 4, 1, 3, &mut rng).is_err());
        assert_eq!(monomial_count(3, 1), 3);
        assert_eq!(monomial_count(2, 2), 5);
    }

    #[test]
    fn wilson_interval_is_ordered() {
        let (lo, hi) = wilson_interval(180, 200, Z95);
        assert!(lo < 0.9 && 0.9 < hi);
        assert_eq!(wilson_interval(0, 10, Z95).0, 0.0);
        assert_eq!(wilson_interval(10, 10, Z95).1, 1.0);
    }

    #[test]
    fn tester_names_round_trip() {
        for t in TesterKind::ALL {
            assert_eq!(t.name().parse::<TesterKind>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.name()));
        }
    }

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::from_toml(
            "tester = \"klinear\"\nfamily = \"yes\"\nk = 2\ntrials = 5\n[noise]\nkind = \"exact\"\n[overrides]\nbucket_factor = 4\n",
        )
        .unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.noise, NoiseModel::Exact);
        assert_eq!(c.tester_config().unwrap().bucket_factor, 4);
        assert!(ExperimentConfig::from_toml("tester = \"klinear\"\nfamily = \"yes\"\nbogus = 1\n").is_err());
        let bad = ExperimentConfig { trials: 0, ..c.clone() };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig { overrides: [("nope".to_string(), 1.0)].into(), ..c };
        assert!(run_experiment(&bad).is_err());
    }

    #[test]
    fn small_experiment_replays() {
        let mut c = ExperimentConfig::new(TesterKind::Kjunta, Family::Yes);
        c.k = 2;
        c.trials = 8;
        c.noise = NoiseModel::Exact;
        c.seed = 11;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(csv_string(&a).unwrap(), csv_string(&b).unwrap());
        assert_eq!(a.summary.accept_rate, 1.0);
        assert!(a.summary.budget_respected);
        assert!(a.summary.ci_low <= a.summary.accept_rate && a.summary.accept_rate <= a.summary.ci_high);
    }

    #[test]
    fn no_instances_are_far_from_their_truncations() {
        use crate::reference::mc_l1_distance;
        let mut rng = stream_from_seed(8);
        for kind in [TesterKind::Klinear, TesterKind::Ksparse] {
            for _ in 0..5 {
                let f = gen_no_instance(kind, 2, 2, 8, &mut rng).unwrap().to_polynomial();
                // Nearest k-term truncation: drop the smallest coefficients.
                let mut terms: Vec<_> = f.terms().iter().map(|t| (t.coeff, t.expo.clone())).collect();
                terms.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
                terms.truncate(2);
                let g = SparsePolynomial::new(8, terms).unwrap();
                let dist = mc_l1_distance(&f.into(), &g.into(), 20_000, &mut rng).unwrap();
                assert!(dist.mean - 3.0 * dist.stderr > 0.1, "{kind}: {dist:?}");
            }
        }
    }
}
