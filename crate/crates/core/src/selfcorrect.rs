//! Self-correction oracles and the additivity / low-degree testers built on
//! them.
//!
//! Every comparison threshold is floored relative to the magnitude of the
//! floating-point terms being compared ([`Config::floored`]), so exact
//! in-class functions are never rejected because of round-off.

use rand::{Rng, SeedableRng};

use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::oracle::{norm, sample_gaussian, Answer, Point, Queryable, Stream};
use crate::verdict::{Run, TesterVerdict};

/// `1` inside `B(0, r)`, else `ceil(||p|| / r)`, so that `p / kappa` lies in
/// the ball.
pub fn kappa(p: &[f64], r: f64) -> u64 {
    let len = norm(p);
    if len <= r {
        1
    } else {
        (len / r).ceil() as u64
    }
}

/// Default concentration radius `2 sqrt(n)` of the standard Gaussian.
pub fn gaussian_radius(n: usize) -> f64 {
    2.0 * (n as f64).sqrt()
}

fn add(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Three Gaussian checks per round: oddness, the difference identity, and
/// three-point additivity at scale `1/sqrt 2`.
pub fn test_additivity<Q, R>(
    oracle: &mut Q,
    delta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if !(delta >= 0.0) {
        return Err(invalid("delta must be non-negative"));
    }
    let n = oracle.dim();
    let mut run = Run::start(oracle);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..cfg.additivity_rounds {
        run.rounds += 1;
        let x = sample_gaussian(n, rng);
        let y = sample_gaussian(n, rng);
        let z = sample_gaussian(n, rng);

        let fx = oracle.ask(&x)?;
        let fmx = oracle.ask(&scaled(&x, -1.0))?;
        let odd = fmx.value + fx.value;
        if odd.abs() > cfg.floored(delta, fx.scale.max(fmx.scale)) {
            return Ok(run.reject(oracle, "additivity/odd", format!("|f(-x)+f(x)| = {odd:e}")));
        }

        let fy = oracle.ask(&y)?;
        let fxy = oracle.ask(&add(&x, &y, -1.0))?;
        let diff = fxy.value - (fx.value - fy.value);
        if diff.abs() > cfg.floored(delta, fx.scale.max(fy.scale).max(fxy.scale)) {
            return Ok(run.reject(oracle, "additivity/difference", format!("residual {diff:e}")));
        }

        let a = oracle.ask(&scaled(&add(&x, &y, -1.0), s))?;
        let b = oracle.ask(&scaled(&add(&x, &z, -1.0), s))?;
        let c = oracle.ask(&scaled(&add(&z, &y, -1.0), s))?;
        let three = a.value - (b.value + c.value);
        if three.abs() > cfg.floored(delta, a.scale.max(b.scale).max(c.scale)) {
            return Ok(run.reject(oracle, "additivity/three-point", format!("residual {three:e}")));
        }
    }
    Ok(run.accept(oracle))
}

/// Single-sample additive self-correction:
/// `kappa_p * (f(p/kappa_p - x) + f(x))` with `x ~ N(0, I)`. Two queries.
pub fn approximate_g<Q, R>(p: &[f64], oracle: &mut Q, r: f64, rng: &mut R) -> Result<Answer>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    let k = kappa(p, r) as f64;
    let x = sample_gaussian(oracle.dim(), rng);
    let a = oracle.ask(&add(&scaled(p, 1.0 / k), &x, -1.0))?;
    let b = oracle.ask(&x)?;
    Ok(Answer {
        value: k * (a.value + b.value),
        scale: k * (a.scale + b.scale),
        error_bound: k * (a.error_bound + b.error_bound),
    })
}

/// Median of `m` independent [`approximate_g`] samples (`2m` queries).
pub fn approximate_g_median<Q, R>(
    p: &[f64],
    oracle: &mut Q,
    r: f64,
    m: u64,
    rng: &mut R,
) -> Result<Answer>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    let samples = (0..m.max(1))
        .map(|_| approximate_g(p, oracle, r, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(median_answer(samples))
}

fn median_answer(mut samples: Vec<Answer>) -> Answer {
    let scale = samples.iter().map(|a| a.scale).fold(0.0, f64::max);
    let error_bound = samples.iter().map(|a| a.error_bound).fold(0.0, f64::max);
    samples.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mid = samples.len() / 2;
    let value = if samples.len() % 2 == 1 {
        samples[mid].value
    } else {
        0.5 * (samples[mid - 1].value + samples[mid].value)
    };
    Answer { value, scale, error_bound }
}

/// Additivity test followed by `ceil(c/epsilon)` comparisons of `f(p)`
/// against its self-corrected value at Gaussian points inside `B(0, radius)`.
pub fn additivity_tester<Q, R>(
    oracle: &mut Q,
    epsilon: f64,
    radius: f64,
    alpha: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    check_epsilon(epsilon)?;
    let n = oracle.dim();
    let delta = 3.0 * alpha;
    let mut run = Run::start(oracle);
    let sub = test_additivity(oracle, delta, cfg, rng)?;
    if let Some(v) = run.absorb(oracle, sub) {
        return Ok(v);
    }
    let n15 = (n as f64).powf(1.5);
    for _ in 0..cfg.additivity_outer_rounds(epsilon) {
        run.rounds += 1;
        let p = sample_gaussian(n, rng);
        if p.norm() > radius {
            continue;
        }
        let k = kappa(&p, cfg.r_additive) as f64;
        let fp = oracle.ask(&p)?;
        let g = approximate_g_median(&p, oracle, cfg.r_additive, cfg.median_samples, rng)?;
        let gap = (fp.value - g.value).abs();
        let threshold =
            cfg.additivity_threshold_factor * cfg.floored(delta, fp.scale.max(g.scale)) * n15 * k;
        if gap > threshold {
            return Ok(run.reject(
                oracle,
                "additivity/self-correction",
                format!("|f(p) - g(p)| = {gap:e} > {threshold:e}"),
            ));
        }
    }
    Ok(run.accept(oracle))
}

/// `(alpha_1, ..., alpha_{d+1})` with `alpha_i = (-1)^(i+1) C(d+1, i)`.
pub fn forward_difference_coeffs(d: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(d as usize + 1);
    let mut binom = 1.0f64;
    for i in 1..=d + 1 {
        binom = binom * (d + 2 - i) as f64 / i as f64;
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        out.push(sign * binom.round());
    }
    out
}

/// `sum_{i=0}^{d+1} alpha_i f(p + i q)` with `alpha_0 = -1`, which vanishes
/// identically on polynomials of degree at most `d`.
fn characterization_residual<Q>(oracle: &mut Q, p: &[f64], q: &[f64], d: u32) -> Result<(f64, f64)>
where
    Q: Queryable + ?Sized,
{
    let mut coeffs = vec![-1.0];
    coeffs.extend(forward_difference_coeffs(d));
    let mut sum = 0.0;
    let mut largest = 0.0f64;
    for (i, c) in coeffs.iter().enumerate() {
        let a = oracle.ask(&add(p, q, i as f64))?;
        sum += c * a.value;
        largest = largest.max(c.abs() * a.scale);
    }
    Ok((sum, largest))
}

/// Forward-difference checks along Gaussian lines at the grid of covariance
/// scales `(j, t)`, `j in 1..=d+1`, `t in 0..=d+1`.
pub fn approx_characterization_test<Q, R>(
    oracle: &mut Q,
    d: u32,
    delta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if d < 1 {
        return Err(invalid("degree must be at least 1"));
    }
    let n = oracle.dim();
    let mut run = Run::start(oracle);
    for _ in 0..cfg.characterization_rounds_for(d) {
        run.rounds += 1;
        for j in 1..=d + 1 {
            let j = j as f64;
            for t in 0..=d + 1 {
                let spread = ((t * t + 1) as f64).sqrt();
                for (ps, qs) in [(j * spread, 1.0), (j, spread)] {
                    let p = sample_gaussian(n, rng).scaled(ps);
                    let q = sample_gaussian(n, rng).scaled(qs);
                    let (res, largest) = characterization_residual(oracle, &p, &q, d)?;
                    if res.abs() > cfg.floored(delta, largest) {
                        return Ok(run.reject(
                            oracle,
                            "low-degree/characterization",
                            format!("residual {res:e} at scales ({ps:.3}, {qs:.3})"),
                        ));
                    }
                }
            }
            let p = sample_gaussian(n, rng).scaled(j);
            let q = sample_gaussian(n, rng).scaled(j);
            let (res, largest) = characterization_residual(oracle, &p, &q, d)?;
            if res.abs() > cfg.floored(delta, largest) {
                return Ok(run.reject(
                    oracle,
                    "low-degree/characterization",
                    format!("residual {res:e} at scales ({j}, {j})"),
                ));
            }
        }
    }
    Ok(run.accept(oracle))
}

/// `sum_{i=1}^{d+1} alpha_i f(p + i q)` for a given direction `q`; equals
/// `f(p)` whenever `f` has degree at most `d`. `d + 1` queries.
pub fn self_correct_along<Q>(oracle: &mut Q, p: &[f64], q: &[f64], d: u32) -> Result<Answer>
where
    Q: Queryable + ?Sized,
{
    let mut out = Answer { value: 0.0, scale: 0.0, error_bound: 0.0 };
    for (i, c) in forward_difference_coeffs(d).into_iter().enumerate() {
        let a = oracle.ask(&add(p, q, (i + 1) as f64))?;
        out.value += c * a.value;
        out.scale += c.abs() * a.scale;
        out.error_bound += c.abs() * a.error_bound;
    }
    Ok(out)
}

/// Degree-d self-correction at a point of the small ball, with a fresh
/// Gaussian direction.
pub fn approx_query_g_in_ball<Q, R>(
    p: &[f64],
    oracle: &mut Q,
    d: u32,
    cfg: &Config,
    rng: &mut R,
) -> Result<Answer>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    let r = cfg.degree_radius(d);
    if norm(p) > r * (1.0 + 1e-12) {
        return Err(invalid(format!("point of norm {} outside the ball of radius {r}", norm(p))));
    }
    let q = sample_gaussian(oracle.dim(), rng);
    self_correct_along(oracle, p, &q, d)
}

/// Degree-d self-corrected value at any point. Outside the small ball it
/// evaluates at `d + 1` Chebyshev-scaled points `c_i p` inside the ball and
/// extrapolates the interpolating univariate polynomial to `1`.
pub fn approx_query_g<Q, R>(
    p: &[f64],
    oracle: &mut Q,
    d: u32,
    cfg: &Config,
    rng: &mut R,
) -> Result<Answer>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    let r = cfg.degree_radius(d);
    let len = norm(p);
    if len <= r {
        return approx_query_g_in_ball(p, oracle, d, cfg, rng);
    }
    let m = d as usize + 1;
    let nodes: Vec<f64> = (0..m)
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
            (r / len) * theta.cos()
        })
        .collect();
    let mut values = Vec::with_capacity(m);
    let mut inner = Vec::with_capacity(m);
    for &c in &nodes {
        let a = approx_query_g_in_ball(&scaled(p, c), oracle, d, cfg, rng)?;
        values.push(a.value);
        inner.push(a);
    }
    let weights = lagrange_weights(&nodes, 1.0)?;
    let value = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
    let scale = weights.iter().zip(&inner).map(|(w, a)| w.abs() * a.scale).sum();
    let error_bound = weights.iter().zip(&inner).map(|(w, a)| w.abs() * a.error_bound).sum();
    Ok(Answer { value, scale, error_bound })
}

/// Characterization test, then `ceil(c/epsilon)` comparisons of `f(p)`
/// against [`approx_query_g`] at points `p ~ (2 d sqrt(n) / bound_radius) N(0, I)`.
#[allow(clippy::too_many_arguments)]
pub fn approx_low_degree_tester<Q, R>(
    oracle: &mut Q,
    d: u32,
    epsilon: f64,
    radius: f64,
    bound_radius: f64,
    alpha: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    check_epsilon(epsilon)?;
    if !(radius > 0.0 && bound_radius > 0.0) {
        return Err(invalid("radii must be positive"));
    }
    let n = oracle.dim();
    let delta = (d as f64 + 1.0).exp2() * alpha;
    let mut run = Run::start(oracle);
    let sub = approx_characterization_test(oracle, d, delta, cfg, rng)?;
    if let Some(v) = run.absorb(oracle, sub) {
        return Ok(v);
    }
    let sqrt_n = (n as f64).sqrt();
    let sample_scale = 2.0 * d as f64 * sqrt_n / bound_radius;
    let ball = 2.0 * d as f64 * radius * sqrt_n / bound_radius;
    for _ in 0..cfg.low_degree_outer_rounds(epsilon) {
        run.rounds += 1;
        let p = sample_gaussian(n, rng).scaled(sample_scale);
        if p.norm() > ball {
            continue;
        }
        let fp = oracle.ask(&p)?;
        let g = approx_query_g(&p, oracle, d, cfg, rng)?;
        let gap = (fp.value - g.value).abs();
        let delta_eff = cfg.floored(delta, fp.scale.max(g.scale));
        let threshold = theta_low(cfg, n, d, radius, bound_radius, delta_eff);
        if gap > threshold {
            return Ok(run.reject(
                oracle,
                "low-degree/self-correction",
                format!("|f(p) - g(p)| = {gap:e} > {threshold:e}"),
            ));
        }
    }
    Ok(run.accept(oracle))
}

fn theta_low(cfg: &Config, n: usize, d: u32, radius: f64, bound_radius: f64, delta: f64) -> f64 {
    if cfg.theta_low_analytic {
        let exponent = (2.0 * n as f64).powf(45.0 * d as f64);
        2.0 * exponent.exp2() * (radius / bound_radius).powi(d as i32) * delta
    } else {
        cfg.theta_low_factor * delta * (n as f64).powf(1.5)
    }
}

/// Lagrange basis values `l_j(at)` for pairwise distinct `nodes`, computed
/// in the first barycentric form (stable for extrapolation).
pub fn lagrange_weights(nodes: &[f64], at: f64) -> Result<Vec<f64>> {
    for (i, a) in nodes.iter().enumerate() {
        if nodes[..i].contains(a) {
            return Err(Error::DuplicateNode(*a));
        }
    }
    if let Some(j) = nodes.iter().position(|&x| x == at) {
        let mut w = vec![0.0; nodes.len()];
        w[j] = 1.0;
        return Ok(w);
    }
    let ell: f64 = nodes.iter().map(|x| at - x).product();
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let denom: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, xk)| xj - xk)
                .product();
            ell / ((at - xj) * denom)
        })
        .collect())
}

/// Value at `at` of the unique polynomial of degree `< nodes.len()` through
/// `(nodes[i], values[i])`.
pub fn lagrange_interp_eval(nodes: &[f64], values: &[f64], at: f64) -> Result<f64> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: nodes.len(), got: values.len() });
    }
    let w = lagrange_weights(nodes, at)?;
    Ok(w.iter().zip(values).map(|(a, b)| a * b).sum())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(invalid("epsilon must lie in (0, 1)"))
    }
}

/// [`approximate_g`] packaged as an oracle. Each answer costs `2m` queries
/// to the wrapped oracle; `query_count` reports those raw queries.
pub struct ApproximateG<'a, Q: Queryable + ?Sized> {
    inner: &'a mut Q,
    r: f64,
    samples: u64,
    rng: Stream,
}

impl<'a, Q: Queryable + ?Sized> ApproximateG<'a, Q> {
    pub fn new<R: Rng + ?Sized>(inner: &'a mut Q, cfg: &Config, rng: &mut R) -> Self {
        Self {
            inner,
            r: cfg.r_additive,
            samples: cfg.median_samples,
            rng: Stream::seed_from_u64(rng.random()),
        }
    }
}

impl<Q: Queryable + ?Sized> Queryable for ApproximateG<'_, Q> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn ask(&mut self, x: &[f64]) -> Result<Answer> {
        Point::new(x.to_vec())?;
        approximate_g_median(x, self.inner, self.r, self.samples, &mut self.rng)
    }

    fn query_count(&self) -> u64 {
        self.inner.query_count()
    }
}

/// [`approx_query_g`] packaged as an oracle; at most `(d+1)^2` raw queries
/// per answer.
pub struct ApproxQueryG<'a, Q: Queryable + ?Sized> {
    inner: &'a mut Q,
    d: u32,
    cfg: Config,
    rng: Stream,
}

impl<'a, Q: Queryable + ?Sized> ApproxQueryG<'a, Q> {
    pub fn new<R: Rng + ?Sized>(inner: &'a mut Q, d: u32, cfg: &Config, rng: &mut R) -> Self {
        Self { inner, d, cfg: cfg.clone(), rng: Stream::seed_from_u64(rng.random()) }
    }
}

impl<Q: Queryable + ?Sized> Queryable for ApproxQueryG<'_, Q> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn ask(&mut self, x: &[f64]) -> Result<Answer> {
        Point::new(x.to_vec())?;
        approx_query_g(x, self.inner, self.d, &self.cfg, &mut self.rng)
    }

    fn query_count(&self) -> u64 {
        self.inner.query_count()
    }
}
