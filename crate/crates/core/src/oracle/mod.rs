//! Function instances, noisy query access, and the point primitives every
//! tester is built from.
//!
//! Testers never evaluate an instance directly. They go through a
//! [`Queryable`], which for raw functions is an [`OracleHandle`]: the
//! instance, a [`NoiseModel`], and a query counter. Self-corrected oracles in
//! [`crate::selfcorrect`] implement the same trait on top of a handle.

mod instance;
mod noise;

use std::ops::Deref;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use instance::{to_rational, FunctionInstance, JuntaInstance, SparsePolynomial, Term};
pub use noise::NoiseModel;
pub(crate) use noise::splitmix64;

use crate::error::{Error, Result};

/// The seeded pseudorandom stream used throughout the crate.
pub type Stream = ChaCha8Rng;

pub fn stream_from_seed(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Seed for the `index`-th independent sub-run of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// A point of R^n with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|v| v * s).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `n` i.i.d. standard normal coordinates.
pub fn sample_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Point {
    Point((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
}

/// `(u_1^i, ..., u_n^i)`; `i = 0` gives the all-ones vector.
pub fn coordinatewise_power(u: &[f64], i: u32) -> Point {
    Point(u.iter().map(|v| v.powi(i as i32)).collect())
}

/// Takes `x` on the coordinates in `set` and `y` everywhere else.
pub fn splice(x: &[f64], y: &[f64], set: &[usize]) -> Result<Point> {
    instance::check_dim(x.len(), y.len())?;
    let mut out = y.to_vec();
    for &i in set {
        if i >= x.len() {
            return Err(Error::IndexOutOfRange { index: i, n: x.len() });
        }
        out[i] = x[i];
    }
    Ok(Point(out))
}

/// A query answer together with what the asker needs for numerically honest
/// thresholds: `scale` bounds the magnitude of the floating-point terms that
/// produced `value`, and `error_bound` bounds the deviation from the true
/// function value that the oracle is allowed to make.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Answer {
    pub value: f64,
    pub scale: f64,
    pub error_bound: f64,
}

/// Query access to a function on R^n.
pub trait Queryable {
    fn dim(&self) -> usize;

    fn ask(&mut self, x: &[f64]) -> Result<Answer>;

    /// Number of queries made to the underlying raw function so far.
    fn query_count(&self) -> u64;

    fn query(&mut self, x: &[f64]) -> Result<f64> {
        self.ask(x).map(|a| a.value)
    }
}

impl<Q: Queryable + ?Sized> Queryable for &mut Q {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn ask(&mut self, x: &[f64]) -> Result<Answer> {
        (**self).ask(x)
    }

    fn query_count(&self) -> u64 {
        (**self).query_count()
    }
}

/// An η-approximate oracle for a function instance. Single owner; the
/// counter only moves forward unless [`OracleHandle::reset_count`] is called.
#[derive(Debug, Clone)]
pub struct OracleHandle {
    instance: FunctionInstance,
    noise: NoiseModel,
    seed: u64,
    counter: u64,
}

impl OracleHandle {
    pub fn new(instance: impl Into<FunctionInstance>, noise: NoiseModel, seed: u64) -> Self {
        Self { instance: instance.into(), noise, seed, counter: 0 }
    }

    pub fn exact(instance: impl Into<FunctionInstance>) -> Self {
        Self::new(instance, NoiseModel::Exact, 0)
    }

    pub fn instance(&self) -> &FunctionInstance {
        &self.instance
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn reset_count(&mut self) {
        self.counter = 0;
    }

    /// Exact rational evaluation at a rational point. Only available when
    /// the oracle is noise free; counts as one query.
    pub fn query_exact(&mut self, x: &[BigRational]) -> Result<BigRational> {
        if !self.noise.is_exact() {
            return Err(Error::Unsupported("exact queries need a noise-free oracle".into()));
        }
        let v = self.instance.eval_exact(x)?;
        self.counter += 1;
        Ok(v)
    }
}

impl Queryable for OracleHandle {
    fn dim(&self) -> usize {
        self.instance.n()
    }

    fn ask(&mut self, x: &[f64]) -> Result<Answer> {
        check_finite(x)?;
        let truth = self.instance.eval(x)?;
        self.counter += 1;
        let value = self.noise.perturb(truth, x, self.seed);
        let error_bound = self.noise.effective_eta(truth);
        let scale = self.instance.magnitude_unchecked(x).max(value.abs()) + error_bound;
        Ok(Answer { value, scale, error_bound })
    }

    fn query_count(&self) -> u64 {
        self.counter
    }
}
