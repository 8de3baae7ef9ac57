//! Every tunable constant of the testers in one place.
//!
//! Keys match the field names; experiment files may override any of them by
//! name (see [`Config::apply_override`]).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeterminantMode {
    /// Exact rational Hankel determinant from exact evaluations.
    Rational,
    /// Floating-point determinant compared against `det_tolerance`.
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Relative floor on every comparison threshold: a check compares
    /// against `max(nominal threshold, delta_floor * (1 + scale))`.
    pub delta_floor: f64,
    /// Ball radius for additive self-correction.
    pub r_additive: f64,
    /// Ball radius for degree-d self-correction.
    pub r_degree: f64,
    /// Use `(4d)^-6` instead of `r_degree`.
    pub r_degree_analytic: bool,
    pub additivity_rounds: u64,
    /// Outer rounds of the additivity tester are `ceil(factor / epsilon)`.
    pub additivity_round_factor: f64,
    /// The `5` in `5 * delta * n^1.5 * kappa`.
    pub additivity_threshold_factor: f64,
    /// Defaults to `4 d^2` when absent.
    pub characterization_rounds: Option<u64>,
    pub low_degree_round_factor: f64,
    /// Low-degree comparison threshold is `theta_low_factor * delta * n^1.5`.
    pub theta_low_factor: f64,
    /// Use `2 * 2^((2n)^(45d)) * (R/L)^d * delta` instead.
    pub theta_low_analytic: bool,
    /// Samples per self-corrected value; the median is returned.
    pub median_samples: u64,
    /// The constant `C` in `T = 4 C d (k+1)^2`.
    pub sparsity_round_constant: f64,
    /// Number of buckets is `bucket_factor * k^2`.
    pub bucket_factor: u64,
    /// FindInfBuckets iterates `find_buckets_factor * k` times.
    pub find_buckets_factor: u64,
    /// Junta tester iterates `ceil(junta_round_factor * k / epsilon)` times.
    pub junta_round_factor: f64,
    /// Bucket threshold against the self-corrected oracle is `c_g * eta * n^1.5`.
    pub g_threshold_factor: f64,
    pub det_mode: DeterminantMode,
    pub det_tolerance: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            delta_floor: 1e-9,
            r_additive: 1.0 / 50.0,
            r_degree: 1.0,
            r_degree_analytic: false,
            additivity_rounds: 20,
            additivity_round_factor: 8.0,
            additivity_threshold_factor: 5.0,
            characterization_rounds: None,
            low_degree_round_factor: 8.0,
            theta_low_factor: 5.0,
            theta_low_analytic: false,
            median_samples: 1,
            sparsity_round_constant: 1.0,
            bucket_factor: 8,
            find_buckets_factor: 8,
            junta_round_factor: 8.0,
            g_threshold_factor: 10.0,
            det_mode: DeterminantMode::Rational,
            det_tolerance: 1e-8,
        }
    }
}

impl Config {
    /// `max(base, delta_floor * (1 + scale))`.
    pub fn floored(&self, base: f64, scale: f64) -> f64 {
        base.max(self.delta_floor * (1.0 + scale))
    }

    pub fn degree_radius(&self, d: u32) -> f64 {
        if self.r_degree_analytic {
            (4.0 * d.max(1) as f64).powi(-6)
        } else {
            self.r_degree
        }
    }

    pub fn characterization_rounds_for(&self, d: u32) -> u64 {
        self.characterization_rounds.unwrap_or(4 * (d as u64) * (d as u64))
    }

    pub fn additivity_outer_rounds(&self, epsilon: f64) -> u64 {
        (self.additivity_round_factor / epsilon).ceil() as u64
    }

    pub fn low_degree_outer_rounds(&self, epsilon: f64) -> u64 {
        (self.low_degree_round_factor / epsilon).ceil() as u64
    }

    pub fn sparsity_rounds(&self, k: usize, d: u32) -> u64 {
        let k1 = (k + 1) as f64;
        (4.0 * self.sparsity_round_constant.min(1.0) * d as f64 * k1 * k1).ceil() as u64
    }

    pub fn buckets(&self, k: usize) -> usize {
        (self.bucket_factor as usize * k * k).max(1)
    }

    pub fn junta_rounds(&self, k: usize, epsilon: f64) -> u64 {
        (self.junta_round_factor * k as f64 / epsilon).ceil() as u64
    }

    /// Sets one key by name. Booleans take 0/1; `det_mode` takes 0
    /// (rational) or 1 (float). On error `self` is left unchanged.
    pub fn apply_override(&mut self, key: &str, v: f64) -> Result<()> {
        let mut next = self.clone();
        next.set(key, v)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn set(&mut self, key: &str, v: f64) -> Result<()> {
        let as_u64 = |v: f64| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(invalid(format!("{key} must be a non-negative integer")))
            }
        };
        match key {
            "delta_floor" => self.delta_floor = v,
            "r_additive" => self.r_additive = v,
            "r_degree" => self.r_degree = v,
            "r_degree_analytic" => self.r_degree_analytic = v != 0.0,
            "additivity_rounds" => self.additivity_rounds = as_u64(v)?,
            "additivity_round_factor" => self.additivity_round_factor = v,
            "additivity_threshold_factor" => self.additivity_threshold_factor = v,
            "characterization_rounds" => self.characterization_rounds = Some(as_u64(v)?),
            "low_degree_round_factor" => self.low_degree_round_factor = v,
            "theta_low_factor" => self.theta_low_factor = v,
            "theta_low_analytic" => self.theta_low_analytic = v != 0.0,
            "median_samples" => self.median_samples = as_u64(v)?,
            "sparsity_round_constant" => self.sparsity_round_constant = v,
            "bucket_factor" => self.bucket_factor = as_u64(v)?,
            "find_buckets_factor" => self.find_buckets_factor = as_u64(v)?,
            "junta_round_factor" => self.junta_round_factor = v,
            "g_threshold_factor" => self.g_threshold_factor = v,
            "det_mode" => {
                self.det_mode = if v == 0.0 { DeterminantMode::Rational } else { DeterminantMode::Float }
            }
            "det_tolerance" => self.det_tolerance = v,
            _ => return Err(invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn with_overrides(mut self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        for (k, v) in overrides {
            self.apply_override(k, *v)?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !in_unit(self.r_additive) {
            return Err(invalid("r_additive must lie in (0, 1)"));
        }
        if !(self.r_degree > 0.0 && self.r_degree.is_finite()) {
            return Err(invalid("r_degree must be positive"));
        }
        if !(self.delta_floor >= 0.0) {
            return Err(invalid("delta_floor must be non-negative"));
        }
        if self.median_samples == 0 {
            return Err(invalid("median_samples must be at least 1"));
        }
        if self.bucket_factor == 0 || self.find_buckets_factor == 0 {
            return Err(invalid("bucket factors must be positive"));
        }
        Ok(())
    }
}
