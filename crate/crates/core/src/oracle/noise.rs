use serde::{Deserialize, Serialize};

/// How an oracle perturbs true function values. Every variant is a
/// deterministic function of the queried point and the oracle seed, so
/// re-querying a point reproduces the same answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Exact,
    /// Additive noise drawn uniformly from `[-eta, eta]`.
    UniformBounded { eta: f64 },
    /// Rounds to a grid of spacing `2^-bits * 2^ceil(log2 max(1,|v|))`.
    RoundToPrecision { bits: u32 },
    /// Adds `+eta` or `-eta`, the sign chosen by hashing the point with `sign_seed`.
    FixedOffset { eta: f64, sign_seed: u64 },
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::UniformBounded { eta: 1e-6 }
    }
}

impl NoiseModel {
    /// Largest possible deviation `|reported - true|` for true value `v`.
    pub fn effective_eta(&self, v: f64) -> f64 {
        match *self {
            NoiseModel::Exact => 0.0,
            NoiseModel::UniformBounded { eta } | NoiseModel::FixedOffset { eta, .. } => eta,
            NoiseModel::RoundToPrecision { bits } => (-(bits as f64)).exp2() * v.abs().max(1.0),
        }
    }

    /// Nominal η of the model; rounding reports its bound at unit scale.
    pub fn nominal_eta(&self) -> f64 {
        self.effective_eta(0.0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NoiseModel::Exact)
    }

    pub(crate) fn perturb(&self, v: f64, x: &[f64], seed: u64) -> f64 {
        match *self {
            NoiseModel::Exact => v,
            NoiseModel::UniformBounded { eta } => {
                let u = unit_interval(point_hash(seed, x));
                clamp_offset(v, eta * (2.0 * u - 1.0), eta)
            }
            NoiseModel::FixedOffset { eta, sign_seed } => {
                let sign = if point_hash(sign_seed, x) & 1 == 0 { 1.0 } else { -1.0 };
                clamp_offset(v, sign * eta, eta)
            }
            NoiseModel::RoundToPrecision { bits } => round_to_grid(v, bits),
        }
    }
}

/// Adds `offset` to `v`, halving it until float rounding keeps the reported
/// value within `eta` of `v`.
fn clamp_offset(v: f64, mut offset: f64, eta: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let mut r = v + offset;
    while (r - v).abs() > eta {
        offset *= 0.5;
        r = v + offset;
    }
    r
}

fn round_to_grid(v: f64, bits: u32) -> f64 {
    if !v.is_finite() || bits >= 1000 {
        return v;
    }
    let m = v.abs().max(1.0);
    // smallest e with 2^e >= m
    let mut e = m.log2().ceil() as i32;
    while (e as f64 - 1.0).exp2() >= m {
        e -= 1;
    }
    while (e as f64).exp2() < m {
        e += 1;
    }
    let q = ((e - bits as i32) as f64).exp2();
    (v / q).round() * q
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn point_hash(seed: u64, x: &[f64]) -> u64 {
    // -0.0 and 0.0 are the same point
    x.iter().fold(splitmix64(seed), |h, &xi| {
        let bits = if xi == 0.0 { 0 } else { xi.to_bits() };
        splitmix64(h ^ bits)
    })
}

fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
