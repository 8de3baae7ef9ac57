//! Brute-force and closed-form oracles used as ground truth for the testers.

use std::collections::BTreeSet;

use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracle::{norm, sample_gaussian, FunctionInstance, SparsePolynomial};

/// Largest dimension accepted by [`l0_distance_f2`].
pub const F2_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Monte Carlo estimate of `E_{x ~ N(0, I)} |f(x) - g(x)|`.
pub fn mc_l1_distance<R: Rng + ?Sized>(
    f: &FunctionInstance,
    g: &FunctionInstance,
    m: u64,
    rng: &mut R,
) -> Result<DistanceEstimate> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch { expected: f.n(), got: g.n() });
    }
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let diffs = (0..m)
        .map(|_| {
            let x = sample_gaussian(f.n(), rng);
            Ok((f.eval(&x)? - g.eval(&x)?).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(&diffs);
    Ok(DistanceEstimate { mean, stderr, samples: m })
}

/// Outcome of [`l1_linear_bounds_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBounds {
    pub distance: DistanceEstimate,
    /// `||a - b||_inf * sqrt(2/pi)`.
    pub lower: f64,
    /// `||a - b||_2 * E||x||_2`, with `E||x||_2` estimated.
    pub upper: f64,
    pub upper_stderr: f64,
    pub holds: bool,
}

/// Checks that the ℓ1 distance between the linear forms `a.x` and `b.x` lies
/// between `||a-b||_inf sqrt(2/pi)` and `||a-b||_2 E||x||_2`, with 3 stderr
/// of slack on each Monte Carlo side.
pub fn l1_linear_bounds_check<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    m: u64,
    rng: &mut R,
) -> Result<LinearBounds> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let inf = diff.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let two = norm(&diff);
    let mut dist = Vec::with_capacity(m as usize);
    let mut lens = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let x = sample_gaussian(a.len(), rng);
        dist.push(diff.iter().zip(x.iter()).map(|(d, v)| d * v).sum::<f64>().abs());
        lens.push(x.norm());
    }
    let (mean, stderr) = mean_stderr(&dist);
    let (len_mean, len_se) = mean_stderr(&lens);
    let lower = inf * (2.0 / std::f64::consts::PI).sqrt();
    let upper = two * len_mean;
    let upper_stderr = two * len_se;
    let holds = mean + 3.0 * stderr >= lower && mean - 3.0 * stderr <= upper + 3.0 * upper_stderr;
    Ok(LinearBounds {
        distance: DistanceEstimate { mean, stderr, samples: m },
        lower,
        upper,
        upper_stderr,
        holds,
    })
}

/// Exact fraction of `x in F_2^n` on which the parities over the two
/// supports disagree. Indices are 0-based.
pub fn l0_distance_f2(f_support: &BTreeSet<usize>, g_support: &BTreeSet<usize>, n: usize) -> Result<Ratio<u64>> {
    let f = support_mask(f_support, n)?;
    let g = support_mask(g_support, n)?;
    l0_distance_f2_masks(f, g, n)
}

/// [`l0_distance_f2`] with supports given as bit masks (bit `i` = index `i`).
pub fn l0_distance_f2_masks(f: u64, g: u64, n: usize) -> Result<Ratio<u64>> {
    if n > F2_MAX_N {
        return Err(Error::Unsupported(format!("F2 enumeration is capped at n = {F2_MAX_N}")));
    }
    if (f | g) >> n != 0 {
        return Err(invalid("support mask has bits beyond n"));
    }
    Ok(Ratio::new(parity_disagreements(f, g, n), 1u64 << n))
}

fn support_mask(s: &BTreeSet<usize>, n: usize) -> Result<u64> {
    if n > F2_MAX_N {
        return Err(Error::Unsupported(format!("F2 enumeration is capped at n = {F2_MAX_N}")));
    }
    s.iter().try_fold(0u64, |acc, &i| {
        if i < n {
            Ok(acc | (1 << i))
        } else {
            Err(Error::IndexOutOfRange { index: i, n })
        }
    })
}

/// Counts `x in {0,1}^n` with `<f,x> != <g,x> (mod 2)`, enumerating points
/// 64 at a time: the low six bits of `x` index a bit within a word and the
/// high bits flip the whole word's parity.
pub(crate) fn parity_disagreements(f: u64, g: u64, n: usize) -> u64 {
    let low_bits = n.min(6);
    let low_mask = (1u64 << low_bits) - 1;
    let mut word = 0u64;
    for x in 0..(1u64 << low_bits) {
        let pf = (x & f & low_mask).count_ones() & 1;
        let pg = (x & g & low_mask).count_ones() & 1;
        word |= ((pf ^ pg) as u64) << x;
    }
    let base = word.count_ones() as u64;
    let complement = (1u64 << low_bits) - base;
    let mut total = 0;
    for hi in 0..(1u64 << (n - low_bits)) {
        let x = hi << low_bits;
        let flip = ((x & f).count_ones() ^ (x & g).count_ones()) & 1;
        total += if flip == 0 { base } else { complement };
    }
    total
}

/// Coordinates that occur with a positive exponent in some term. For a
/// canonical polynomial these are exactly the influential coordinates.
pub fn brute_force_influential_coords(poly: &SparsePolynomial) -> BTreeSet<usize> {
    poly.support()
}

/// `prod_{i<j} (x_j - x_i)`.
pub fn vandermonde_det(nodes: &[f64]) -> f64 {
    let mut acc = 1.0;
    for j in 0..nodes.len() {
        for i in 0..j {
            acc *= nodes[j] - nodes[i];
        }
    }
    acc
}

pub fn vandermonde_det_exact(nodes: &[BigRational]) -> BigRational {
    let mut acc = BigRational::from_integer(1.into());
    for j in 0..nodes.len() {
        for i in 0..j {
            acc *= &nodes[j] - &nodes[i];
        }
    }
    acc
}

/// Exact determinant by fraction-carrying Gaussian elimination.
pub fn det_exact(mut m: Vec<Vec<BigRational>>) -> Result<BigRational> {
    let t = m.len();
    if m.iter().any(|row| row.len() != t) {
        return Err(invalid("determinant of a non-square matrix"));
    }
    let mut det = BigRational::from_integer(1.into());
    for col in 0..t {
        let Some(pivot) = (col..t).find(|&r| !m[r][col].is_zero()) else {
            return Ok(BigRational::zero());
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..t {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..t {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    Ok(det)
}

/// `h = sum_{i in A} x_i - sum_{i in B} x_i` as a sum instance; overlapping
/// indices cancel when the instance is flattened.
pub fn hard_instance_disjointness(
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    n: usize,
) -> Result<FunctionInstance> {
    let part = |s: &BTreeSet<usize>| -> Result<FunctionInstance> {
        let mut coeffs = vec![0.0; n];
        for &i in s {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            coeffs[i] = 1.0;
        }
        Ok(SparsePolynomial::linear(&coeffs)?.into())
    };
    FunctionInstance::sum(n, vec![(1.0, part(a)?), (-1.0, part(b)?)])
}

/// Empirical `Pr_{x ~ N(0, I)} [|f(x) - t| <= eps]`.
pub fn anti_concentration_probe<R: Rng + ?Sized>(
    poly: &SparsePolynomial,
    t: f64,
    eps: f64,
    m: u64,
    rng: &mut R,
) -> Result<f64> {
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut hits = 0u64;
    for _ in 0..m {
        let x = sample_gaussian(poly.n(), rng);
        if (poly.eval(&x)? - t).abs() <= eps {
            hits += 1;
        }
    }
    Ok(hits as f64 / m as f64)
}

/// Anti-concentration bound `C d (eps / |coeff_d|)^(1/d)` with `C = 1`,
/// where `coeff_d` is the largest top-degree coefficient.
pub fn anti_concentration_bound(poly: &SparsePolynomial, eps: f64) -> Option<f64> {
    let d = poly.total_degree()?;
    if d == 0 {
        return None;
    }
    let top = poly
        .terms()
        .iter()
        .filter(|t| t.degree() == d)
        .fold(0.0f64, |acc, t| acc.max(t.coeff.abs()));
    Some(d as f64 * (eps / top).powf(1.0 / d as f64))
}

/// Largest observed `|f(x)| / ||x||^d` over `m` points drawn uniformly from
/// the ball `B(0, 2 sqrt n)`, with `d` the total degree (at least 1).
pub fn boundedness_probe<R: Rng + ?Sized>(poly: &SparsePolynomial, m: u64, rng: &mut R) -> Result<f64> {
    let n = poly.n();
    let d = poly.total_degree().unwrap_or(0).max(1) as i32;
    let radius = 2.0 * (n as f64).sqrt();
    let mut worst = 0.0f64;
    for _ in 0..m {
        let g = sample_gaussian(n, rng);
        let len = g.norm();
        if len == 0.0 {
            continue;
        }
        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
        let x = g.scaled(r / len);
        if r > 0.0 {
            worst = worst.max(poly.eval(&x)?.abs() / r.powi(d));
        }
    }
    Ok(worst)
}

/// Exact determinant as a float, for tests comparing against floating-point
/// routines.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{stream_from_seed, to_rational};

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn l1_distance_examples() {
        let x1: FunctionInstance = SparsePolynomial::linear(&[1.0, 0.0]).unwrap().into();
        let x12: FunctionInstance = SparsePolynomial::linear(&[1.0, 1.0]).unwrap().into();
        let zero: FunctionInstance = SparsePolynomial::zero(2).into();
        let mut rng = stream_from_seed(1);
        let same = mc_l1_distance(&x12, &x12, 1000, &mut rng).unwrap();
        assert_eq!((same.mean, same.stderr), (0.0, 0.0));
        let target = (2.0 / std::f64::consts::PI).sqrt();
        let d = mc_l1_distance(&x1, &zero, 100_000, &mut rng).unwrap();
        assert!((d.mean - target).abs() < 0.01, "{}", d.mean);
        let d = mc_l1_distance(&x12, &x1, 100_000, &mut rng).unwrap();
        assert!((d.mean - target).abs() < 0.01, "{}", d.mean);
    }

    #[test]
    fn l1_distance_is_symmetric_under_shared_seed() {
        let f: FunctionInstance = SparsePolynomial::new(2, [(1.0, vec![2, 0]), (-0.5, vec![0, 1])]).unwrap().into();
        let g: FunctionInstance = SparsePolynomial::linear(&[0.3, 1.0]).unwrap().into();
        let a = mc_l1_distance(&f, &g, 500, &mut stream_from_seed(9)).unwrap();
        let b = mc_l1_distance(&g, &f, 500, &mut stream_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_bounds_examples() {
        let mut rng = stream_from_seed(2);
        assert!(l1_linear_bounds_check(&[1.0, 2.0], &[1.0, 2.0], 1000, &mut rng).unwrap().holds);
        let r = l1_linear_bounds_check(&[1.0, 0.0], &[0.0, 0.0], 100_000, &mut rng).unwrap();
        assert!(r.holds);
        assert!((r.distance.mean - 0.798).abs() < 0.01);
        assert!((r.upper - 1.2533).abs() < 0.01);
    }

    #[test]
    fn f2_examples() {
        assert_eq!(l0_distance_f2(&set(&[0, 1]), &set(&[0, 1]), 3).unwrap(), Ratio::new(0, 1));
        assert_eq!(l0_distance_f2(&set(&[0, 1]), &set(&[0]), 3).unwrap(), Ratio::new(1, 2));
        assert_eq!(l0_distance_f2(&set(&[0, 1, 2]), &set(&[3]), 5).unwrap(), Ratio::new(1, 2));
        assert!(l0_distance_f2(&set(&[0]), &set(&[]), 21).is_err());
        assert!(l0_distance_f2(&set(&[5]), &set(&[]), 3).is_err());
    }

    #[test]
    fn parity_count_matches_naive_enumeration() {
        for n in 0..=9usize {
            for f in 0..(1u64 << n).min(40) {
                for g in [0u64, 1, 5, (1 << n) - 1] {
                    let g = g & ((1 << n) - 1);
                    let naive = (0..1u64 << n)
                        .filter(|x| (x & f).count_ones() % 2 != (x & g).count_ones() % 2)
                        .count() as u64;
                    assert_eq!(parity_disagreements(f, g, n), naive, "n={n} f={f} g={g}");
                }
            }
        }
    }

    #[test]
    fn influential_coords_examples() {
        let p = SparsePolynomial::new(3, [(1.0, vec![1, 0, 1]), (2.0, vec![0, 0, 1])]).unwrap();
        assert_eq!(brute_force_influential_coords(&p), set(&[0, 2]));
        let c = SparsePolynomial::new(3, [(7.0, vec![0, 0, 0])]).unwrap();
        assert!(brute_force_influential_coords(&c).is_empty());
        let merged = SparsePolynomial::new(2, [(1.0, vec![1, 0]), (1.0, vec![0, 1]), (-1.0, vec![0, 1])]).unwrap();
        assert_eq!(brute_force_influential_coords(&merged), set(&[0]));
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde_det(&[1.0, 3.0]), 2.0);
        assert_eq!(vandermonde_det(&[0.0, 1.0, 2.0]), 2.0);
        assert_eq!(vandermonde_det(&[1.0, 4.0, 1.0]), 0.0);
        let q: Vec<_> = [0.0, 1.0, 2.0].iter().map(|v| to_rational(*v).unwrap()).collect();
        assert_eq!(rational_to_f64(&vandermonde_det_exact(&q)), 2.0);
    }

    #[test]
    fn exact_det_small_cases() {
        let q = |rows: &[&[f64]]| -> Vec<Vec<BigRational>> {
            rows.iter().map(|r| r.iter().map(|v| to_rational(*v).unwrap()).collect()).collect()
        };
        assert_eq!(rational_to_f64(&det_exact(q(&[&[2.0, 4.0], &[4.0, 10.0]])).unwrap()), 4.0);
        assert_eq!(rational_to_f64(&det_exact(q(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap()), -1.0);
        assert!(det_exact(q(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap().is_zero());
        assert!(det_exact(q(&[&[1.0, 2.0]])).is_err());
        assert_eq!(rational_to_f64(&det_exact(vec![]).unwrap()), 1.0);
    }

    #[test]
    fn disjointness_examples() {
        let h = hard_instance_disjointness(&set(&[0, 1]), &set(&[1, 2]), 4).unwrap();
        assert_eq!(h.to_polynomial(), SparsePolynomial::linear(&[1.0, 0.0, -1.0, 0.0]).unwrap());
        let z = hard_instance_disjointness(&set(&[0, 3]), &set(&[0, 3]), 4).unwrap();
        assert_eq!(z.to_polynomial().sparsity(), 0);
        let far = hard_instance_disjointness(&set(&[0, 1]), &set(&[2, 3]), 4).unwrap();
        assert_eq!(far.to_polynomial().sparsity(), 4);
        assert_eq!(far.to_polynomial().total_degree(), Some(1));
    }

    #[test]
    fn anti_concentration_examples() {
        let mut rng = stream_from_seed(4);
        let x1 = SparsePolynomial::linear(&[1.0, 0.0]).unwrap();
        let p = anti_concentration_probe(&x1, 0.0, 0.1, 100_000, &mut rng).unwrap();
        assert!((p - 0.0797).abs() < 0.005, "{p}");
        assert_eq!(anti_concentration_probe(&x1, 0.0, 0.0, 10_000, &mut rng).unwrap(), 0.0);
        let x12 = SparsePolynomial::linear(&[1.0, 1.0]).unwrap();
        let p = anti_concentration_probe(&x12, 0.0, 0.1, 100_000, &mut rng).unwrap();
        assert!((p - 0.0564).abs() < 0.005, "{p}");
        assert!(anti_concentration_bound(&x1, 0.1).unwrap() >= 0.0797);
    }

    #[test]
    fn boundedness_probe_is_finite() {
        let p = SparsePolynomial::new(3, [(0.7, vec![2, 1, 0]), (-1.0, vec![0, 0, 1])]).unwrap();
        let b = boundedness_probe(&p, 2000, &mut stream_from_seed(8)).unwrap();
        assert!(b.is_finite() && b > 0.0);
    }
}
