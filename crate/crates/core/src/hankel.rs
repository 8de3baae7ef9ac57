//! Hankel matrices of oracle values at coordinatewise powers, the
//! determinant characterization of sparsity, and the exact and noisy
//! sparsity tests built on it.
//!
//! For `f = sum_i a_i x^{e_i}` and a point `u`, `H_t(f, u)[i][j] = f(u^{i+j})`
//! factors as `V^T diag(a) V` with `V[l][i] = M_l(u)^i`, `M_l(u) = u^{e_l}`,
//! so `det H_t` vanishes identically once `t` exceeds the sparsity.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Config, DeterminantMode};
use crate::error::{invalid, Error, Result};
use crate::oracle::{
    check_finite, coordinatewise_power, sample_gaussian, to_rational, FunctionInstance,
    OracleHandle, Queryable, SparsePolynomial,
};
use crate::reference::{det_exact, rational_to_f64, vandermonde_det_exact};
use crate::verdict::{Run, TesterVerdict};

/// Largest sparsity [`hankel_det_reference`] will expand.
pub const REFERENCE_MAX_SPARSITY: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelMatrix {
    pub t: usize,
    /// The point whose powers were queried.
    pub u: Vec<f64>,
    /// `f(u^0), ..., f(u^{2t-2})`.
    pub values: Vec<f64>,
    /// Largest magnitude scale reported for any value.
    pub scale: f64,
    /// Largest pointwise error bound reported for any value.
    pub error_bound: f64,
}

impl HankelMatrix {
    /// A Hankel matrix from its `2t - 1` anti-diagonal values.
    pub fn from_values(u: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 == 0 {
            return Err(invalid("a Hankel matrix needs 2t - 1 values"));
        }
        check_finite(&values)?;
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Self { t: values.len().div_ceil(2), u, values, scale, error_bound: 0.0 })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[i + j]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.t, self.t, |i, j| self.entry(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.t).map(|i| (0..self.t).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(self.to_matrix())
    }
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Queries `f(u^0), ..., f(u^{2t-2})` (exactly `2t - 1` queries).
pub fn build_hankel<Q: Queryable + ?Sized>(oracle: &mut Q, u: &[f64], t: usize) -> Result<HankelMatrix> {
    if t == 0 {
        return Err(invalid("Hankel dimension must be at least 1"));
    }
    check_finite(u)?;
    let mut values = Vec::with_capacity(2 * t - 1);
    let (mut scale, mut error_bound) = (0.0f64, 0.0f64);
    for m in 0..2 * t - 1 {
        let a = oracle.ask(&coordinatewise_power(u, m as u32))?;
        values.push(a.value);
        scale = scale.max(a.scale);
        error_bound = error_bound.max(a.error_bound);
    }
    Ok(HankelMatrix { t, u: u.to_vec(), values, scale, error_bound })
}

/// Noise-free Hankel matrix straight from the instance (no query counting).
pub fn build_hankel_exact(instance: &FunctionInstance, u: &[f64], t: usize) -> Result<HankelMatrix> {
    build_hankel(&mut OracleHandle::exact(instance.clone()), u, t)
}

/// The exact rational points `u^0, ..., u^{2t-2}`.
fn rational_powers(u: &[f64], count: usize) -> Result<Vec<Vec<BigRational>>> {
    let base = u.iter().map(|&v| to_rational(v)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![BigRational::one(); u.len()];
    for _ in 0..count {
        out.push(cur.clone());
        for (c, b) in cur.iter_mut().zip(&base) {
            *c *= b;
        }
    }
    Ok(out)
}

/// Exact `det H_t(f, u)` from exact queries at the rational points
/// `u^0, ..., u^{2t-2}` (`2t - 1` queries).
pub fn hankel_det_exact(oracle: &mut OracleHandle, u: &[f64], t: usize) -> Result<BigRational> {
    if t == 0 {
        return Err(invalid("Hankel dimension must be at least 1"));
    }
    let values = rational_powers(u, 2 * t - 1)?
        .iter()
        .map(|p| oracle.query_exact(p))
        .collect::<Result<Vec<_>>>()?;
    let m = (0..t).map(|i| (0..t).map(|j| values[i + j].clone()).collect()).collect();
    det_exact(m)
}

/// Cauchy-Binet expansion
/// `det H_t = sum_{|S| = t} prod_{i in S} a_i prod_{i<j in S} (M_j - M_i)^2`,
/// evaluated in exact arithmetic.
pub fn hankel_det_reference_exact(poly: &SparsePolynomial, u: &[f64], t: usize) -> Result<BigRational> {
    if poly.sparsity() > REFERENCE_MAX_SPARSITY {
        return Err(Error::Unsupported(format!(
            "determinant expansion is limited to sparsity {REFERENCE_MAX_SPARSITY}"
        )));
    }
    if u.len() != poly.n() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: u.len() });
    }
    if t == 0 {
        return Ok(BigRational::one());
    }
    if t > poly.sparsity() {
        return Ok(BigRational::zero());
    }
    let uq = u.iter().map(|&v| to_rational(v)).collect::<Result<Vec<_>>>()?;
    let mut coeffs = Vec::new();
    let mut monos = Vec::new();
    for term in poly.terms() {
        coeffs.push(to_rational(term.coeff)?);
        let mut m = BigRational::one();
        for (&e, x) in term.expo.iter().zip(&uq) {
            if e > 0 {
                m *= num_traits::pow(x.clone(), e as usize);
            }
        }
        monos.push(m);
    }
    let mut total = BigRational::zero();
    for subset in subsets(poly.sparsity(), t) {
        let mut prod: BigRational = subset.iter().map(|&i| coeffs[i].clone()).product();
        let nodes: Vec<_> = subset.iter().map(|&i| monos[i].clone()).collect();
        let v = vandermonde_det_exact(&nodes);
        prod *= &v * &v;
        total += prod;
    }
    Ok(total)
}

pub fn hankel_det_reference(poly: &SparsePolynomial, u: &[f64], t: usize) -> Result<f64> {
    hankel_det_reference_exact(poly, u, t).map(|v| rational_to_f64(&v))
}

/// All `t`-element subsets of `0..k` in lexicographic order.
fn subsets(k: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(t);
    fn go(start: usize, k: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < t - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, t, cur, out);
            cur.pop();
        }
    }
    go(0, k, t, &mut cur, &mut out);
    out
}

/// Exact sparsity test: one Gaussian `u`, accept iff `det H_{k+1}(f, u)`
/// is zero. Makes exactly `2k + 1` queries.
///
/// With [`DeterminantMode::Rational`] the determinant is exact and the
/// oracle must be noise free. With [`DeterminantMode::Float`] the test
/// accepts when `|det| <= det_tolerance * max(1, sigma_max^{k+1})`.
pub fn exact_sparsity_test<R: Rng + ?Sized>(
    oracle: &mut OracleHandle,
    k: usize,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict> {
    let run = Run::start(oracle);
    let u = sample_gaussian(oracle.dim(), rng);
    let t = k + 1;
    match cfg.det_mode {
        DeterminantMode::Rational => {
            let det = hankel_det_exact(oracle, &u, t)?;
            if det.is_zero() {
                Ok(run.accept(oracle))
            } else {
                let detail = format!("det H_{t} = {:e} != 0", rational_to_f64(&det));
                Ok(run.reject(oracle, "hankel/exact", detail))
            }
        }
        DeterminantMode::Float => {
            let h = build_hankel(oracle, &u, t)?;
            let det = h.determinant();
            let (_, smax) = sigma_extremes(&h)?;
            let tol = cfg.det_tolerance * smax.powi(t as i32).max(1.0);
            if det.abs() <= tol {
                Ok(run.accept(oracle))
            } else {
                Ok(run.reject(oracle, "hankel/exact", format!("|det H_{t}| = {:e} > {tol:e}", det.abs())))
            }
        }
    }
}

/// Smallest and largest singular values. The matrix is symmetric, so these
/// are the extreme absolute eigenvalues.
pub fn sigma_extremes(h: &HankelMatrix) -> Result<(f64, f64)> {
    check_finite(&h.values)?;
    let ev = h.eigenvalues();
    let smin = ev.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    let smax = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok((smin, smax))
}

/// Measurements behind [`noise_decomposition_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecomposition {
    pub hankel_structured: bool,
    pub inf_norm: f64,
    pub op_norm: f64,
    /// Largest `|lambda_i(noisy) - lambda_i(exact)|` over sorted eigenvalues.
    pub eigen_shift: f64,
}

pub fn noise_decomposition(noisy: &HankelMatrix, exact: &HankelMatrix) -> Result<NoiseDecomposition> {
    if noisy.t != exact.t {
        return Err(Error::DimensionMismatch { expected: exact.t, got: noisy.t });
    }
    let e = noisy.to_matrix() - exact.to_matrix();
    let t = noisy.t;
    let mut hankel_structured = true;
    for i in 0..t {
        for j in 0..t {
            let anchor = if i + j < t { e[(0, i + j)] } else { e[(i + j + 1 - t, t - 1)] };
            hankel_structured &= e[(i, j)] == anchor;
        }
    }
    let inf_norm = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let op_norm = sorted_eigenvalues(e).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let eigen_shift = noisy
        .eigenvalues()
        .iter()
        .zip(exact.eigenvalues())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(NoiseDecomposition { hankel_structured, inf_norm, op_norm, eigen_shift })
}

/// `E = noisy - exact` is Hankel, `||E||_inf <= eta` and `||E||_op <= eta t`.
pub fn noise_decomposition_check(noisy: &HankelMatrix, exact: &HankelMatrix, eta: f64) -> Result<bool> {
    let nd = noise_decomposition(noisy, exact)?;
    let slack = 1.0 + 1e-12;
    Ok(nd.hankel_structured && nd.inf_norm <= eta && nd.op_norm <= eta * noisy.t as f64 * slack)
}

/// Weyl's inequality `max_i |lambda_i(noisy) - lambda_i(exact)| <= ||E||_op`,
/// allowing for the backward error of the eigensolver.
pub fn weyl_holds(noisy: &HankelMatrix, exact: &HankelMatrix) -> Result<bool> {
    let nd = noise_decomposition(noisy, exact)?;
    let (_, smax) = sigma_extremes(exact)?;
    let (_, smax_noisy) = sigma_extremes(noisy)?;
    let roundoff = 64.0 * f64::EPSILON * smax.max(smax_noisy) * noisy.t as f64;
    Ok(nd.eigen_shift <= nd.op_norm * (1.0 + 1e-9) + roundoff)
}

/// `E|u|^s` for `u ~ N(0, 1)`.
pub fn folded_normal_abs_moment(s: u32) -> f64 {
    let half = s / 2;
    let fact = |m: u32| (1..=m).fold(1.0f64, |a, i| a * i as f64);
    if s == 0 {
        1.0
    } else if s % 2 == 0 {
        fact(s) / (2f64.powi(half as i32) * fact(half))
    } else {
        2f64.powi(half as i32) * fact(half) * (2.0 / std::f64::consts::PI).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBoundParams {
    /// `||a||_2^2` for the coefficient vector `a`.
    pub a_norm_sq: f64,
    pub d: u32,
    pub k: usize,
    pub t: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaBound {
    /// `+inf` when the bound does not fit in an `f64`.
    pub value: f64,
    pub overflowed: bool,
}

/// `||a||^2 (2^{d/2} ceil(d/2)! + sqrt(k/gamma) 2^{d/2} sqrt(d!))^{2t}`; with
/// probability at least `1 - gamma` over `u ~ N(0, I)`,
/// `sigma_max(H_t(f, u))` stays below it.
pub fn sigma_max_bound(p: &SigmaBoundParams) -> Result<SigmaBound> {
    if !(p.gamma > 0.0 && p.gamma < 1.0) {
        return Err(invalid("gamma must lie in (0, 1)"));
    }
    if !(p.a_norm_sq >= 0.0 && p.a_norm_sq.is_finite()) || p.k == 0 || p.t == 0 {
        return Err(invalid("bound parameters must be positive"));
    }
    let fact = |m: u32| (1..=m).fold(1.0f64, |a, i| a * i as f64);
    let root2d = 2f64.powf(p.d as f64 / 2.0);
    let base = root2d * fact(p.d.div_ceil(2)) + (p.k as f64 / p.gamma).sqrt() * root2d * fact(p.d).sqrt();
    let value = p.a_norm_sq * base.powi(2 * p.t as i32);
    if value.is_finite() {
        Ok(SigmaBound { value, overflowed: false })
    } else {
        Ok(SigmaBound { value: f64::INFINITY, overflowed: true })
    }
}

/// Noise-robust sparsity test: `T = 4 C d (k+1)^2` rounds, each building
/// `H_{k+1}` at a fresh Gaussian `u`; accept iff every round has
/// `sigma_min <= eta_eff (k + 1)`.
///
/// `eta_eff` is the largest of `eta`, the pointwise error bound the oracle
/// reports, and the relative floor `delta_floor (1 + scale)`.
pub fn approx_poly_sparsity_test<Q, R>(
    oracle: &mut Q,
    k: usize,
    d: u32,
    eta: f64,
    cfg: &Config,
    rng: &mut R,
) -> Result<TesterVerdict>
where
    Q: Queryable + ?Sized,
    R: Rng + ?Sized,
{
    if k == 0 || d == 0 {
        return Err(invalid("k and d must be at least 1"));
    }
    if !(eta >= 0.0) {
        return Err(invalid("eta must be non-negative"));
    }
    let n = oracle.dim();
    let t = k + 1;
    let mut run = Run::start(oracle);
    for _ in 0..cfg.sparsity_rounds(k, d) {
        run.rounds += 1;
        let u = sample_gaussian(n, rng);
        let h = build_hankel(oracle, &u, t)?;
        let (smin, _) = sigma_extremes(&h)?;
        let eta_eff = cfg.floored(eta.max(h.error_bound), h.scale);
        let threshold = eta_eff * t as f64;
        if smin > threshold {
            return Ok(run.reject(
                oracle,
                "hankel/approx",
                format!("sigma_min = {smin:e} > {threshold:e}"),
            ));
        }
    }
    Ok(run.accept(oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{stream_from_seed, NoiseModel};

    fn lin(c: &[f64]) -> SparsePolynomial {
        SparsePolynomial::linear(c).unwrap()
    }

    #[test]
    fn build_example() {
        let mut o = OracleHandle::exact(lin(&[1.0, 1.0]));
        let h = build_hankel(&mut o, &[1.0, 3.0], 2).unwrap();
        assert_eq!(h.rows(), vec![vec![2.0, 4.0], vec![4.0, 10.0]]);
        assert_eq!(o.query_count(), 3);
        let mut z = OracleHandle::exact(SparsePolynomial::zero(2));
        let h = build_hankel(&mut z, &[0.3, -2.0], 3).unwrap();
        assert!(h.values.iter().all(|v| *v == 0.0));
        assert_eq!(z.query_count(), 5);
    }

    #[test]
    fn hankel_structure() {
        let h = HankelMatrix::from_values(vec![], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let m = h.to_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], (i + j + 1) as f64);
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        assert!(HankelMatrix::from_values(vec![], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn reference_examples() {
        let f = lin(&[1.0, 1.0]);
        assert_eq!(hankel_det_reference(&f, &[1.0, 3.0], 2).unwrap(), 4.0);
        assert_eq!(hankel_det_reference(&f, &[1.0, 3.0], 3).unwrap(), 0.0);
        assert_eq!(hankel_det_reference(&lin(&[2.0]), &[0.7], 1).unwrap(), 2.0);
    }

    #[test]
    fn reference_refuses_large_sparsity() {
        let f = lin(&[1.0; 13]);
        assert!(matches!(hankel_det_reference(&f, &[0.5; 13], 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 3).len(), 0);
        assert_eq!(subsets(4, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn exact_tester_examples() {
        let cfg = Config::default();
        let two = SparsePolynomial::new(3, [(1.0, vec![1, 1, 0]), (1.0, vec![0, 0, 1])]).unwrap();
        let three = lin(&[1.0, 1.0, 1.0]);
        for seed in 0..20 {
            let mut rng = stream_from_seed(seed);
            let mut o = OracleHandle::exact(two.clone());
            let v = exact_sparsity_test(&mut o, 2, &cfg, &mut rng).unwrap();
            assert!(v.is_accept());
            assert_eq!(v.queries_used, 5);
            let mut o = OracleHandle::exact(three.clone());
            assert!(!exact_sparsity_test(&mut o, 2, &cfg, &mut rng).unwrap().is_accept());
        }
        let mut z = OracleHandle::exact(SparsePolynomial::zero(2));
        let v = exact_sparsity_test(&mut z, 0, &cfg, &mut stream_from_seed(0)).unwrap();
        assert!(v.is_accept());
        assert_eq!(v.queries_used, 1);
    }

    #[test]
    fn rational_mode_needs_exact_noise() {
        let mut o = OracleHandle::new(lin(&[1.0]), NoiseModel::UniformBounded { eta: 0.1 }, 0);
        assert!(exact_sparsity_test(&mut o, 1, &Config::default(), &mut stream_from_seed(0)).is_err());
    }

    #[test]
    fn float_mode_examples() {
        let cfg = Config { det_mode: DeterminantMode::Float, ..Config::default() };
        let two = SparsePolynomial::new(3, [(1.0, vec![1, 1, 0]), (1.0, vec![0, 0, 1])]).unwrap();
        let mut rng = stream_from_seed(3);
        let mut o = OracleHandle::exact(two);
        assert!(exact_sparsity_test(&mut o, 2, &cfg, &mut rng).unwrap().is_accept());
        let mut o = OracleHandle::exact(lin(&[1.0, 1.0, 1.0]));
        assert!(!exact_sparsity_test(&mut o, 2, &cfg, &mut rng).unwrap().is_accept());
    }

    #[test]
    fn sigma_examples() {
        let h = HankelMatrix::from_values(vec![], vec![2.0, 4.0, 10.0]).unwrap();
        let (lo, hi) = sigma_extremes(&h).unwrap();
        assert!((lo - (6.0 - 32f64.sqrt())).abs() < 1e-12);
        assert!((hi - (6.0 + 32f64.sqrt())).abs() < 1e-12);
        let id = HankelMatrix::from_values(vec![], vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let m = id.to_matrix();
        assert_eq!(m[(0, 2)], 1.0);
        let z = HankelMatrix::from_values(vec![], vec![0.0; 5]).unwrap();
        assert_eq!(sigma_extremes(&z).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn identity_singular_values() {
        // The anti-identity is a Hankel matrix with singular values all 1.
        let h = HankelMatrix::from_values(vec![], vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let (lo, hi) = sigma_extremes(&h).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_decomposition_examples() {
        let f: FunctionInstance = SparsePolynomial::new(2, [(1.0, vec![2, 1]), (-0.5, vec![0, 1])]).unwrap().into();
        let u = [0.8, -1.1];
        let exact = build_hankel_exact(&f, &u, 4).unwrap();
        assert!(noise_decomposition_check(&exact, &exact, 0.0).unwrap());
        let mut o = OracleHandle::new(f.clone(), NoiseModel::UniformBounded { eta: 0.01 }, 5);
        let noisy = build_hankel(&mut o, &u, 4).unwrap();
        assert!(noise_decomposition_check(&noisy, &exact, 0.01).unwrap());
        assert!(weyl_holds(&noisy, &exact).unwrap());
        assert!(!noise_decomposition_check(&noisy, &exact, 1e-6).unwrap());
    }

    #[test]
    fn folded_moments() {
        assert!((folded_normal_abs_moment(1) - 0.797_884_560_802_865_4).abs() < 1e-12);
        assert_eq!(folded_normal_abs_moment(0), 1.0);
        assert_eq!(folded_normal_abs_moment(2), 1.0);
        assert_eq!(folded_normal_abs_moment(4), 3.0);
        assert_eq!(folded_normal_abs_moment(6), 15.0);
        assert!((folded_normal_abs_moment(3) - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sigma_bound_examples() {
        let b = sigma_max_bound(&SigmaBoundParams { a_norm_sq: 1.0, d: 2, k: 1, t: 2, gamma: 0.5 }).unwrap();
        assert!((b.value - 1296.0).abs() < 1e-9);
        let b = sigma_max_bound(&SigmaBoundParams { a_norm_sq: 2.5, d: 0, k: 1, t: 1, gamma: 1.0 - 1e-12 }).unwrap();
        assert!((b.value - 4.0 * 2.5).abs() < 1e-9);
        let b = sigma_max_bound(&SigmaBoundParams { a_norm_sq: 1.0, d: 40, k: 3, t: 60, gamma: 0.1 }).unwrap();
        assert!(b.overflowed && b.value.is_infinite());
        assert!(sigma_max_bound(&SigmaBoundParams { a_norm_sq: 1.0, d: 1, k: 1, t: 1, gamma: 1.0 }).is_err());
    }

    #[test]
    fn approx_test_examples() {
        let cfg = Config::default();
        let two = SparsePolynomial::new(3, [(1.0, vec![2, 1, 0]), (-0.7, vec![0, 0, 3])]).unwrap();
        let mut o = OracleHandle::new(two, NoiseModel::UniformBounded { eta: 1e-9 }, 1);
        let v = approx_poly_sparsity_test(&mut o, 2, 3, 1e-9, &cfg, &mut stream_from_seed(1)).unwrap();
        assert!(v.is_accept());
        assert_eq!(v.queries_used, 5 * 4 * 3 * 9);
    }
}
