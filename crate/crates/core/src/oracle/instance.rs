use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One monomial `coeff * x^expo`, with a dense exponent vector of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub expo: Vec<u32>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.expo.iter().sum()
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.expo
            .iter()
            .zip(x)
            .filter(|(e, _)| **e > 0)
            .fold(1.0, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

/// A real polynomial in the monomial basis, kept in canonical form: exponent
/// vectors are unique, sorted, and every stored coefficient is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    n: usize,
    terms: Vec<Term>,
}

impl SparsePolynomial {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, Vec<u32>)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (coeff, expo) in terms {
            if expo.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: expo.len() });
            }
            if !coeff.is_finite() {
                return Err(invalid("polynomial coefficients must be finite"));
            }
            *merged.entry(expo).or_insert(0.0) += coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(expo, coeff)| Term { coeff, expo })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    /// `sum_i coeffs[i] * x_i`.
    pub fn linear(coeffs: &[f64]) -> Result<Self> {
        let n = coeffs.len();
        Self::new(
            n,
            coeffs.iter().enumerate().map(|(i, &c)| {
                let mut e = vec![0; n];
                e[i] = 1;
                (c, e)
            }),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn sparsity(&self) -> usize {
        self.terms.len()
    }

    /// `None` stands in for the degree of the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(Term::degree).max()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.coeff)
    }

    /// Coordinates that occur with a positive exponent in some term.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.expo.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, _)| i))
            .collect()
    }

    /// Values of the individual monomials (without coefficients) at `x`.
    pub fn monomial_values(&self, x: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|t| t.monomial(x)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.coeff * t.monomial(x)).sum()
    }

    /// `sum |coeff * monomial(x)|`, a bound on the magnitude of the terms
    /// the floating-point evaluation adds up.
    pub(crate) fn magnitude_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| (t.coeff * t.monomial(x)).abs()).sum()
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> Result<BigRational> {
        check_dim(self.n, x.len())?;
        let mut acc = BigRational::zero();
        for t in &self.terms {
            let mut m = to_rational(t.coeff)?;
            for (&e, xi) in t.expo.iter().zip(x) {
                if e > 0 {
                    m *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    fn scaled(&self, w: f64) -> impl Iterator<Item = (f64, Vec<u32>)> + '_ {
        self.terms.iter().map(move |t| (w * t.coeff, t.expo.clone()))
    }
}

/// A function of `n` coordinates that only reads the coordinates in `relevant`.
#[derive(Debug, Clone, PartialEq)]
pub struct JuntaInstance {
    n: usize,
    relevant: Vec<usize>,
    inner: SparsePolynomial,
}

impl JuntaInstance {
    pub fn new(n: usize, relevant: Vec<usize>, inner: SparsePolynomial) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &i in &relevant {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if !seen.insert(i) {
                return Err(invalid(format!("relevant index {i} repeated")));
            }
        }
        if inner.n() != relevant.len() {
            return Err(Error::DimensionMismatch { expected: relevant.len(), got: inner.n() });
        }
        Ok(Self { n, relevant, inner })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn inner(&self) -> &SparsePolynomial {
        &self.inner
    }

    fn gather<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.relevant.iter().map(|&i| x[i].clone()).collect()
    }

    /// The same function written as a polynomial over all `n` coordinates.
    pub fn to_polynomial(&self) -> SparsePolynomial {
        let terms = self.inner.terms().iter().map(|t| {
            let mut e = vec![0; self.n];
            for (&slot, &p) in self.relevant.iter().zip(&t.expo) {
                e[slot] = p;
            }
            (t.coeff, e)
        });
        SparsePolynomial::new(self.n, terms).expect("remapped exponents are well formed")
    }
}

/// Carrier for every function the testers can be pointed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub enum FunctionInstance {
    Poly(SparsePolynomial),
    Junta(JuntaInstance),
    /// Weighted sum of instances over the same `n`, e.g. `h = f - g`.
    Sum { n: usize, parts: Vec<(f64, FunctionInstance)> },
}

impl FunctionInstance {
    pub fn sum(n: usize, parts: Vec<(f64, FunctionInstance)>) -> Result<Self> {
        for (w, p) in &parts {
            if !w.is_finite() {
                return Err(invalid("sum weights must be finite"));
            }
            check_dim(n, p.n())?;
        }
        Ok(Self::Sum { n, parts })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Poly(p) => p.n(),
            Self::Junta(j) => j.n(),
            Self::Sum { n, .. } => *n,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Self::Poly(p) => p.eval_unchecked(x),
            Self::Junta(j) => j.inner.eval_unchecked(&j.gather(x)),
            Self::Sum { parts, .. } => parts.iter().map(|(w, p)| w * p.eval_unchecked(x)).sum(),
        }
    }

    pub(crate) fn magnitude_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Self::Poly(p) => p.magnitude_unchecked(x),
            Self::Junta(j) => j.inner.magnitude_unchecked(&j.gather(x)),
            Self::Sum { parts, .. } => {
                parts.iter().map(|(w, p)| w.abs() * p.magnitude_unchecked(x)).sum()
            }
        }
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> Result<BigRational> {
        check_dim(self.n(), x.len())?;
        match self {
            Self::Poly(p) => p.eval_exact(x),
            Self::Junta(j) => j.inner.eval_exact(&j.gather(x)),
            Self::Sum { parts, .. } => {
                let mut acc = BigRational::zero();
                for (w, p) in parts {
                    acc += to_rational(*w)? * p.eval_exact(x)?;
                }
                Ok(acc)
            }
        }
    }

    /// Flattens the instance into one canonical polynomial (cancellations in
    /// sums are merged away).
    pub fn to_polynomial(&self) -> SparsePolynomial {
        match self {
            Self::Poly(p) => p.clone(),
            Self::Junta(j) => j.to_polynomial(),
            Self::Sum { n, parts } => {
                let flat: Vec<_> = parts
                    .iter()
                    .flat_map(|(w, p)| p.to_polynomial().scaled(*w).collect::<Vec<_>>())
                    .collect();
                SparsePolynomial::new(*n, flat).expect("parts share the dimension")
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instances always serialize")
    }
}

impl From<SparsePolynomial> for FunctionInstance {
    fn from(p: SparsePolynomial) -> Self {
        Self::Poly(p)
    }
}

impl From<JuntaInstance> for FunctionInstance {
    fn from(j: JuntaInstance) -> Self {
        Self::Junta(j)
    }
}

type TermList = Vec<(f64, Vec<u32>)>;

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum InstanceRepr {
    Poly { n: usize, terms: TermList },
    Junta { n: usize, relevant: Vec<usize>, terms: TermList },
    Sum { n: usize, parts: Vec<(f64, FunctionInstance)> },
}

impl TryFrom<InstanceRepr> for FunctionInstance {
    type Error = Error;

    fn try_from(r: InstanceRepr) -> Result<Self> {
        match r {
            InstanceRepr::Poly { n, terms } => Ok(Self::Poly(SparsePolynomial::new(n, terms)?)),
            InstanceRepr::Junta { n, relevant, terms } => {
                let inner = SparsePolynomial::new(relevant.len(), terms)?;
                Ok(Self::Junta(JuntaInstance::new(n, relevant, inner)?))
            }
            InstanceRepr::Sum { n, parts } => Self::sum(n, parts),
        }
    }
}

fn term_list(p: &SparsePolynomial) -> TermList {
    p.terms.iter().map(|t| (t.coeff, t.expo.clone())).collect()
}

impl From<FunctionInstance> for InstanceRepr {
    fn from(f: FunctionInstance) -> Self {
        match f {
            FunctionInstance::Poly(p) => InstanceRepr::Poly { n: p.n, terms: term_list(&p) },
            FunctionInstance::Junta(j) => InstanceRepr::Junta {
                n: j.n,
                terms: term_list(&j.inner),
                relevant: j.relevant,
            },
            FunctionInstance::Sum { n, parts } => InstanceRepr::Sum { n, parts },
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub fn to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::NonFinite { index: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, terms: &[(f64, &[u32])]) -> SparsePolynomial {
        SparsePolynomial::new(n, terms.iter().map(|(c, e)| (*c, e.to_vec()))).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(2, &[(3.0, &[1, 2])]).eval(&[2.0, 1.0]).unwrap(), 6.0);
        assert_eq!(SparsePolynomial::linear(&[1.0, 1.0]).unwrap().eval(&[1.0, 3.0]).unwrap(), 4.0);
        assert_eq!(SparsePolynomial::zero(3).eval(&[1.0, -2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = SparsePolynomial::linear(&[1.0, 1.0]).unwrap();
        assert!(matches!(p.eval(&[1.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn canonicalization_merges_and_drops_zeros() {
        let p = poly(2, &[(1.0, &[1, 0]), (2.0, &[0, 1]), (-1.0, &[1, 0]), (0.5, &[0, 1])]);
        assert_eq!(p.sparsity(), 1);
        assert_eq!(p.terms()[0].coeff, 2.5);
        assert_eq!(p.total_degree(), Some(1));
        assert_eq!(SparsePolynomial::zero(2).total_degree(), None);
    }

    #[test]
    fn junta_reads_only_relevant_coordinates() {
        let inner = poly(2, &[(1.0, &[1, 1])]);
        let j = JuntaInstance::new(5, vec![1, 3], inner).unwrap();
        let f = FunctionInstance::from(j);
        assert_eq!(f.eval(&[9.0, 2.0, 9.0, 3.0, 9.0]).unwrap(), 6.0);
        assert_eq!(f.to_polynomial().support().into_iter().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn junta_rejects_bad_relevant_sets() {
        let inner = poly(2, &[(1.0, &[1, 1])]);
        assert!(JuntaInstance::new(3, vec![1, 1], inner.clone()).is_err());
        assert!(JuntaInstance::new(3, vec![1, 3], inner).is_err());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let f: FunctionInstance = poly(2, &[(3.0, &[1, 2])]).into();
        let s = f.to_json();
        assert_eq!(s, r#"{"kind":"poly","n":2,"terms":[[3.0,[1,2]]]}"#);
        assert_eq!(FunctionInstance::from_json(&s).unwrap(), f);

        let j = FunctionInstance::from_json(
            r#"{"kind":"junta","n":4,"relevant":[0,2],"terms":[[1.0,[1,0]],[2.0,[0,1]]]}"#,
        )
        .unwrap();
        assert_eq!(j.eval(&[1.0, 5.0, 2.0, 7.0]).unwrap(), 5.0);

        let h = FunctionInstance::from_json(&format!(
            r#"{{"kind":"sum","n":2,"parts":[[1.0,{s}],[-1.0,{s}]]}}"#
        ))
        .unwrap();
        assert_eq!(h.to_polynomial().sparsity(), 0);
        assert!(FunctionInstance::from_json(r#"{"kind":"poly","n":2,"terms":[[1.0,[1]]]}"#).is_err());
    }

    #[test]
    fn exact_evaluation_agrees_with_float_on_dyadic_points() {
        let p = poly(2, &[(0.5, &[2, 1]), (-3.0, &[0, 3])]);
        let x = [1.5, -0.25];
        let xq: Vec<_> = x.iter().map(|&v| to_rational(v).unwrap()).collect();
        let exact = p.eval_exact(&xq).unwrap();
        assert_eq!(exact, to_rational(p.eval(&x).unwrap()).unwrap());
    }
}
