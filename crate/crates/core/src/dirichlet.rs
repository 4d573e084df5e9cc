//! Dirichlet distributions on the probability simplex.
//!
//! Everything likelihood-related is evaluated in log space: row likelihoods
//! for rows with dozens of observations underflow `f64` otherwise.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{NdpError, Result};
use crate::special::ln_gamma;

/// Tolerance on the unit-sum constraint of a [`SimplexVector`].
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector of length at least two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(NdpError::domain(format!("a simplex vector needs at least 2 entries, got {}", values.len())));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(NdpError::domain(format!("simplex entry {i} is {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(NdpError::domain(format!("simplex entries sum to {sum}, not 1")));
        }
        Ok(SimplexVector(values))
    }

    /// The uniform distribution over `len` states.
    pub fn uniform(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(NdpError::domain("a simplex vector needs at least 2 entries"));
        }
        Ok(SimplexVector(vec![1.0 / len as f64; len]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = NdpError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SimplexVector::new(values)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(v: SimplexVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-state observation tallies for one row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountVector(Vec<u64>);

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        CountVector(counts)
    }

    pub fn zeros(len: usize) -> Self {
        CountVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [u64] {
        &mut self.0
    }

    /// Componentwise sum of two count vectors of equal length.
    pub fn add(&self, other: &CountVector) -> Result<CountVector> {
        check_len(self.len(), other.len())?;
        Ok(CountVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Indices and values of the nonzero entries.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0.iter().copied().enumerate().filter(|(_, c)| *c > 0)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(NdpError::Shape { expected, actual });
    }
    Ok(())
}

/// log B(x) = Σ logΓ(x_ℓ) − logΓ(Σ x_ℓ).
pub fn log_mv_beta(x: &[f64]) -> Result<f64> {
    if let Some(v) = x.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(NdpError::domain(format!("multivariate beta needs positive entries, got {v}")));
    }
    let total: f64 = x.iter().sum();
    Ok(x.iter().map(|&v| ln_gamma(v)).sum::<f64>() - ln_gamma(total))
}

/// log of the Dirichlet-multinomial probability of one ordered sequence with
/// tallies `counts`, under a `Dir(eps * p)` prior.
pub fn log_marginal_likelihood(counts: &CountVector, eps: f64, p: &SimplexVector) -> Result<f64> {
    check_len(p.len(), counts.len())?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(NdpError::domain(format!("row concentration must be positive, got {eps}")));
    }
    if let Some(i) = p.as_slice().iter().position(|&v| v <= 0.0) {
        return Err(NdpError::domain(format!("base measure entry {i} is zero")));
    }
    Ok(log_marginal_sparse(counts, eps, p.as_slice()))
}

/// Linear-space companion of [`log_marginal_likelihood`]; may underflow to 0.
pub fn marginal_likelihood(counts: &CountVector, eps: f64, p: &SimplexVector) -> Result<f64> {
    log_marginal_likelihood(counts, eps, p).map(f64::exp)
}

/// Ratio B(εp + y) / B(εp) touching only the states with a nonzero count.
pub(crate) fn log_marginal_sparse(counts: &CountVector, eps: f64, p: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut n = 0u64;
    for (l, c) in counts.nonzero() {
        let a = eps * p[l];
        acc += ln_gamma(a + c as f64) - ln_gamma(a);
        n += c;
    }
    if n == 0 {
        return 0.0;
    }
    acc - (ln_gamma(eps + n as f64) - ln_gamma(eps))
}

/// Posterior Dirichlet parameters εp + counts.
pub fn dirichlet_posterior_params(eps: f64, p: &SimplexVector, counts: &CountVector) -> Result<Vec<f64>> {
    check_len(p.len(), counts.len())?;
    Ok(p.as_slice().iter().zip(counts.as_slice()).map(|(&pl, &c)| eps * pl + c as f64).collect())
}

/// Log of a Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang for shape ≥ 1; for shape < 1 the boost
/// G(a) = G(a + 1) · U^{1/a} is applied in log space so that very small shapes
/// return a finite (very negative) log instead of underflowing to zero.
pub fn sample_ln_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return sample_ln_gamma(shape + 1.0, rng) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

/// A Gamma(shape, rate) variate.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    sample_ln_gamma(shape, rng).exp() / rate
}

/// Draws from Dir(alpha) by normalizing independent gamma variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<SimplexVector> {
    if alpha.len() < 2 {
        return Err(NdpError::domain(format!("Dirichlet needs at least 2 parameters, got {}", alpha.len())));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(NdpError::domain(format!("Dirichlet parameter must be positive, got {a}")));
    }
    let mut out = Vec::with_capacity(alpha.len());
    sample_dirichlet_into(alpha.iter().copied(), rng, &mut out);
    Ok(SimplexVector(out))
}

/// Unchecked Dirichlet draw written into `out`; normalization happens in log
/// space so the largest component is never lost to underflow.
pub(crate) fn sample_dirichlet_into<R, I>(alpha: I, rng: &mut R, out: &mut Vec<f64>)
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = f64>,
{
    out.clear();
    out.extend(alpha.into_iter().map(|a| sample_ln_gamma(a, rng)));
    let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in out.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}
