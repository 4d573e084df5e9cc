//! The gamer distribution: a gamma law whose mean is Pareto distributed.
//!
//! If M is Pareto with minimum `c` and tail index `r`, and X | M is gamma
//! with shape `alpha` and mean M, then X has density
//!
//! f(x) = r (c/α)^r Γ(α + r)/Γ(α) · x^{−r−1} · P(α + r, αx/c),
//!
//! with P the regularized lower incomplete gamma function.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{sample_gamma, SimplexVector};
use crate::error::{NdpError, Result};
use crate::quadrature::adaptive_simpson;
use crate::special::{gamma_p, ln_gamma};

/// Absolute tolerance of the numerical CDF.
pub const CDF_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamerParams {
    /// Tail index of the Pareto mixing law.
    pub r: f64,
    /// Minimum of the Pareto law, the mean score of the weakest players.
    pub c: f64,
    /// Gamma shape ("lives").
    pub alpha: f64,
}

impl GamerParams {
    pub fn new(r: f64, c: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("c", c), ("alpha", alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NdpError::domain(format!("gamer parameter {name} must be positive, got {v}")));
            }
        }
        Ok(GamerParams { r, c, alpha })
    }

    fn log_norm(&self) -> f64 {
        self.r.ln() + self.r * (self.c / self.alpha).ln() + ln_gamma(self.alpha + self.r) - ln_gamma(self.alpha)
    }

    /// Density at x > 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(NdpError::domain(format!("gamer density is defined for x > 0, got {x}")));
        }
        Ok(self.pdf_unchecked(x))
    }

    fn pdf_unchecked(&self, x: f64) -> f64 {
        let p = gamma_p(self.alpha + self.r, self.alpha * x / self.c);
        if p == 0.0 {
            return 0.0;
        }
        (self.log_norm() - (self.r + 1.0) * x.ln() + p.ln()).exp()
    }

    /// The large-x constant: f(x) · x^{r+1} → Γ(α+r)/(α^r Γ(α)) · r c^r.
    pub fn tail_constant(&self) -> f64 {
        self.log_norm().exp()
    }

    /// ∫₀^b f, with a power substitution x = b·s^k that removes the x^{α−1}
    /// singularity at the origin when α < 1.
    fn integrate_from_zero(&self, b: f64, tol: f64) -> f64 {
        let k = (2.0 / self.alpha).ceil().max(1.0);
        let g = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let x = b * s.powf(k);
            if x <= 0.0 {
                return 0.0;
            }
            self.pdf_unchecked(x) * b * k * s.powf(k - 1.0)
        };
        adaptive_simpson(&g, 0.0, 1.0, tol)
    }

    fn integrate(&self, a: f64, b: f64, tol: f64) -> f64 {
        adaptive_simpson(&|x: f64| self.pdf_unchecked(x), a, b, tol)
    }

    /// Distribution function by adaptive quadrature of the density.
    ///
    /// The range is split at c and then at successive doublings, so each
    /// piece sees a density that varies by a bounded factor.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(NdpError::domain(format!("gamer CDF needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        let first = x.min(self.c);
        let pieces = 1 + if x > first { (x / first).log2().ceil() as usize } else { 0 };
        let tol = CDF_TOL / pieces as f64;
        let mut total = self.integrate_from_zero(first, tol);
        let mut lo = first;
        while lo < x {
            let hi = (2.0 * lo).min(x);
            total += self.integrate(lo, hi, tol);
            lo = hi;
        }
        Ok(total.min(1.0))
    }

    /// CDF at every point of an ascending slice, accumulated piecewise.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.windows(2).any(|w| w[1] < w[0]) {
            return Err(NdpError::validation("cdf_sorted needs ascending input"));
        }
        let mut out = Vec::with_capacity(xs.len());
        let mut prev_x = 0.0;
        let mut acc = 0.0;
        for &x in xs {
            if x < 0.0 || x.is_nan() {
                return Err(NdpError::domain(format!("gamer CDF needs x >= 0, got {x}")));
            }
            if out.is_empty() {
                acc = self.cdf(x)?;
            } else if x > prev_x {
                acc += self.integrate(prev_x, x, 1e-13);
            }
            prev_x = x;
            out.push(acc.min(1.0));
        }
        Ok(out)
    }

    /// Pareto-mixed gamma draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let mean = self.c * u.powf(-1.0 / self.r);
        sample_gamma(self.alpha, self.alpha / mean, rng)
    }

    /// Base measure over scores 0..L−1 from rounding to the nearest integer
    /// and capping at L − 1.
    pub fn discretize(&self, num_states: usize) -> Result<SimplexVector> {
        if num_states < 2 {
            return Err(NdpError::validation(format!("need at least 2 states, got {num_states}")));
        }
        let cap = num_states - 1;
        let mut p = Vec::with_capacity(num_states);
        // support is (0, ∞), so the lowest cell is (0, 0.5)
        p.push(self.integrate_from_zero(0.5, 1e-14));
        for l in 1..cap {
            let l = l as f64;
            p.push(self.integrate(l - 0.5, l + 0.5, 1e-14));
        }
        let below: f64 = p.iter().sum();
        p.push((1.0 - below).max(0.0));
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        SimplexVector::new(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn leaderboard() -> GamerParams {
        GamerParams::new(7.0 / 3.0, 28.0, 3.0).unwrap()
    }

    #[test]
    fn rejects_bad_params_and_arguments() {
        assert!(GamerParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GamerParams::new(1.0, -1.0, 1.0).is_err());
        let g = leaderboard();
        assert!(g.pdf(0.0).is_err());
        assert!(g.cdf(-1.0).is_err());
        assert!(g.discretize(1).is_err());
    }

    #[test]
    fn cdf_endpoints() {
        let g = leaderboard();
        assert_eq!(g.cdf(0.0).unwrap(), 0.0);
        assert!((g.cdf(1e9).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn density_matches_the_mixture_integral() {
        // f(x) = ∫_0^1 Gamma(α, α/M(u)) density at x du with M(u) = c u^{-1/r}
        let g = GamerParams::new(1.5, 10.0, 2.0).unwrap();
        for &x in &[0.5f64, 5.0, 20.0, 200.0] {
            let integrand = |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let m = g.c * u.powf(-1.0 / g.r);
                let rate = g.alpha / m;
                (g.alpha * rate.ln() + (g.alpha - 1.0) * x.ln() - rate * x - ln_gamma(g.alpha)).exp()
            };
            let mixture = adaptive_simpson(&integrand, 0.0, 1.0, 1e-14);
            assert_relative_eq!(g.pdf(x).unwrap(), mixture, max_relative = 1e-7);
        }
    }

    #[test]
    fn cdf_differences_match_interval_integrals() {
        let g = leaderboard();
        for &(a, b) in &[(1.0, 2.0), (10.0, 80.0), (30.0, 31.0), (100.0, 1000.0)] {
            let direct = adaptive_simpson(&|x: f64| g.pdf(x).unwrap(), a, b, 1e-13);
            let via = g.cdf(b).unwrap() - g.cdf(a).unwrap();
            assert!((direct - via).abs() < 1e-9, "({a},{b}) {direct} vs {via}");
        }
    }

    #[test]
    fn singular_origin_integrates() {
        // α < 1 gives an integrable x^{α−1} spike at 0
        let g = GamerParams::new(2.0, 1.0, 0.5).unwrap();
        assert!((g.cdf(1e7).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn discretized_base_is_positive_simplex() {
        let p = leaderboard().discretize(500).unwrap();
        assert_eq!(p.len(), 500);
        assert!(p.as_slice().iter().all(|&v| v > 0.0));
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_sorted_agrees_with_cdf() {
        let g = leaderboard();
        let xs = [0.1, 3.0, 3.0, 28.0, 90.0, 600.0];
        let many = g.cdf_sorted(&xs).unwrap();
        for (x, v) in xs.iter().zip(many) {
            assert!((g.cdf(*x).unwrap() - v).abs() < 1e-9);
        }
        assert!(g.cdf_sorted(&[2.0, 1.0]).is_err());
    }

    #[test]
    fn large_alpha_concentrates_on_mean() {
        let g = GamerParams::new(2.0, 5.0, 1e6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // X / M has coefficient of variation 1/√α
        for _ in 0..1000 {
            let u: f64 = rng.sample(Open01);
            let m = g.c * u.powf(-1.0 / g.r);
            let x = sample_gamma(g.alpha, g.alpha / m, &mut rng);
            assert!((x / m - 1.0).abs() < 6e-3);
        }
    }
}
