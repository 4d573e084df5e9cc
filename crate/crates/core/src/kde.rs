//! Weighted Gaussian kernel density estimates of one-dimensional laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NdpError, Result};
use crate::posterior::WeightedSampleLaw;

pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoid integral of the curve over its grid.
    pub fn integral(&self) -> f64 {
        self.grid.windows(2).zip(self.values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Weighted Scott's rule.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points: usize,
    /// Explicit range; defaults to the atom range padded by 3h.
    pub range: Option<(f64, f64)>,
    /// Natural domain of the functional, applied to the default range.
    pub clip: Option<(f64, f64)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: DEFAULT_GRID_POINTS, range: None, clip: None }
    }
}

// Positive-weight atoms in a canonical order, so every sum below is
// independent of how the law was assembled.
fn sorted_atoms(law: &WeightedSampleLaw) -> Vec<(f64, f64)> {
    let mut atoms = law.weighted_atoms();
    atoms.retain(|a| a.1 > 0.0);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    atoms
}

/// (Σw)² / Σw² over all atoms of the law.
pub fn effective_count(law: &WeightedSampleLaw) -> f64 {
    let (s, s2) = sorted_atoms(law).iter().fold((0.0, 0.0), |(s, s2), &(_, w)| (s + w, s2 + w * w));
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// The dimensionless Scott factor n_eff^(−1/5).
pub fn scott_factor(law: &WeightedSampleLaw) -> Result<f64> {
    let n = effective_count(law);
    if !(n > 0.0) {
        return Err(NdpError::validation("law has no positive weight"));
    }
    Ok(n.powf(-0.2))
}

/// Weighted (population) standard deviation of the atoms.
pub fn weighted_std(law: &WeightedSampleLaw) -> f64 {
    let atoms = sorted_atoms(law);
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let mean = atoms.iter().map(|(x, w)| x * w).sum::<f64>() / total;
    let var = atoms.iter().map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / total;
    var.max(0.0).sqrt()
}

/// h = σ̂_w · n_eff^(−1/5).
pub fn scott_bandwidth(law: &WeightedSampleLaw) -> Result<f64> {
    let atoms = sorted_atoms(law);
    if atoms.is_empty() || atoms[0].0 == atoms[atoms.len() - 1].0 {
        return Err(NdpError::Degenerate("bandwidth needs at least two distinct atoms".into()));
    }
    Ok(weighted_std(law) * scott_factor(law)?)
}

fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Evaluate Σ_k w_k φ((g − x_k)/h)/h on a grid, with weights normalized to
/// the law's total mass.
pub fn kde(law: &WeightedSampleLaw, bandwidth: Bandwidth, grid: &GridSpec) -> Result<KdeCurve> {
    let atoms = sorted_atoms(law);
    if atoms.is_empty() {
        return Err(NdpError::validation("cannot estimate a density from an empty law"));
    }
    if grid.points < 2 {
        return Err(NdpError::validation("grid needs at least 2 points"));
    }
    let h = match bandwidth {
        Bandwidth::Auto => scott_bandwidth(law)?,
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => return Err(NdpError::domain(format!("bandwidth must be positive, got {h}"))),
    };
    let lo_atom = atoms[0].0;
    let hi_atom = atoms[atoms.len() - 1].0;
    let (mut lo, mut hi) = grid.range.unwrap_or((lo_atom - 3.0 * h, hi_atom + 3.0 * h));
    if grid.range.is_none() {
        if let Some((a, b)) = grid.clip {
            lo = lo.max(a);
            hi = hi.min(b);
        }
    }
    if !(hi > lo) {
        return Err(NdpError::validation(format!("empty grid range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (grid.points - 1) as f64;
    let xs: Vec<f64> = (0..grid.points).map(|i| lo + step * i as f64).collect();
    let values =
        xs.par_iter().map(|&g| atoms.iter().map(|&(x, w)| w * normal_pdf((g - x) / h)).sum::<f64>() / h).collect();
    Ok(KdeCurve { grid: xs, values, bandwidth: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn law(atoms: &[f64], weights: &[f64]) -> WeightedSampleLaw {
        WeightedSampleLaw::new(atoms.to_vec(), weights.to_vec()).unwrap()
    }

    #[test]
    fn two_point_bandwidth() {
        let l = law(&[0.0, 1.0], &[0.5, 0.5]);
        assert_relative_eq!(weighted_std(&l), 0.5);
        assert_relative_eq!(scott_bandwidth(&l).unwrap(), 0.5 * 2f64.powf(-0.2), max_relative = 1e-14);
    }

    #[test]
    fn uniform_weights_reduce_to_unweighted_rule() {
        let xs = [0.1, 0.4, 0.45, 0.9, 1.3];
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
        let l = law(&xs, &[0.2; 5]);
        assert_relative_eq!(scott_bandwidth(&l).unwrap(), sd * n.powf(-0.2), max_relative = 1e-12);
    }

    #[test]
    fn degenerate_and_empty() {
        assert!(matches!(scott_bandwidth(&law(&[0.3, 0.3], &[0.5, 0.5])), Err(NdpError::Degenerate(_))));
        assert!(kde(&law(&[], &[]), Bandwidth::Fixed(0.1), &GridSpec::default()).is_err());
        assert!(kde(&law(&[0.3], &[1.0]), Bandwidth::Fixed(0.0), &GridSpec::default()).is_err());
    }

    #[test]
    fn single_atom_is_a_normal_density() {
        let c = kde(&law(&[0.3], &[1.0]), Bandwidth::Fixed(0.1), &GridSpec::default()).unwrap();
        for (g, v) in c.grid.iter().zip(&c.values) {
            assert_relative_eq!(*v, normal_pdf((g - 0.3) / 0.1) / 0.1, max_relative = 1e-12);
        }
        assert!((c.grid[0] - 0.0).abs() < 1e-12 && (c.grid[511] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn wide_grid_integrates_to_one() {
        let l = law(&[0.1, 0.5, 0.52, 0.9], &[0.1, 0.4, 0.3, 0.2]);
        let h = scott_bandwidth(&l).unwrap();
        let spec = GridSpec { points: 4000, range: Some((0.1 - 6.0 * h, 0.9 + 6.0 * h)), clip: None };
        let c = kde(&l, Bandwidth::Auto, &spec).unwrap();
        assert!((c.integral() - 1.0).abs() < 0.01);
        assert!(c.grid.windows(2).all(|w| w[1] > w[0]));
        assert!(c.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn permutation_and_weight_scaling() {
        let a = law(&[0.1, 0.5, 0.9], &[0.2, 0.5, 0.3]);
        let b = law(&[0.9, 0.1, 0.5], &[0.3, 0.2, 0.5]);
        let spec = GridSpec::default();
        let ca = kde(&a, Bandwidth::Auto, &spec).unwrap();
        let cb = kde(&b, Bandwidth::Auto, &spec).unwrap();
        assert_eq!(ca, cb);
        let doubled = law(&[0.1, 0.5, 0.9], &[0.4, 1.0, 0.6]);
        let cd = kde(&doubled, Bandwidth::Auto, &spec).unwrap();
        assert_relative_eq!(ca.bandwidth, cd.bandwidth, max_relative = 1e-12);
        let mass = 2.0;
        for (x, y) in ca.values.iter().zip(&cd.values) {
            assert_relative_eq!(*x, y / mass, max_relative = 1e-12);
        }
    }

    #[test]
    fn narrow_kernels_keep_atom_masses() {
        // a ±3h window holds erf(3/√2) of a Gaussian's mass
        const WITHIN_3H: f64 = 0.997_300_203_936_740;
        let l = law(&[0.2, 0.7], &[0.35, 0.65]);
        let h = 1e-4;
        for &(x, w) in &[(0.2, 0.35), (0.7, 0.65)] {
            let spec = GridSpec { points: 2001, range: Some((x - 3.0 * h, x + 3.0 * h)), clip: None };
            let c = kde(&l, Bandwidth::Fixed(h), &spec).unwrap();
            assert!((c.integral() - w * WITHIN_3H).abs() < 1e-3);
        }
    }

    #[test]
    fn clip_limits_default_range() {
        let l = law(&[0.01, 0.99], &[0.5, 0.5]);
        let spec = GridSpec { clip: Some((0.0, 1.0)), ..GridSpec::default() };
        let c = kde(&l, Bandwidth::Fixed(0.1), &spec).unwrap();
        assert_eq!(c.grid[0], 0.0);
        assert!((c.grid[511] - 1.0).abs() < 1e-12);
    }
}
