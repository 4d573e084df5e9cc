//! Posterior summaries computed from a weighted batch.

use serde::{Deserialize, Serialize};

use crate::dirichlet::{sample_dirichlet_into, SimplexVector};
use crate::error::{NdpError, Result};
use crate::functional::{Functional, VectorFunctional};
use crate::imputation::SimulationBatch;
use crate::model::ModelConfig;
use crate::rng::{stream, StreamPurpose};

/// Default size of the auxiliary prior sample in new-agent laws.
pub const DEFAULT_PRIOR_SAMPLES: usize = 10_000;

/// The prior part κ/(κ+M) · Dir(εp)∘f⁻¹ of a new-agent law, carried as a
/// Monte Carlo sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorComponent {
    pub mass: f64,
    pub atoms: Vec<f64>,
    /// Exact prior mean of f, available when f is linear.
    pub analytic_mean: Option<f64>,
}

/// A discrete weighted law, optionally mixed with a prior component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSampleLaw {
    pub atoms: Vec<f64>,
    /// Sums to 1 − prior mass.
    pub weights: Vec<f64>,
    pub prior: Option<PriorComponent>,
}

impl WeightedSampleLaw {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(NdpError::Shape { expected: atoms.len(), actual: weights.len() });
        }
        Ok(WeightedSampleLaw { atoms, weights, prior: None })
    }

    /// Every atom with its weight, prior atoms sharing the prior mass equally.
    pub fn weighted_atoms(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.atoms.iter().copied().zip(self.weights.iter().copied()).collect();
        if let Some(prior) = &self.prior {
            if !prior.atoms.is_empty() {
                let w = prior.mass / prior.atoms.len() as f64;
                out.extend(prior.atoms.iter().map(|&a| (a, w)));
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.prior.as_ref().map_or(0.0, |p| p.mass)
    }

    pub fn len(&self) -> usize {
        self.atoms.len() + self.prior.as_ref().map_or(0, |p| p.atoms.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn map_atoms(&self, g: impl Fn(f64) -> f64) -> WeightedSampleLaw {
        WeightedSampleLaw {
            atoms: self.atoms.iter().map(|&a| g(a)).collect(),
            weights: self.weights.clone(),
            prior: self.prior.as_ref().map(|p| PriorComponent {
                mass: p.mass,
                atoms: p.atoms.iter().map(|&a| g(a)).collect(),
                analytic_mean: None,
            }),
        }
    }
}

/// Weighted mean of a law; a prior component uses its analytic mean when known.
pub fn expectation(law: &WeightedSampleLaw) -> f64 {
    let main: f64 = law.atoms.iter().zip(&law.weights).map(|(a, w)| a * w).sum();
    match &law.prior {
        None => main,
        Some(p) => main + p.mass * p.analytic_mean.unwrap_or_else(|| mean(&p.atoms)),
    }
}

/// Mass of atoms strictly below `threshold`.
pub fn probability_below(law: &WeightedSampleLaw, threshold: f64) -> f64 {
    let main: f64 = law.atoms.iter().zip(&law.weights).filter(|(a, _)| **a < threshold).map(|(_, w)| w).sum();
    match &law.prior {
        None => main,
        Some(p) if p.atoms.is_empty() => main,
        Some(p) => {
            let below = p.atoms.iter().filter(|a| **a < threshold).count();
            main + p.mass * below as f64 / p.atoms.len() as f64
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Settings for the auxiliary prior sample of new-agent laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawOptions {
    pub prior_samples: usize,
    /// Defaults to the batch seed.
    pub prior_seed: Option<u64>,
}

impl Default for LawOptions {
    fn default() -> Self {
        LawOptions { prior_samples: DEFAULT_PRIOR_SAMPLES, prior_seed: None }
    }
}

/// Weighted law of a functional under the batch.
pub fn law_of(batch: &SimulationBatch, f: &Functional) -> Result<WeightedSampleLaw> {
    law_of_with(batch, f, &LawOptions::default())
}

pub fn law_of_with(batch: &SimulationBatch, f: &Functional, opts: &LawOptions) -> Result<WeightedSampleLaw> {
    f.validate(batch.num_rows(), batch.config().num_states())?;
    if f.is_new_agent() {
        let (vf, threshold) = f
            .new_agent_parts()
            .ok_or_else(|| NdpError::Unsupported(format!("cannot form a new-agent law for `{f}`")))?;
        let law = new_agent_law_with(batch, vf, opts)?;
        return Ok(match threshold {
            None => law,
            Some(t) => law.map_atoms(|a| if a < t { 1.0 } else { 0.0 }),
        });
    }
    let atoms = batch.sims().iter().map(|s| f.eval(s).expect("row functional")).collect();
    WeightedSampleLaw::new(atoms, batch.normalized_weights().to_vec())
}

/// Posterior law of f(θ_{M+1}) for a new row: mass κ/(κ+M) on the prior
/// pushforward and 1/(κ+M) on each observed row's weighted law.
pub fn new_agent_law(batch: &SimulationBatch, f: VectorFunctional) -> Result<WeightedSampleLaw> {
    new_agent_law_with(batch, f, &LawOptions::default())
}

pub fn new_agent_law_with(
    batch: &SimulationBatch,
    f: VectorFunctional,
    opts: &LawOptions,
) -> Result<WeightedSampleLaw> {
    let config = batch.config();
    check_vector_functional(f, config)?;
    let num_rows = batch.num_rows();
    let denom = config.kappa() + num_rows as f64;
    let mut atoms = Vec::with_capacity(num_rows * batch.len());
    let mut weights = Vec::with_capacity(num_rows * batch.len());
    for m in 0..num_rows {
        for (sim, w) in batch.sims().iter().zip(batch.normalized_weights()) {
            atoms.push(f.eval(sim.theta(m)));
            weights.push(w / denom);
        }
    }
    let seed = opts.prior_seed.unwrap_or(batch.seed());
    let mut prior = prior_component(config, f, opts.prior_samples, seed);
    prior.mass = config.kappa() / denom;
    Ok(WeightedSampleLaw { atoms, weights, prior: Some(prior) })
}

/// The law of f under Dir(εp) alone, i.e. the new-agent law with no data.
pub fn prior_law(config: &ModelConfig, f: VectorFunctional, samples: usize, seed: u64) -> Result<WeightedSampleLaw> {
    check_vector_functional(f, config)?;
    Ok(WeightedSampleLaw { atoms: vec![], weights: vec![], prior: Some(prior_component(config, f, samples, seed)) })
}

fn check_vector_functional(f: VectorFunctional, config: &ModelConfig) -> Result<()> {
    if let VectorFunctional::Component(l) = f {
        if l >= config.num_states() {
            return Err(NdpError::validation(format!("state {l} is outside 0..{}", config.num_states())));
        }
    }
    Ok(())
}

fn prior_component(config: &ModelConfig, f: VectorFunctional, samples: usize, seed: u64) -> PriorComponent {
    let alpha = config.prior_params();
    let mut rng = stream(seed, StreamPurpose::PriorSample, 0);
    let mut buf = Vec::with_capacity(alpha.len());
    let atoms = (0..samples)
        .map(|_| {
            sample_dirichlet_into(alpha.iter().copied(), &mut rng, &mut buf);
            f.eval(&buf)
        })
        .collect();
    // Dirichlet mean is p; both vector functionals are linear.
    let analytic_mean = Some(f.eval(config.base().as_slice()));
    PriorComponent { mass: 1.0, atoms, analytic_mean }
}

/// Delta-method standard error of the self-normalized estimate of E[f].
///
/// New-agent functionals are aggregated per simulation first, since all
/// rows of one simulation share its weight; a sampled prior component adds
/// its own Monte Carlo variance.
pub fn standard_error(batch: &SimulationBatch, f: &Functional, opts: &LawOptions) -> Result<f64> {
    f.validate(batch.num_rows(), batch.config().num_states())?;
    let w = batch.normalized_weights();
    let per_sim: Vec<f64>;
    let mut prior_var = 0.0;
    if let Some((vf, threshold)) = f.new_agent_parts() {
        let denom = batch.config().kappa() + batch.num_rows() as f64;
        let g = |x: f64| match threshold {
            Some(t) => {
                if x < t {
                    1.0
                } else {
                    0.0
                }
            }
            None => x,
        };
        per_sim = batch
            .sims()
            .iter()
            .map(|s| (0..batch.num_rows()).map(|m| g(vf.eval(s.theta(m)))).sum::<f64>() / denom)
            .collect();
        if threshold.is_some() && opts.prior_samples > 1 {
            let prior =
                prior_component(batch.config(), vf, opts.prior_samples, opts.prior_seed.unwrap_or(batch.seed()));
            let vals: Vec<f64> = prior.atoms.iter().map(|&a| g(a)).collect();
            let mu = mean(&vals);
            let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            let mass = batch.config().kappa() / denom;
            prior_var = mass * mass * var / vals.len() as f64;
        }
    } else {
        per_sim = batch.sims().iter().map(|s| f.eval(s).expect("row functional")).collect();
    }
    let mu: f64 = per_sim.iter().zip(w).map(|(x, w)| x * w).sum();
    let var: f64 = per_sim.iter().zip(w).map(|(x, w)| w * w * (x - mu).powi(2)).sum();
    Ok((var + prior_var).sqrt())
}

/// Weighted probability that rows i and j share a distribution, for all pairs.
pub fn cocluster_matrix(batch: &SimulationBatch) -> Vec<Vec<f64>> {
    let m = batch.num_rows();
    let mut out = vec![vec![0.0; m]; m];
    let mut roots = vec![0usize; m];
    for (sim, &w) in batch.sims().iter().zip(batch.normalized_weights()) {
        for (i, r) in roots.iter_mut().enumerate() {
            *r = sim.cluster_of(i);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if roots[i] == roots[j] {
                    out[i][j] += w;
                }
            }
        }
    }
    for i in 0..m {
        out[i][i] = 1.0;
        for j in (i + 1)..m {
            out[i][j] = out[i][j].min(1.0);
            out[j][i] = out[i][j];
        }
    }
    out
}

/// One-step predictive law of the next observation in row `row` (1-based),
/// i.e. the posterior mean of θ_row.
pub fn predictive_next(batch: &SimulationBatch, row: usize) -> Result<SimplexVector> {
    let num_rows = batch.num_rows();
    if row == 0 || row > num_rows {
        return Err(NdpError::validation(format!("row {row} is outside 1..={num_rows}")));
    }
    let mut acc = vec![0.0; batch.config().num_states()];
    for (sim, &w) in batch.sims().iter().zip(batch.normalized_weights()) {
        for (a, t) in acc.iter_mut().zip(sim.theta(row - 1)) {
            *a += w * t;
        }
    }
    renormalized(acc)
}

/// Predictive law of the first observation of a new row:
/// κ/(κ+M)·p + 1/(κ+M)·Σ_m predictive_next(m).
pub fn new_agent_predictive(batch: &SimulationBatch) -> Result<SimplexVector> {
    let rows = (1..=batch.num_rows()).map(|m| predictive_next(batch, m)).collect::<Result<Vec<_>>>()?;
    mix_with_prior(batch.config(), &rows)
}

/// κ/(κ+M)·p + 1/(κ+M)·Σ rows; with no rows this is p itself.
pub fn mix_with_prior(config: &ModelConfig, rows: &[SimplexVector]) -> Result<SimplexVector> {
    let denom = config.kappa() + rows.len() as f64;
    let mut acc: Vec<f64> = config.base().as_slice().iter().map(|p| config.kappa() * p / denom).collect();
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r.as_slice()) {
            *a += v / denom;
        }
    }
    renormalized(acc)
}

fn renormalized(mut v: Vec<f64>) -> Result<SimplexVector> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    SimplexVector::new(v)
}
