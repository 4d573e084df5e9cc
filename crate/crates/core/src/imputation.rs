//! Sequential imputation for the nested Dirichlet process.
//!
//! A weighted simulation visits the rows in order. Row m either joins the
//! distribution of an earlier row, with weight equal to that distribution's
//! likelihood of row m, or opens a fresh cluster with weight κ times the
//! row's prior marginal likelihood, in which case its distribution is drawn
//! from the single-row Dirichlet posterior. The normalizers of these stage
//! choices, divided by κ + m − 1, multiply into the simulation's importance
//! weight.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{log_marginal_sparse, sample_dirichlet_into, SimplexVector};
use crate::error::{NdpError, Result};
use crate::model::{ModelConfig, ObservationArray};
use crate::rng::{stream, StreamPurpose};
use crate::special::ln_gamma;

/// Knobs for [`run_batch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Number of independent weighted simulations K.
    pub num_sims: usize,
    pub seed: u64,
    /// log c; only affects the reported raw weights.
    pub log_scale_factor: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl EngineOptions {
    pub fn new(num_sims: usize, seed: u64) -> Self {
        EngineOptions { num_sims, seed, log_scale_factor: 0.0, threads: None }
    }

    pub fn with_log_scale_factor(mut self, log_c: f64) -> Self {
        self.log_scale_factor = log_c;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// One weighted simulation of the row distributions θ*_1..θ*_M.
///
/// Rows that share a distribution share a cluster slot, so every aliased row
/// reads back the very same vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSimulation {
    slot_of: Vec<u32>,
    roots: Vec<usize>,
    thetas: Vec<Vec<f64>>,
    log_weight: f64,
}

impl WeightedSimulation {
    pub fn num_rows(&self) -> usize {
        self.slot_of.len()
    }

    /// θ*_m for row `m` (0-based).
    pub fn theta(&self, m: usize) -> &[f64] {
        &self.thetas[self.slot_of[m] as usize]
    }

    /// The earliest row (0-based) whose distribution row `m` shares; `cluster_of(m) <= m`.
    pub fn cluster_of(&self, m: usize) -> usize {
        self.roots[self.slot_of[m] as usize]
    }

    pub fn cluster_map(&self) -> Vec<usize> {
        (0..self.num_rows()).map(|m| self.cluster_of(m)).collect()
    }

    pub fn num_clusters(&self) -> usize {
        self.thetas.len()
    }

    /// Distinct row distributions paired with the row that opened each.
    pub fn clusters(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.roots.iter().copied().zip(self.thetas.iter().map(Vec::as_slice))
    }

    /// log V = Σ_m [log Σ_i t_mi − log(κ + m − 1)], without the scale factor.
    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    /// Rebuilds a simulation from its cluster map and the distinct vectors,
    /// listed in order of their root rows.
    pub fn from_parts(cluster_of: &[usize], thetas: Vec<SimplexVector>, log_weight: f64) -> Result<Self> {
        let mut roots = Vec::new();
        let mut slot_of = Vec::with_capacity(cluster_of.len());
        for (m, &root) in cluster_of.iter().enumerate() {
            if root == m {
                slot_of.push(roots.len() as u32);
                roots.push(m);
            } else if root < m && cluster_of[root] == root {
                let slot = roots.iter().position(|&r| r == root).expect("root seen earlier");
                slot_of.push(slot as u32);
            } else {
                return Err(NdpError::validation(format!("invalid cluster map entry {root} at row {m}")));
            }
        }
        if thetas.len() != roots.len() {
            return Err(NdpError::validation(format!("{} cluster vectors for {} clusters", thetas.len(), roots.len())));
        }
        Ok(WeightedSimulation {
            slot_of,
            roots,
            thetas: thetas.into_iter().map(SimplexVector::into_inner).collect(),
            log_weight,
        })
    }
}

/// Per-row quantities shared by every simulation in a batch.
struct RowTerms {
    nonzero: Vec<(usize, f64)>,
    /// log(κ · prior marginal likelihood)
    log_fresh: f64,
}

struct Prepared {
    prior: Vec<f64>,
    rows: Vec<RowTerms>,
    log_stage_norm: Vec<f64>,
}

impl Prepared {
    fn new(data: &ObservationArray, config: &ModelConfig) -> Result<Self> {
        data.check_config(config)?;
        let ln_kappa = config.kappa().ln();
        let rows = data
            .counts()
            .iter()
            .map(|c| RowTerms {
                nonzero: c.nonzero().map(|(l, n)| (l, n as f64)).collect(),
                log_fresh: ln_kappa + log_marginal_sparse(c, config.eps(), config.base().as_slice()),
            })
            .collect();
        let log_stage_norm = (0..data.num_rows()).map(|m| (config.kappa() + m as f64).ln()).collect();
        Ok(Prepared { prior: config.prior_params(), rows, log_stage_norm })
    }

    fn simulate<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightedSimulation {
        let num_rows = self.rows.len();
        let mut slot_of = Vec::with_capacity(num_rows);
        let mut roots: Vec<usize> = Vec::new();
        let mut thetas: Vec<Vec<f64>> = Vec::new();
        let mut ln_thetas: Vec<Vec<f64>> = Vec::new();
        let mut sizes: Vec<f64> = Vec::new();
        let mut log_terms: Vec<f64> = Vec::new();
        let mut log_weight = 0.0;

        for (m, row) in self.rows.iter().enumerate() {
            log_terms.clear();
            for (ln_theta, &size) in ln_thetas.iter().zip(&sizes) {
                // A zero component hit by a positive count gives -inf, i.e. t = 0.
                let lt: f64 = row.nonzero.iter().map(|&(l, c)| c * ln_theta[l]).sum();
                log_terms.push(size.ln() + lt);
            }
            log_terms.push(row.log_fresh);

            let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for v in log_terms.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            log_weight += max + total.ln() - self.log_stage_norm[m];

            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut choice = log_terms.len() - 1;
            for (j, &t) in log_terms.iter().enumerate() {
                acc += t;
                if u < acc {
                    choice = j;
                    break;
                }
            }

            if choice < thetas.len() {
                slot_of.push(choice as u32);
                sizes[choice] += 1.0;
            } else {
                let mut theta = Vec::with_capacity(self.prior.len());
                let mut alpha = self.prior.clone();
                for &(l, c) in &row.nonzero {
                    alpha[l] += c;
                }
                sample_dirichlet_into(alpha, rng, &mut theta);
                slot_of.push(thetas.len() as u32);
                roots.push(m);
                ln_thetas.push(theta.iter().map(|v| v.ln()).collect());
                thetas.push(theta);
                sizes.push(1.0);
            }
        }
        WeightedSimulation { slot_of, roots, thetas, log_weight }
    }
}

/// Generates a single weighted simulation.
pub fn simulate_one<R: Rng + ?Sized>(
    data: &ObservationArray,
    config: &ModelConfig,
    rng: &mut R,
) -> Result<WeightedSimulation> {
    Ok(Prepared::new(data, config)?.simulate(rng))
}

/// Recomputes a simulation's log weight from its stored vectors.
pub fn recompute_log_weight(sim: &WeightedSimulation, data: &ObservationArray, config: &ModelConfig) -> Result<f64> {
    let prep = Prepared::new(data, config)?;
    if sim.num_rows() != data.num_rows() {
        return Err(NdpError::Shape { expected: data.num_rows(), actual: sim.num_rows() });
    }
    let mut log_weight = 0.0;
    for (m, row) in prep.rows.iter().enumerate() {
        let mut terms: Vec<f64> = (0..m)
            .map(|i| {
                let theta = sim.theta(i);
                row.nonzero.iter().map(|&(l, c)| c * theta[l].ln()).sum::<f64>()
            })
            .collect();
        terms.push(row.log_fresh);
        log_weight += log_sum_exp(&terms) - prep.log_stage_norm[m];
    }
    Ok(log_weight)
}

/// log Σ exp(x_i), shifted by the maximum.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// The two effective-sample-size estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSampleSize {
    /// (ΣW)² / ΣW², from the population variance of the weights.
    pub prime: f64,
    /// The same with the sample variance: ((K − 1) / (K − K_e'/K)) · K_e'.
    pub double_prime: f64,
}

/// Effective sample sizes of nonnegative weights (any common scale).
///
/// With a single weight the sample variance is undefined and K_e'' is
/// reported equal to K_e'.
pub fn ess(weights: &[f64]) -> Result<EffectiveSampleSize> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(NdpError::domain(format!("weights must be finite and nonnegative, got {w}")));
    }
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(NdpError::Degenerate("all weights are zero".into()));
    }
    let (s1, s2) = weights.iter().fold((0.0, 0.0), |(a, b), w| {
        let x = w / max;
        (a + x, b + x * x)
    });
    Ok(ess_from_sums(weights.len(), s1, s2))
}

fn ess_from_sums(k: usize, s1: f64, s2: f64) -> EffectiveSampleSize {
    let prime = s1 * s1 / s2;
    let kf = k as f64;
    let double_prime = if k > 1 { (kf - 1.0) / (kf - prime / kf) * prime } else { prime };
    EffectiveSampleSize { prime, double_prime }
}

/// Normalizes log weights with a max shift.
pub fn normalize_log_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(NdpError::Degenerate(
            "every simulation weight underflowed; try a different seed or a larger K".into(),
        ));
    }
    let mut w: Vec<f64> = log_weights.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// K weighted simulations with their normalized weights and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationBatch {
    sims: Vec<WeightedSimulation>,
    /// Original simulation index k of each retained simulation.
    ids: Vec<u64>,
    normalized_weights: Vec<f64>,
    ess: EffectiveSampleSize,
    seed: u64,
    config: ModelConfig,
    log_scale_factor: f64,
    trimmed: usize,
}

impl SimulationBatch {
    /// Assembles a batch; weights and effective sample sizes are derived
    /// deterministically in index order.
    pub fn from_simulations(
        sims: Vec<WeightedSimulation>,
        ids: Vec<u64>,
        config: ModelConfig,
        seed: u64,
        log_scale_factor: f64,
        trimmed: usize,
    ) -> Result<Self> {
        if sims.is_empty() {
            return Err(NdpError::validation("a batch needs at least one simulation"));
        }
        if ids.len() != sims.len() {
            return Err(NdpError::Shape { expected: sims.len(), actual: ids.len() });
        }
        let rows = sims[0].num_rows();
        if sims.iter().any(|s| s.num_rows() != rows) {
            return Err(NdpError::validation("simulations disagree on the number of rows"));
        }
        let log_w: Vec<f64> = sims.iter().map(|s| s.log_weight).collect();
        let normalized_weights = normalize_log_weights(&log_w)?;
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = log_w.iter().map(|x| (x - max).exp()).collect();
        let ess = ess(&shifted)?;
        Ok(SimulationBatch { sims, ids, normalized_weights, ess, seed, config, log_scale_factor, trimmed })
    }

    pub fn sims(&self) -> &[WeightedSimulation] {
        &self.sims
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.sims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sims.is_empty()
    }

    pub fn num_rows(&self) -> usize {
        self.sims[0].num_rows()
    }

    pub fn normalized_weights(&self) -> &[f64] {
        &self.normalized_weights
    }

    pub fn ess(&self) -> EffectiveSampleSize {
        self.ess
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn log_scale_factor(&self) -> f64 {
        self.log_scale_factor
    }

    /// Number of heaviest simulations removed by [`trim_heaviest`].
    pub fn trimmed(&self) -> usize {
        self.trimmed
    }

    /// log V_k · c^M · M!, the raw weights as they would be reported with a
    /// scale factor applied.
    pub fn scaled_log_weights(&self) -> Vec<f64> {
        let m = self.num_rows() as f64;
        let shift = m * self.log_scale_factor + ln_gamma(m + 1.0);
        self.sims.iter().map(|s| s.log_weight + shift).collect()
    }
}

/// Runs K independent weighted simulations in parallel.
///
/// Simulation k draws from stream (seed, k), and the batch is assembled in
/// index order, so the result is identical for every thread count.
pub fn run_batch(data: &ObservationArray, config: &ModelConfig, options: &EngineOptions) -> Result<SimulationBatch> {
    if options.num_sims == 0 {
        return Err(NdpError::validation("the number of simulations K must be at least 1"));
    }
    if !options.log_scale_factor.is_finite() {
        return Err(NdpError::validation("log scale factor must be finite"));
    }
    let prep = Prepared::new(data, config)?;
    let seed = options.seed;
    let work = || -> Vec<WeightedSimulation> {
        (0..options.num_sims as u64)
            .into_par_iter()
            .map(|k| prep.simulate(&mut stream(seed, StreamPurpose::Simulation, k)))
            .collect()
    };
    let sims = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| NdpError::validation(format!("cannot build thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let ids = (0..options.num_sims as u64).collect();
    SimulationBatch::from_simulations(sims, ids, config.clone(), seed, options.log_scale_factor, 0)
}

/// Drops the `n` heaviest simulations and renormalizes; the effective
/// sample sizes are recomputed with the reduced count K − n.
pub fn trim_heaviest(batch: &SimulationBatch, n: usize) -> Result<SimulationBatch> {
    if n >= batch.len() {
        return Err(NdpError::validation(format!("cannot trim {n} simulations from a batch of {}", batch.len())));
    }
    if n == 0 {
        return Ok(batch.clone());
    }
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| batch.sims[b].log_weight.total_cmp(&batch.sims[a].log_weight).then(a.cmp(&b)));
    let mut drop = vec![false; batch.len()];
    for &i in &order[..n] {
        drop[i] = true;
    }
    let (sims, ids): (Vec<_>, Vec<_>) =
        batch.sims.iter().zip(&batch.ids).zip(&drop).filter(|(_, d)| !**d).map(|((s, id), _)| (s.clone(), *id)).unzip();
    SimulationBatch::from_simulations(
        sims,
        ids,
        batch.config.clone(),
        batch.seed,
        batch.log_scale_factor,
        batch.trimmed + n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{log_marginal_likelihood, CountVector};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coin_config(kappa: f64, eps: f64) -> ModelConfig {
        ModelConfig::new(kappa, eps, SimplexVector::uniform(2).unwrap()).unwrap()
    }

    #[test]
    fn single_row_weight_is_marginal_likelihood() {
        let data = ObservationArray::validate_and_count(vec![vec![1, 1, 0, 1]], 2).unwrap();
        let config = coin_config(1.7, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sim = simulate_one(&data, &config, &mut rng).unwrap();
        let expected = log_marginal_likelihood(data.row_counts(0), 2.0, config.base()).unwrap();
        assert_relative_eq!(sim.log_weight(), expected, max_relative = 1e-13);
        assert_eq!(sim.cluster_map(), vec![0]);
    }

    #[test]
    fn second_row_joins_with_stated_probability() {
        // rows [[1], [1]], κ = ε = 1, p = (½, ½): P(join) = θ*_{1,1} / (θ*_{1,1} + ½)
        let data = ObservationArray::validate_and_count(vec![vec![1], vec![1]], 2).unwrap();
        let config = coin_config(1.0, 1.0);
        let n = 200_000;
        let mut joined = 0.0;
        let mut predicted = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..n {
            let sim = simulate_one(&data, &config, &mut rng).unwrap();
            let t = sim.theta(0)[1];
            predicted += t / (t + 0.5);
            if sim.cluster_of(1) == 0 {
                joined += 1.0;
            }
        }
        let (joined, predicted) = (joined / n as f64, predicted / n as f64);
        let se = (predicted * (1.0 - predicted) / n as f64).sqrt();
        assert!((joined - predicted).abs() < 4.0 * se, "{joined} vs {predicted}");
    }

    #[test]
    fn aliasing_and_weight_recomputation() {
        let data = ObservationArray::validate_and_count(
            vec![vec![1, 1, 0], vec![1, 1], vec![0, 0, 0, 1], vec![], vec![2, 2, 1]],
            3,
        )
        .unwrap();
        let config = ModelConfig::new(0.8, 1.5, SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let sim = simulate_one(&data, &config, &mut rng).unwrap();
            assert_eq!(sim.cluster_of(0), 0);
            for m in 0..data.num_rows() {
                let root = sim.cluster_of(m);
                assert!(root <= m);
                assert_eq!(sim.theta(m), sim.theta(root));
                assert_eq!(sim.cluster_of(root), root);
            }
            let again = recompute_log_weight(&sim, &data, &config).unwrap();
            assert!((again - sim.log_weight()).abs() < 1e-9);
            assert!(sim.log_weight().is_finite());
        }
    }

    #[test]
    fn ess_examples() {
        let e = ess(&[1.0; 17]).unwrap();
        assert_relative_eq!(e.prime, 17.0, max_relative = 1e-14);
        assert_relative_eq!(e.double_prime, 17.0, max_relative = 1e-14);

        let mut spike = vec![0.0; 10];
        spike[0] = 1.0;
        assert_relative_eq!(ess(&spike).unwrap().prime, 1.0);

        let e = ess(&[1.0, 2.0, 3.0]).unwrap();
        let kp = 36.0 / 14.0;
        assert_relative_eq!(e.prime, kp, max_relative = 1e-14);
        assert_relative_eq!(e.double_prime, 2.0 / (3.0 - kp / 3.0) * kp, max_relative = 1e-14);

        assert!(matches!(ess(&[0.0, 0.0]), Err(NdpError::Degenerate(_))));
    }

    #[test]
    fn constant_weights_give_full_ess() {
        let data = ObservationArray::validate_and_count(vec![vec![0, 1, 1]], 2).unwrap();
        let batch = run_batch(&data, &coin_config(1.0, 1.0), &EngineOptions::new(500, 1)).unwrap();
        assert_eq!(batch.ess().prime, 500.0);
        assert_eq!(batch.ess().double_prime, 500.0);
    }

    #[test]
    fn zero_sims_rejected() {
        let data = ObservationArray::validate_and_count(vec![vec![0]], 2).unwrap();
        assert!(run_batch(&data, &coin_config(1.0, 1.0), &EngineOptions::new(0, 1)).is_err());
    }

    #[test]
    fn state_count_mismatch_rejected() {
        let data = ObservationArray::validate_and_count(vec![vec![0]], 3).unwrap();
        assert!(run_batch(&data, &coin_config(1.0, 1.0), &EngineOptions::new(4, 1)).is_err());
    }

    #[test]
    fn trimming() {
        let data = ObservationArray::validate_and_count(vec![vec![0, 1, 1], vec![1, 1, 1], vec![0, 0]], 2).unwrap();
        let batch = run_batch(&data, &coin_config(1.0, 1.0), &EngineOptions::new(200, 3)).unwrap();
        assert_eq!(trim_heaviest(&batch, 0).unwrap(), batch);
        assert!(trim_heaviest(&batch, 200).is_err());

        let trimmed = trim_heaviest(&batch, 5).unwrap();
        assert_eq!(trimmed.len(), 195);
        assert_eq!(trimmed.trimmed(), 5);
        let kept_max = trimmed.sims().iter().map(|s| s.log_weight()).fold(f64::NEG_INFINITY, f64::max);
        let mut all: Vec<f64> = batch.sims().iter().map(|s| s.log_weight()).collect();
        all.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(kept_max, all[5]);
        assert_relative_eq!(trimmed.normalized_weights().iter().sum::<f64>(), 1.0, max_relative = 1e-12);
        assert!(trimmed.ess().prime <= 195.0);
    }

    #[test]
    fn ess_bounds_hold() {
        let data =
            ObservationArray::validate_and_count(vec![vec![0, 1, 1], vec![1, 1, 1, 1, 1], vec![0, 0]], 2).unwrap();
        let batch = run_batch(&data, &coin_config(0.5, 2.0), &EngineOptions::new(300, 8)).unwrap();
        let e = batch.ess();
        let k = batch.len() as f64;
        assert!(e.prime >= 1.0 && e.prime <= k);
        assert!(e.double_prime <= e.prime * k / (k - 1.0) + 1e-9);
        assert_relative_eq!(batch.normalized_weights().iter().sum::<f64>(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn scaled_weights_add_constant() {
        let data = ObservationArray::validate_and_count(vec![vec![0], vec![1], vec![1]], 2).unwrap();
        let opts = EngineOptions::new(10, 2).with_log_scale_factor(1.5);
        let batch = run_batch(&data, &coin_config(1.0, 1.0), &opts).unwrap();
        let shift = 3.0 * 1.5 + 6f64.ln();
        for (s, scaled) in batch.sims().iter().zip(batch.scaled_log_weights()) {
            assert_relative_eq!(scaled, s.log_weight() + shift, max_relative = 1e-14);
        }
    }

    #[test]
    fn from_parts_round_trip() {
        let data = ObservationArray::validate_and_count(vec![vec![0, 0], vec![0, 0], vec![1, 1, 1]], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sim = simulate_one(&data, &coin_config(1.0, 1.0), &mut rng).unwrap();
        let thetas = sim.clusters().map(|(_, t)| SimplexVector::new(t.to_vec()).unwrap()).collect();
        let rebuilt = WeightedSimulation::from_parts(&sim.cluster_map(), thetas, sim.log_weight()).unwrap();
        assert_eq!(rebuilt, sim);
        assert!(WeightedSimulation::from_parts(&[1, 0], vec![], 0.0).is_err());
    }

    #[test]
    fn empty_row_counts_are_neutral() {
        let c = CountVector::zeros(4);
        assert_eq!(log_marginal_sparse(&c, 1.0, &[0.25; 4]), 0.0);
    }
}
