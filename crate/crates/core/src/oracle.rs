//! Exact posterior for small arrays by enumerating row partitions.
//!
//! Under the model, which rows share a distribution follows a Chinese
//! restaurant process: a partition π of the M rows has prior probability
//! κ^{|π|} Π_{B∈π} (|B| − 1)! / Π_{m=0}^{M−1} (κ + m). Given π, each block
//! carries one Dirichlet distribution, so its likelihood is the
//! Dirichlet-multinomial marginal of the pooled block counts. Enumerating all
//! Bell(M) partitions gives the exact posterior; the cost is why M is capped.

use serde::Serialize;

use crate::dirichlet::{log_marginal_sparse, CountVector};
use crate::error::{NdpError, Result};
use crate::functional::{contest, mean_score, Functional};
use crate::imputation::log_sum_exp;
use crate::model::{ModelConfig, ObservationArray};
use crate::special::ln_gamma;

/// Largest M accepted; Bell(12) = 4,213,597 partitions.
pub const MAX_ORACLE_ROWS: usize = 12;

/// Bell numbers B_0..B_12.
pub const BELL: [u64; 13] = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];

/// Per-block conditional quantities, indexed by the block's row bitmask.
struct BlockTable {
    /// Posterior Dirichlet mean of the block's shared distribution.
    mean: Vec<Vec<f64>>,
    /// Total posterior concentration α₀.
    alpha0: Vec<f64>,
}

/// Normalized posterior over all set partitions of the rows.
pub struct PartitionPosterior {
    num_rows: usize,
    kappa: f64,
    base: Vec<f64>,
    /// Restricted growth strings, `num_rows` bytes per partition, in lexicographic order.
    growth: Vec<u8>,
    log_post: Vec<f64>,
    log_evidence: f64,
    blocks: BlockTable,
}

/// One partition with its posterior probability, blocks listed as 1-based rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPartition {
    pub blocks: Vec<Vec<usize>>,
    pub probability: f64,
}

/// Enumerates the exact posterior over row partitions.
pub fn enumerate_posterior(data: &ObservationArray, config: &ModelConfig) -> Result<PartitionPosterior> {
    data.check_config(config)?;
    let m = data.num_rows();
    if m > MAX_ORACLE_ROWS {
        return Err(NdpError::validation(format!(
            "exact enumeration is capped at {MAX_ORACLE_ROWS} rows (Bell({MAX_ORACLE_ROWS}) = {} partitions); \
             M = {m} would need far more",
            BELL[MAX_ORACLE_ROWS]
        )));
    }
    let num_states = config.num_states();
    let eps = config.eps();
    let base = config.base().as_slice();
    let ln_kappa = config.kappa().ln();

    let num_masks = 1usize << m;
    let mut block_score = vec![0.0; num_masks];
    let mut mean = vec![Vec::new(); num_masks];
    let mut alpha0 = vec![0.0; num_masks];
    let mut pooled: Vec<CountVector> = vec![CountVector::zeros(num_states); num_masks];
    for mask in 1..num_masks {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        pooled[mask] = pooled[rest].add(data.row_counts(low))?;
        let size = mask.count_ones() as f64;
        let c = &pooled[mask];
        block_score[mask] = ln_kappa + ln_gamma(size) + log_marginal_sparse(c, eps, base);
        let a0 = eps + c.total() as f64;
        alpha0[mask] = a0;
        mean[mask] = base.iter().zip(c.as_slice()).map(|(p, &n)| (eps * p + n as f64) / a0).collect();
    }

    let total = BELL[m] as usize;
    let mut growth = Vec::with_capacity(total * m);
    let mut log_raw = Vec::with_capacity(total);
    let mut rgs = vec![0u8; m];
    let mut masks = vec![0usize; m];
    enumerate(0, 0, &mut rgs, &mut masks, &block_score, &mut growth, &mut log_raw);
    debug_assert_eq!(log_raw.len(), total);

    let lse = log_sum_exp(&log_raw);
    let log_prior_norm: f64 = (0..m).map(|i| (config.kappa() + i as f64).ln()).sum();
    let log_post = log_raw.iter().map(|x| x - lse).collect();
    Ok(PartitionPosterior {
        num_rows: m,
        kappa: config.kappa(),
        base: base.to_vec(),
        growth,
        log_post,
        log_evidence: lse - log_prior_norm,
        blocks: BlockTable { mean, alpha0 },
    })
}

fn enumerate(
    row: usize,
    used: usize,
    rgs: &mut [u8],
    masks: &mut [usize],
    score: &[f64],
    growth: &mut Vec<u8>,
    log_raw: &mut Vec<f64>,
) {
    if row == rgs.len() {
        growth.extend_from_slice(rgs);
        log_raw.push(masks[..used].iter().map(|&b| score[b]).sum());
        return;
    }
    for b in 0..=used {
        rgs[row] = b as u8;
        masks[b] |= 1 << row;
        let next_used = if b == used { used + 1 } else { used };
        enumerate(row + 1, next_used, rgs, masks, score, growth, log_raw);
        masks[b] &= !(1 << row);
    }
}

impl PartitionPosterior {
    pub fn num_partitions(&self) -> usize {
        self.log_post.len()
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    /// Restricted growth string of partition `i`: entry m is the block of row m.
    pub fn partition(&self, i: usize) -> &[u8] {
        &self.growth[i * self.num_rows..(i + 1) * self.num_rows]
    }

    pub fn log_post_weights(&self) -> &[f64] {
        &self.log_post
    }

    /// log P(Y = y), the marginal probability of the observed sequences.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    fn block_masks(&self, i: usize) -> Vec<usize> {
        let rgs = self.partition(i);
        let mut masks = vec![0usize; rgs.iter().map(|&b| b as usize + 1).max().unwrap_or(0)];
        for (m, &b) in rgs.iter().enumerate() {
            masks[b as usize] |= 1 << m;
        }
        masks
    }

    /// The `n` most probable partitions, most probable first.
    pub fn top(&self, n: usize) -> Vec<RankedPartition> {
        let mut order: Vec<usize> = (0..self.num_partitions()).collect();
        order.sort_by(|&a, &b| self.log_post[b].total_cmp(&self.log_post[a]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(n)
            .map(|i| RankedPartition {
                blocks: self
                    .block_masks(i)
                    .into_iter()
                    .map(|mask| (0..self.num_rows).filter(|m| mask & (1 << m) != 0).map(|m| m + 1).collect())
                    .collect(),
                probability: self.log_post[i].exp(),
            })
            .collect()
    }

    /// Exact posterior expectation of a functional built from Dirichlet moments.
    ///
    /// Indicators (`lt`) have no closed-form moments and are rejected.
    pub fn expectation(&self, f: &Functional) -> Result<f64> {
        self.check(f)?;
        let mut block_of = vec![0usize; self.num_rows];
        let mut acc = 0.0;
        for i in 0..self.num_partitions() {
            let w = self.log_post[i].exp();
            if w == 0.0 {
                continue;
            }
            for mask in self.block_masks(i) {
                for (m, b) in block_of.iter_mut().enumerate() {
                    if mask & (1 << m) != 0 {
                        *b = mask;
                    }
                }
            }
            acc += w * self.conditional_value(f, &block_of);
        }
        Ok(acc)
    }

    /// Exact probability that rows `i` and `j` (1-based) share a distribution.
    pub fn cocluster_probability(&self, i: usize, j: usize) -> Result<f64> {
        self.expectation(&Functional::Cocluster { first: i, second: j })
    }

    fn check(&self, f: &Functional) -> Result<()> {
        match f {
            Functional::IndicatorLt { .. } => {
                Err(NdpError::Unsupported(format!("`{f}` has no closed-form moments; use the Monte Carlo engine")))
            }
            Functional::Difference(a, b) => {
                self.check(a)?;
                self.check(b)?;
                f.validate(self.num_rows, self.base.len())
            }
            _ => f.validate(self.num_rows, self.base.len()),
        }
    }

    /// E[f | partition], given the block mask of every row.
    fn conditional_value(&self, f: &Functional, block_of: &[usize]) -> f64 {
        let mean = |row: usize| -> &[f64] { &self.blocks.mean[block_of[row - 1]] };
        match f {
            Functional::Component { row, state } => mean(*row)[*state],
            Functional::MeanScore { row } => mean_score(mean(*row)),
            Functional::Contest { first, second } => {
                let (a, b) = (block_of[first - 1], block_of[second - 1]);
                if a == b {
                    // E[θ_ℓ θ_ℓ'] = α_ℓ α_ℓ' / (α₀ (α₀ + 1)) within one Dirichlet
                    let a0 = self.blocks.alpha0[a];
                    contest(&self.blocks.mean[a], &self.blocks.mean[a]) * a0 / (a0 + 1.0)
                } else {
                    contest(&self.blocks.mean[a], &self.blocks.mean[b])
                }
            }
            Functional::Cocluster { first, second } => {
                if block_of[first - 1] == block_of[second - 1] {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::NewAgentComponent { state } => self.new_agent(block_of, |x| x[*state]),
            Functional::NewAgentMean => self.new_agent(block_of, mean_score),
            Functional::Difference(a, b) => self.conditional_value(a, block_of) - self.conditional_value(b, block_of),
            Functional::IndicatorLt { .. } => unreachable!("rejected by check"),
        }
    }

    fn new_agent(&self, block_of: &[usize], g: impl Fn(&[f64]) -> f64) -> f64 {
        let denom = self.kappa + self.num_rows as f64;
        let rows: f64 = block_of.iter().map(|&b| g(&self.blocks.mean[b])).sum();
        (self.kappa * g(&self.base) + rows) / denom
    }
}

/// Convenience wrapper around [`PartitionPosterior::expectation`].
pub fn exact_expectation(posterior: &PartitionPosterior, f: &Functional) -> Result<f64> {
    posterior.expectation(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::SimplexVector;
    use approx::assert_relative_eq;

    fn coin(kappa: f64, eps: f64) -> ModelConfig {
        ModelConfig::new(kappa, eps, SimplexVector::uniform(2).unwrap()).unwrap()
    }

    #[test]
    fn single_row() {
        let data = ObservationArray::validate_and_count(vec![vec![1, 1, 0]], 2).unwrap();
        let post = enumerate_posterior(&data, &coin(1.0, 2.0)).unwrap();
        assert_eq!(post.num_partitions(), 1);
        assert_eq!(post.log_post_weights()[0], 0.0);
        // (εp + ȳ) / (ε + N) = (1 + 2) / (2 + 3)
        let e = post.expectation(&Functional::parse("component 1 1").unwrap()).unwrap();
        assert_relative_eq!(e, 0.6, max_relative = 1e-14);
    }

    #[test]
    fn two_rows_hand_calculation() {
        // rows [[1],[1]], κ = ε = 1, p = (½, ½)
        // {1,2}: κ · 0! · B(½, 5/2)/B(½, ½) = 3/8
        // {1|2}: κ² · (½)(½) = 1/4
        let data = ObservationArray::validate_and_count(vec![vec![1], vec![1]], 2).unwrap();
        let post = enumerate_posterior(&data, &coin(1.0, 1.0)).unwrap();
        assert_eq!(post.num_partitions(), 2);
        assert_eq!(post.partition(0), &[0, 0]);
        assert_eq!(post.partition(1), &[0, 1]);
        let together = 0.375 / (0.375 + 0.25);
        assert_relative_eq!(post.log_post_weights()[0].exp(), together, max_relative = 1e-13);
        assert_relative_eq!(post.cocluster_probability(1, 2).unwrap(), together, max_relative = 1e-13);
        // P(Y) = (3/8 + 1/4) / (κ (κ + 1))
        assert_relative_eq!(post.log_evidence().exp(), 0.625 / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        for m in 1..=7 {
            let rows = vec![vec![0, 1]; m];
            let data = ObservationArray::validate_and_count(rows, 2).unwrap();
            let post = enumerate_posterior(&data, &coin(1.0, 1.0)).unwrap();
            assert_eq!(post.num_partitions() as u64, BELL[m]);
            let total: f64 = post.log_post_weights().iter().map(|w| w.exp()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_rows_recover_crp() {
        for kappa in [0.3, 1.0, 2.5] {
            let data = ObservationArray::validate_and_count(vec![vec![], vec![]], 3).unwrap();
            let config = ModelConfig::new(kappa, 1.0, SimplexVector::uniform(3).unwrap()).unwrap();
            let post = enumerate_posterior(&data, &config).unwrap();
            assert_relative_eq!(post.cocluster_probability(1, 2).unwrap(), 1.0 / (kappa + 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn tiny_kappa_merges_identical_rows() {
        let data = ObservationArray::validate_and_count(vec![vec![1], vec![1]], 2).unwrap();
        let post = enumerate_posterior(&data, &coin(1e-8, 1.0)).unwrap();
        assert!(post.cocluster_probability(1, 2).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn symmetric_contest() {
        // Two rows with mirrored-symmetric pooled counts: C(θ1,θ2) + C(θ2,θ1) + tie = 1,
        // and by symmetry E C(θ1,θ2) = E C(θ2,θ1).
        let data = ObservationArray::validate_and_count(vec![vec![0, 2], vec![0, 2]], 3).unwrap();
        let config = ModelConfig::new(1.0, 1.5, SimplexVector::uniform(3).unwrap()).unwrap();
        let post = enumerate_posterior(&data, &config).unwrap();
        let c12 = post.expectation(&Functional::parse("contest 1 2").unwrap()).unwrap();
        let c21 = post.expectation(&Functional::parse("contest 2 1").unwrap()).unwrap();
        assert_relative_eq!(c12, c21, max_relative = 1e-13);

        // tie mass E Σ_ℓ θ1_ℓ θ2_ℓ from moments, then (1 − tie)/2
        let p_same = post.cocluster_probability(1, 2).unwrap();
        let pooled = [1.5 / 3.0 + 2.0, 1.5 / 3.0, 1.5 / 3.0 + 2.0];
        let a0: f64 = pooled.iter().sum();
        let tie_same: f64 = pooled.iter().map(|a| a * (a + 1.0)).sum::<f64>() / (a0 * (a0 + 1.0));
        let single = [1.5 / 3.0 + 1.0, 1.5 / 3.0, 1.5 / 3.0 + 1.0];
        let s0: f64 = single.iter().sum();
        let tie_apart: f64 = single.iter().map(|a| (a / s0).powi(2)).sum();
        let tie = p_same * tie_same + (1.0 - p_same) * tie_apart;
        assert_relative_eq!(c12, (1.0 - tie) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_indicators_and_large_arrays() {
        let data = ObservationArray::validate_and_count(vec![vec![1]], 2).unwrap();
        let post = enumerate_posterior(&data, &coin(1.0, 1.0)).unwrap();
        assert!(matches!(
            post.expectation(&Functional::parse("lt component 1 1 0.5").unwrap()),
            Err(NdpError::Unsupported(_))
        ));
        let big = ObservationArray::validate_and_count(vec![vec![1]; 13], 2).unwrap();
        let err = enumerate_posterior(&big, &coin(1.0, 1.0)).err().unwrap();
        assert!(err.to_string().contains("4213597"));
    }

    #[test]
    fn row_relabeling_invariance() {
        let rows = vec![vec![1, 1, 0], vec![0, 0], vec![1, 1, 1, 1], vec![0, 1]];
        let config = coin(0.7, 2.0);
        let post =
            enumerate_posterior(&ObservationArray::validate_and_count(rows.clone(), 2).unwrap(), &config).unwrap();
        let perm = [2usize, 0, 3, 1]; // new row i holds old row perm[i]
        let permuted: Vec<Vec<usize>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let post2 = enumerate_posterior(&ObservationArray::validate_and_count(permuted, 2).unwrap(), &config).unwrap();
        for (new, &old) in perm.iter().enumerate() {
            let a = post.expectation(&Functional::Component { row: old + 1, state: 1 }).unwrap();
            let b = post2.expectation(&Functional::Component { row: new + 1, state: 1 }).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert_relative_eq!(post.log_evidence(), post2.log_evidence(), max_relative = 1e-12);
    }

    #[test]
    fn top_partitions_sorted() {
        let data = ObservationArray::validate_and_count(vec![vec![1, 1], vec![1, 1], vec![0, 0]], 2).unwrap();
        let post = enumerate_posterior(&data, &coin(1.0, 1.0)).unwrap();
        let top = post.top(5);
        assert_eq!(top.len(), 5);
        assert!(top.windows(2).all(|w| w[0].probability >= w[1].probability));
        assert_eq!(post.top(100).len(), 5);
    }
}
