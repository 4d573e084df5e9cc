//! Model configuration and the validated observation array.

use serde::{Deserialize, Serialize};

use crate::dirichlet::{CountVector, SimplexVector};
use crate::error::{NdpError, Result};

/// Hyperparameters of the nested Dirichlet process.
///
/// `kappa` is the column concentration (how readily rows share a
/// distribution), `eps` the row concentration, and `base` the prior mean of
/// every fresh row distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    kappa: f64,
    eps: f64,
    base: SimplexVector,
}

impl ModelConfig {
    pub fn new(kappa: f64, eps: f64, base: SimplexVector) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(NdpError::validation(format!("kappa must be positive and finite, got {kappa}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(NdpError::validation(format!("eps must be positive and finite, got {eps}")));
        }
        if let Some(i) = base.as_slice().iter().position(|&p| p <= 0.0) {
            return Err(NdpError::validation(format!("base measure entry {i} must be strictly positive")));
        }
        Ok(ModelConfig { kappa, eps, base })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn base(&self) -> &SimplexVector {
        &self.base
    }

    /// Number of states L.
    pub fn num_states(&self) -> usize {
        self.base.len()
    }

    /// Prior Dirichlet parameters εp.
    pub fn prior_params(&self) -> Vec<f64> {
        self.base.as_slice().iter().map(|p| self.eps * p).collect()
    }
}

/// A jagged array of categorical observations, reduced to per-row counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationArray {
    num_states: usize,
    counts: Vec<CountVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<Vec<Vec<usize>>>,
}

impl ObservationArray {
    /// Validates labels against `num_states` and tallies each row.
    ///
    /// Within-row order is discarded; the raw rows are kept for provenance.
    pub fn validate_and_count(raw_rows: Vec<Vec<usize>>, num_states: usize) -> Result<Self> {
        let mut arr = Self::validate_counts_only(&raw_rows, num_states)?;
        arr.raw = Some(raw_rows);
        Ok(arr)
    }

    fn validate_counts_only(raw_rows: &[Vec<usize>], num_states: usize) -> Result<Self> {
        if num_states < 2 {
            return Err(NdpError::validation(format!("need at least 2 states, got {num_states}")));
        }
        if raw_rows.is_empty() {
            return Err(NdpError::validation("observation array has no rows"));
        }
        let mut counts = Vec::with_capacity(raw_rows.len());
        for (m, row) in raw_rows.iter().enumerate() {
            let mut c = CountVector::zeros(num_states);
            for (n, &label) in row.iter().enumerate() {
                if label >= num_states {
                    return Err(NdpError::validation(format!(
                        "row {} position {}: label {label} is outside 0..{num_states}",
                        m + 1,
                        n + 1
                    )));
                }
                c.as_mut_slice()[label] += 1;
            }
            counts.push(c);
        }
        Ok(ObservationArray { num_states, counts, raw: None })
    }

    /// Builds an array directly from count vectors.
    pub fn from_counts(counts: Vec<CountVector>, num_states: usize) -> Result<Self> {
        if num_states < 2 {
            return Err(NdpError::validation(format!("need at least 2 states, got {num_states}")));
        }
        if counts.is_empty() {
            return Err(NdpError::validation("observation array has no rows"));
        }
        for (m, c) in counts.iter().enumerate() {
            if c.len() != num_states {
                return Err(NdpError::validation(format!(
                    "row {} has {} counts, expected {num_states}",
                    m + 1,
                    c.len()
                )));
            }
        }
        Ok(ObservationArray { num_states, counts, raw: None })
    }

    /// Maps real-valued observations to cells of the partition defined by
    /// strictly increasing `edges`: cell 0 is (-∞, e₀), cell i is
    /// [e_{i-1}, e_i), and the last cell is [e_last, ∞).
    pub fn bin_continuous(values: &[Vec<f64>], edges: &[f64]) -> Result<Self> {
        if edges.is_empty() {
            return Err(NdpError::validation("binning needs at least one breakpoint"));
        }
        if let Some(i) = edges.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(NdpError::validation(format!("breakpoints must be strictly increasing (at index {})", i + 1)));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(NdpError::validation("breakpoints must be finite"));
        }
        let mut rows = Vec::with_capacity(values.len());
        for (m, row) in values.iter().enumerate() {
            let mut labels = Vec::with_capacity(row.len());
            for (n, &x) in row.iter().enumerate() {
                if x.is_nan() {
                    return Err(NdpError::validation(format!("row {} position {} is NaN", m + 1, n + 1)));
                }
                labels.push(edges.partition_point(|&e| e <= x));
            }
            rows.push(labels);
        }
        Self::validate_and_count(rows, edges.len() + 1)
    }

    /// Number of rows M.
    pub fn num_rows(&self) -> usize {
        self.counts.len()
    }

    /// Number of states L.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn counts(&self) -> &[CountVector] {
        &self.counts
    }

    /// Count vector of row `m` (0-based).
    pub fn row_counts(&self, m: usize) -> &CountVector {
        &self.counts[m]
    }

    /// Number of observations N_m in row `m` (0-based).
    pub fn row_len(&self, m: usize) -> u64 {
        self.counts[m].total()
    }

    pub fn raw_rows(&self) -> Option<&[Vec<usize>]> {
        self.raw.as_deref()
    }

    pub(crate) fn check_config(&self, config: &ModelConfig) -> Result<()> {
        if config.num_states() != self.num_states {
            return Err(NdpError::validation(format!(
                "data has {} states but the model has {}",
                self.num_states,
                config.num_states()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_penny_row() {
        // H H H H T with H = 1
        let arr = ObservationArray::validate_and_count(vec![vec![1, 1, 1, 1, 0]], 2).unwrap();
        assert_eq!(arr.row_counts(0).as_slice(), &[1, 4]);
        assert_eq!(arr.row_len(0), 5);
    }

    #[test]
    fn counts_simple_row() {
        let arr = ObservationArray::validate_and_count(vec![vec![0, 0, 0]], 2).unwrap();
        assert_eq!(arr.row_counts(0).as_slice(), &[3, 0]);
    }

    #[test]
    fn rejects_out_of_range_label() {
        let err = ObservationArray::validate_and_count(vec![vec![0, 1], vec![2, 5]], 5).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2 position 2"), "{msg}");
    }

    #[test]
    fn rejects_empty_array() {
        assert!(ObservationArray::validate_and_count(vec![], 2).is_err());
    }

    #[test]
    fn empty_rows_are_allowed() {
        let arr = ObservationArray::validate_and_count(vec![vec![], vec![1]], 2).unwrap();
        assert_eq!(arr.row_len(0), 0);
        assert_eq!(arr.row_counts(0).as_slice(), &[0, 0]);
    }

    #[test]
    fn binning_half_open() {
        let arr = ObservationArray::bin_continuous(&[vec![0.2, 0.9, 0.5]], &[0.5]).unwrap();
        assert_eq!(arr.raw_rows().unwrap()[0], vec![0, 1, 1]);
    }

    #[test]
    fn binning_integer_scores_with_cap() {
        let edges: Vec<f64> = (1..500).map(|l| l as f64 - 0.5).collect();
        let arr =
            ObservationArray::bin_continuous(&[vec![0.0, 3.0, 38.0, 498.0, 499.0, 524.0], vec![]], &edges).unwrap();
        assert_eq!(arr.num_states(), 500);
        assert_eq!(arr.raw_rows().unwrap()[0], vec![0, 3, 38, 498, 499, 499]);
        assert_eq!(arr.row_len(1), 0);
    }

    #[test]
    fn binning_rejects_non_monotone_edges() {
        assert!(ObservationArray::bin_continuous(&[vec![1.0]], &[1.0, 1.0]).is_err());
        assert!(ObservationArray::bin_continuous(&[vec![1.0]], &[2.0, 1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let p = SimplexVector::uniform(3).unwrap();
        assert!(ModelConfig::new(0.0, 1.0, p.clone()).is_err());
        assert!(ModelConfig::new(1.0, -1.0, p.clone()).is_err());
        assert!(ModelConfig::new(1.0, 1.0, SimplexVector::new(vec![1.0, 0.0]).unwrap()).is_err());
        assert_eq!(ModelConfig::new(2.0, 1.0, p).unwrap().num_states(), 3);
    }

    proptest! {
        #[test]
        fn counts_ignore_within_row_order(rows in prop::collection::vec(prop::collection::vec(0usize..4, 0..12), 1..6),
                                           seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = ObservationArray::validate_and_count(rows.clone(), 4).unwrap();
            let shuffled: Vec<Vec<usize>> = rows.into_iter().map(|mut r| { r.shuffle(&mut rng); r }).collect();
            let b = ObservationArray::validate_and_count(shuffled, 4).unwrap();
            prop_assert_eq!(a.counts(), b.counts());
        }

        #[test]
        fn binning_yields_consistent_counts(values in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 0..10), 1..5)) {
            let edges = [-1.0, 0.0, 2.5];
            let arr = ObservationArray::bin_continuous(&values, &edges).unwrap();
            for (m, row) in values.iter().enumerate() {
                prop_assert_eq!(arr.row_len(m) as usize, row.len());
            }
        }
    }
}
