//! Built-in example scenarios with their reference values.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dirichlet::SimplexVector;
use crate::error::{NdpError, Result};
use crate::gamer::GamerParams;
use crate::io::{
    read_counts_csv, read_labels_csv, write_counts_csv, write_json, write_labels_csv, ConfigFile, GamerBase,
};
use crate::model::{ModelConfig, ObservationArray};

const PENNIES: &str = include_str!("../data/pennies.csv");
const TACKS: &str = include_str!("../data/tacks.csv");
const REVIEWS: &str = include_str!("../data/reviews.csv");
const GAMES1: &str = include_str!("../data/games1.csv");
const GAMES2: &str = include_str!("../data/games2.csv");
const GAMES3: &str = include_str!("../data/games3.csv");

pub const SCENARIO_NAMES: [&str; 7] = ["pennies", "tacks_k1", "tacks_k10", "reviews", "games1", "games2", "games3"];

/// Number of reviews per product as tabulated next to the star counts.
const REVIEW_TOTALS: [u64; 50] = [
    90, 71, 59, 52, 52, 51, 48, 46, 45, 39, 38, 35, 30, 29, 27, 25, 25, 24, 23, 22, 18, 18, 17, 17, 17, 16, 16, 15, 15,
    14, 14, 14, 13, 12, 11, 11, 11, 11, 11, 10, 9, 6, 5, 4, 3, 3, 3, 2, 2, 2,
];

/// Tabulated average rating per product, rounded to two decimals.
const REVIEW_AVERAGES: [f64; 50] = [
    2.98, 2.11, 2.46, 2.83, 2.77, 2.35, 1.69, 2.61, 2.16, 2.13, 3.03, 2.86, 2.07, 1.86, 2.52, 2.84, 2.12, 2.75, 1.13,
    2.23, 2.94, 2.17, 2.18, 3.06, 2.53, 4.06, 2.94, 2.07, 1.93, 2.71, 1.5, 2.43, 3.0, 2.0, 2.0, 1.64, 3.27, 1.73, 1.55,
    3.2, 2.11, 1.5, 1.8, 1.5, 1.67, 2.67, 1.33, 3.0, 3.0, 3.5,
];

pub const GAMES_STATES: usize = 500;

pub fn games_gamer() -> GamerParams {
    GamerParams::new(7.0 / 3.0, 28.0, 3.0).expect("valid constants")
}

/// A reference value for a query, on the query's own scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryTarget {
    pub query: String,
    pub value: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub row_ids: Vec<String>,
    #[serde(skip)]
    pub data: ObservationArray,
    #[serde(skip)]
    pub config: ModelConfig,
    /// Set when the base measure is a discretized gamer law.
    pub gamer: Option<GamerBase>,
    pub num_sims: usize,
    pub log_scale_factor: f64,
    /// Heaviest simulations to drop before summarizing.
    pub trim: usize,
    /// Published K_e'' before and after trimming.
    pub reported_ess: f64,
    pub reported_ess_trimmed: Option<f64>,
    pub targets: Vec<QueryTarget>,
}

fn target(query: &str, value: f64, note: &'static str) -> QueryTarget {
    QueryTarget { query: query.into(), value, note }
}

fn binary(eps: f64, kappa: f64) -> ModelConfig {
    ModelConfig::new(kappa, eps, SimplexVector::uniform(2).expect("two states")).expect("valid constants")
}

/// Rows of `row_id,score`, grouped by first appearance, scores capped at L − 1.
fn read_scores(text: &str) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let score: usize = rec[1].parse().map_err(|_| NdpError::Parse(format!("bad score `{}`", &rec[1])))?;
        let m = *index.entry(rec[0].to_owned()).or_insert_with(|| {
            ids.push(rec[0].to_owned());
            rows.push(Vec::new());
            rows.len() - 1
        });
        rows[m].push(score.min(GAMES_STATES - 1));
    }
    Ok((ids, rows))
}

/// Indices (1-based) of reviews rows whose tabulated totals or averages
/// disagree with their star counts.
pub fn review_table_mismatches(data: &ObservationArray) -> Vec<usize> {
    let mut bad = Vec::new();
    for (m, c) in data.counts().iter().enumerate() {
        let total = c.total();
        let stars: u64 = c.as_slice().iter().enumerate().map(|(l, &n)| (l as u64 + 1) * n).sum();
        let avg = stars as f64 / total as f64;
        let rounded = (avg * 100.0).round() / 100.0;
        if REVIEW_TOTALS.get(m) != Some(&total) || REVIEW_AVERAGES.get(m).is_none_or(|a| (a - rounded).abs() > 1e-9) {
            bad.push(m + 1);
        }
    }
    bad
}

pub fn load_scenario(name: &str) -> Result<Scenario> {
    let s = match name {
        "pennies" => {
            let d = read_labels_csv(PENNIES.as_bytes(), 2)?;
            Scenario {
                name: "pennies",
                row_ids: d.row_ids,
                data: d.data,
                config: binary(1.0, 1.0),
                gamer: None,
                num_sims: 10_000,
                log_scale_factor: 0.0,
                trim: 0,
                reported_ess: 6067.0,
                reported_ess_trimmed: None,
                targets: vec![
                    target("new_agent_component 1", 0.633, "heads probability of a new coin"),
                    target("component 5 1", 0.461, "heads probability of coin 5"),
                    target("lt component 5 1 0.5", 0.481, "coin 5 favors tails"),
                ],
            }
        }
        "tacks_k1" | "tacks_k10" => {
            let d = read_counts_csv(TACKS.as_bytes())?;
            let k1 = name == "tacks_k1";
            Scenario {
                name: if k1 { "tacks_k1" } else { "tacks_k10" },
                row_ids: d.row_ids,
                data: d.data,
                config: binary(2.0, if k1 { 1.0 } else { 10.0 }),
                gamer: None,
                num_sims: 10_000,
                log_scale_factor: 0.0,
                trim: 0,
                reported_ess: if k1 { 244.0 } else { 388.0 },
                reported_ess_trimmed: None,
                targets: Vec::new(),
            }
        }
        "reviews" => {
            let d = read_counts_csv(REVIEWS.as_bytes())?;
            let bad = review_table_mismatches(&d.data);
            if !bad.is_empty() {
                log::warn!(
                    "reviews rows {bad:?}: tabulated totals or averages disagree with star counts; counts are used"
                );
            }
            Scenario {
                name: "reviews",
                row_ids: d.row_ids,
                data: d.data,
                config: ModelConfig::new(10.0, 5.0, SimplexVector::uniform(5)?)?,
                gamer: None,
                num_sims: 100_000,
                log_scale_factor: 28.8,
                trim: 0,
                reported_ess: 561.0,
                reported_ess_trimmed: None,
                // states are stars minus one
                targets: vec![
                    target("new_agent_mean", 1.54, "new product averages 2.54 stars"),
                    target("mean_score 50", 1.83, "product 50 averages 2.83 stars"),
                    target("mean_score 26", 2.8, "product 26 averages 3.8 stars"),
                ],
            }
        }
        "games1" | "games2" | "games3" => {
            let (text, ess, trimmed_ess, trim, ndp_avg): (&str, f64, Option<f64>, usize, [f64; 10]) = match name {
                "games1" => (GAMES1, 326.0, None, 0, [38., 39., 32., 79.65, 55., 52., 40., 43., 71., 37.]),
                "games2" => (GAMES2, 22.3, Some(1099.0), 2, [38., 39., 31., 84., 62., 51., 39., 28., 43., 37.]),
                _ => (GAMES3, 39.0, Some(207.0), 26, [198., 31., 26., 37., 45., 34., 72., 52., 67., 56.]),
            };
            let (ids, rows) = read_scores(text)?;
            let g = games_gamer();
            let data = ObservationArray::validate_and_count(rows, GAMES_STATES)?;
            let mut targets: Vec<QueryTarget> = ndp_avg
                .iter()
                .enumerate()
                .map(|(m, &v)| target(&format!("mean_score {}", m + 1), v, "long-term average score"))
                .collect();
            if name == "games3" {
                targets.extend([
                    target("lt diff mean_score 9 mean_score 2 0", 0.049, "row 9 plays worse than row 2"),
                    target("contest 9 2", 0.786, "row 9 beats row 2 in one game"),
                    target("lt diff mean_score 9 mean_score 7 0", 0.625, "row 9 plays worse than row 7"),
                    target("contest 9 7", 0.484, "row 9 beats row 7 in one game"),
                ]);
            }
            Scenario {
                name: SCENARIO_NAMES.iter().find(|n| **n == name).expect("listed"),
                row_ids: ids,
                data,
                config: ModelConfig::new(1.0, 1.0, g.discretize(GAMES_STATES)?)?,
                gamer: Some(GamerBase { r: g.r, c: g.c, alpha: g.alpha, num_states: GAMES_STATES }),
                num_sims: 40_000,
                log_scale_factor: 42.0,
                trim,
                reported_ess: ess,
                reported_ess_trimmed: trimmed_ess,
                targets,
            }
        }
        other => return Err(NdpError::Lookup(other.to_owned())),
    };
    Ok(s)
}

impl Scenario {
    pub fn config_file(&self) -> ConfigFile {
        match self.gamer {
            Some(g) => ConfigFile { kappa: self.config.kappa(), eps: self.config.eps(), base: None, gamer: Some(g) },
            None => (&self.config).into(),
        }
    }

    /// Writes `<name>.csv` (labels when raw rows exist, counts otherwise),
    /// `<name>.config.json` and `<name>.scenario.json`; returns the paths.
    pub fn export(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let data_path = dir.join(format!("{}.csv", self.name));
        let file = fs::File::create(&data_path)?;
        match self.data.raw_rows() {
            Some(rows) => write_labels_csv(file, &self.row_ids, rows)?,
            None => write_counts_csv(file, &self.row_ids, &self.data)?,
        }
        let config_path = dir.join(format!("{}.config.json", self.name));
        write_json(&config_path, &self.config_file())?;
        let meta_path = dir.join(format!("{}.scenario.json", self.name));
        write_json(&meta_path, self)?;
        Ok(vec![data_path, config_path, meta_path])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_data;

    #[test]
    fn pennies_shape() {
        let s = load_scenario("pennies").unwrap();
        assert_eq!(s.data.num_rows(), 7);
        assert!((0..7).all(|m| s.data.row_len(m) == 5));
        assert_eq!(s.data.row_counts(4).as_slice(), &[4, 1]);
        let heads: u64 = s.data.counts().iter().map(|c| c.as_slice()[1]).sum();
        assert_eq!(heads, 23);
    }

    #[test]
    fn tacks_shape() {
        for name in ["tacks_k1", "tacks_k10"] {
            let s = load_scenario(name).unwrap();
            assert_eq!(s.data.num_rows(), 320);
            assert_eq!(s.data.row_counts(0).as_slice(), &[2, 7]);
            assert!((0..320).all(|m| s.data.row_len(m) == 9));
        }
        assert_eq!(load_scenario("tacks_k10").unwrap().config.kappa(), 10.0);
    }

    #[test]
    fn reviews_totals() {
        let s = load_scenario("reviews").unwrap();
        assert_eq!(s.data.num_rows(), 50);
        assert!(review_table_mismatches(&s.data).is_empty());
        let n: u64 = s.data.counts().iter().map(|c| c.total()).sum();
        assert!((n as f64 / 50.0 - 23.0).abs() < 0.05);
        let mean_rating: f64 = REVIEW_AVERAGES.iter().sum::<f64>() / 50.0;
        assert!((mean_rating - 2.4).abs() < 0.05);
    }

    #[test]
    fn games_differences() {
        let g1 = load_scenario("games1").unwrap();
        let g2 = load_scenario("games2").unwrap();
        let changed: Vec<&str> = (0..10)
            .filter(|&m| g1.data.row_counts(m) != g2.data.row_counts(m))
            .map(|m| g1.row_ids[m].as_str())
            .collect();
        assert_eq!(changed, vec!["The Matrix", "Goat Radish"]);
        let g3 = load_scenario("games3").unwrap();
        assert_eq!(g3.row_ids[8], "Asparagus Soda");
        assert_eq!(g3.data.row_len(0), 25);
        assert_eq!(g3.data.row_counts(0).as_slice()[499], 1);
        assert_eq!(g3.config.num_states(), 500);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(load_scenario("coins"), Err(NdpError::Lookup(_))));
    }

    #[test]
    fn export_round_trips() {
        let dir = std::env::temp_dir().join(format!("ndp-export-{}", std::process::id()));
        for name in SCENARIO_NAMES {
            let s = load_scenario(name).unwrap();
            let paths = s.export(&dir).unwrap();
            let config = crate::io::load_config(&paths[1]).unwrap();
            assert_eq!(config, s.config);
            let back = load_data(&paths[0], Some(config.num_states())).unwrap();
            assert_eq!(back.data.counts(), s.data.counts());
            assert_eq!(back.row_ids, s.row_ids);
        }
        fs::remove_dir_all(dir).ok();
    }
}
