//! Scalar functionals of the row distributions, and their query syntax.
//!
//! Queries are flat prefix expressions: a verb followed by its arguments,
//! whitespace separated. Rows are numbered from 1, states from 0.
//!
//! ```text
//! functional := "component" ROW STATE
//!             | "mean_score" ROW
//!             | "new_agent_component" STATE
//!             | "new_agent_mean"
//!             | "contest" ROW ROW
//!             | "cocluster" ROW ROW
//!             | "diff" functional functional
//!             | "lt" functional NUMBER
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{NdpError, Result};
use crate::imputation::WeightedSimulation;

/// A functional of a single simplex vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VectorFunctional {
    /// x_ℓ
    Component(usize),
    /// A(x) = Σ_ℓ ℓ x_ℓ
    MeanScore,
}

impl VectorFunctional {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            VectorFunctional::Component(l) => x[l],
            VectorFunctional::MeanScore => mean_score(x),
        }
    }
}

pub fn mean_score(x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(l, v)| l as f64 * v).sum()
}

/// C(x, y) = Σ_{ℓ > ℓ'} x_ℓ y_ℓ': the chance a draw from `x` strictly beats a draw from `y`.
pub fn contest(x: &[f64], y: &[f64]) -> f64 {
    let mut below = 0.0;
    let mut total = 0.0;
    for (xl, yl) in x.iter().zip(y) {
        total += xl * below;
        below += yl;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Functional {
    Component {
        row: usize,
        state: usize,
    },
    MeanScore {
        row: usize,
    },
    NewAgentComponent {
        state: usize,
    },
    NewAgentMean,
    Contest {
        first: usize,
        second: usize,
    },
    /// Indicator that two rows share one distribution.
    Cocluster {
        first: usize,
        second: usize,
    },
    Difference(Box<Functional>, Box<Functional>),
    /// 1{inner < threshold}
    IndicatorLt {
        inner: Box<Functional>,
        threshold: f64,
    },
}

impl Functional {
    pub fn parse(query: &str) -> Result<Self> {
        let mut tokens = query.split_whitespace();
        let f = Self::parse_tokens(&mut tokens)?;
        if let Some(extra) = tokens.next() {
            return Err(NdpError::Parse(format!("unexpected token `{extra}` in query `{query}`")));
        }
        Ok(f)
    }

    /// Parses one functional from the front of `tokens`, leaving the rest.
    pub fn parse_tokens<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<Self> {
        let verb = tokens.next().ok_or_else(|| NdpError::Parse("empty query".into()))?;
        let f = match verb {
            "component" => Functional::Component { row: row_arg(tokens)?, state: int_arg(tokens, "state")? },
            "mean_score" => Functional::MeanScore { row: row_arg(tokens)? },
            "new_agent_component" => Functional::NewAgentComponent { state: int_arg(tokens, "state")? },
            "new_agent_mean" => Functional::NewAgentMean,
            "contest" => Functional::Contest { first: row_arg(tokens)?, second: row_arg(tokens)? },
            "cocluster" => Functional::Cocluster { first: row_arg(tokens)?, second: row_arg(tokens)? },
            "diff" => {
                let a = Self::parse_tokens(tokens)?;
                let b = Self::parse_tokens(tokens)?;
                Functional::Difference(Box::new(a), Box::new(b))
            }
            "lt" => {
                let inner = Self::parse_tokens(tokens)?;
                let threshold = real_arg(tokens)?;
                Functional::IndicatorLt { inner: Box::new(inner), threshold }
            }
            other => return Err(NdpError::Parse(format!("unknown functional `{other}`"))),
        };
        Ok(f)
    }

    /// True when the functional concerns the distribution of a new, unobserved row.
    pub fn is_new_agent(&self) -> bool {
        match self {
            Functional::NewAgentComponent { .. } | Functional::NewAgentMean => true,
            Functional::Difference(a, b) => a.is_new_agent() || b.is_new_agent(),
            Functional::IndicatorLt { inner, .. } => inner.is_new_agent(),
            _ => false,
        }
    }

    /// Checks row and state indices against an M-row, L-state model.
    pub fn validate(&self, num_rows: usize, num_states: usize) -> Result<()> {
        let row_ok = |r: usize| -> Result<()> {
            if r == 0 || r > num_rows {
                Err(NdpError::validation(format!("row {r} is outside 1..={num_rows}")))
            } else {
                Ok(())
            }
        };
        let state_ok = |l: usize| -> Result<()> {
            if l >= num_states {
                Err(NdpError::validation(format!("state {l} is outside 0..{num_states}")))
            } else {
                Ok(())
            }
        };
        match self {
            Functional::Component { row, state } => {
                row_ok(*row)?;
                state_ok(*state)
            }
            Functional::MeanScore { row } => row_ok(*row),
            Functional::NewAgentComponent { state } => state_ok(*state),
            Functional::NewAgentMean => Ok(()),
            Functional::Contest { first, second } | Functional::Cocluster { first, second } => {
                row_ok(*first)?;
                row_ok(*second)
            }
            Functional::Difference(a, b) => {
                if self.is_new_agent() {
                    return Err(NdpError::Unsupported(
                        "differences involving a new agent have no joint law here".into(),
                    ));
                }
                a.validate(num_rows, num_states)?;
                b.validate(num_rows, num_states)
            }
            Functional::IndicatorLt { inner, threshold } => {
                if threshold.is_nan() {
                    return Err(NdpError::validation("threshold is NaN"));
                }
                inner.validate(num_rows, num_states)
            }
        }
    }

    /// Evaluates a row functional on one simulation. New-agent functionals
    /// have no value on a single simulation and return `None`.
    pub fn eval(&self, sim: &WeightedSimulation) -> Option<f64> {
        Some(match self {
            Functional::Component { row, state } => sim.theta(row - 1)[*state],
            Functional::MeanScore { row } => mean_score(sim.theta(row - 1)),
            Functional::Contest { first, second } => contest(sim.theta(first - 1), sim.theta(second - 1)),
            Functional::Cocluster { first, second } => {
                if sim.cluster_of(first - 1) == sim.cluster_of(second - 1) {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::Difference(a, b) => a.eval(sim)? - b.eval(sim)?,
            Functional::IndicatorLt { inner, threshold } => {
                if inner.eval(sim)? < *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::NewAgentComponent { .. } | Functional::NewAgentMean => return None,
        })
    }

    /// The single-vector functional behind a new-agent query, plus the
    /// threshold when wrapped in an indicator.
    pub(crate) fn new_agent_parts(&self) -> Option<(VectorFunctional, Option<f64>)> {
        match self {
            Functional::NewAgentComponent { state } => Some((VectorFunctional::Component(*state), None)),
            Functional::NewAgentMean => Some((VectorFunctional::MeanScore, None)),
            Functional::IndicatorLt { inner, threshold } => match inner.new_agent_parts()? {
                (vf, None) => Some((vf, Some(*threshold))),
                _ => None,
            },
            _ => None,
        }
    }
}

fn row_arg<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<usize> {
    int_arg(tokens, "row")
}

fn int_arg<'a, I: Iterator<Item = &'a str>>(tokens: &mut I, what: &str) -> Result<usize> {
    let tok = tokens.next().ok_or_else(|| NdpError::Parse(format!("missing {what} argument")))?;
    tok.parse().map_err(|_| NdpError::Parse(format!("`{tok}` is not a valid {what}")))
}

fn real_arg<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Result<f64> {
    let tok = tokens.next().ok_or_else(|| NdpError::Parse("missing threshold".into()))?;
    let v: f64 = tok.parse().map_err(|_| NdpError::Parse(format!("`{tok}` is not a number")))?;
    if v.is_nan() {
        return Err(NdpError::Parse("threshold is NaN".into()));
    }
    Ok(v)
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Component { row, state } => write!(f, "component {row} {state}"),
            Functional::MeanScore { row } => write!(f, "mean_score {row}"),
            Functional::NewAgentComponent { state } => write!(f, "new_agent_component {state}"),
            Functional::NewAgentMean => write!(f, "new_agent_mean"),
            Functional::Contest { first, second } => write!(f, "contest {first} {second}"),
            Functional::Cocluster { first, second } => write!(f, "cocluster {first} {second}"),
            Functional::Difference(a, b) => write!(f, "diff {a} {b}"),
            Functional::IndicatorLt { inner, threshold } => write!(f, "lt {inner} {threshold:?}"),
        }
    }
}

impl std::str::FromStr for Functional {
    type Err = NdpError;

    fn from_str(s: &str) -> Result<Self> {
        Functional::parse(s)
    }
}
