use std::fmt;

use serde::Serialize;

use super::DefinabilityError;

/// Quantifier-rank bound of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    Finite(usize),
    /// No bound: answered through automorphism orbits, which coincide with
    /// the rank `|M| + 1` type classes.
    Unbounded,
}

/// Which elements may serve as parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Params {
    None,
    All,
    List(Vec<usize>),
}

/// Resources allowed for a definability query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Budget {
    pub rank: Rank,
    pub params: Params,
    /// Degree cap `m` for algebraicity; `None` means `|M|`.
    pub max_degree: Option<usize>,
}

impl Budget {
    pub fn unbounded() -> Budget {
        Budget { rank: Rank::Unbounded, params: Params::None, max_degree: None }
    }

    pub fn rank(k: usize) -> Budget {
        Budget { rank: Rank::Finite(k), params: Params::None, max_degree: None }
    }

    pub fn with_params(mut self, params: Params) -> Budget {
        self.params = params;
        self
    }

    pub fn with_max_degree(mut self, m: usize) -> Budget {
        self.max_degree = Some(m);
        self
    }

    /// Fix the budget against a universe of size `n`.
    pub fn resolve(&self, n: usize) -> Result<ResolvedBudget, DefinabilityError> {
        let params = match &self.params {
            Params::None => Vec::new(),
            Params::All => (0..n).collect(),
            Params::List(list) => {
                if let Some(&bad) = list.iter().find(|&&p| p >= n) {
                    return Err(DefinabilityError::InvalidBudget(format!("parameter {bad} is outside the universe")));
                }
                let mut list = list.clone();
                list.sort_unstable();
                list.dedup();
                list
            }
        };
        let max_degree = self.max_degree.unwrap_or(n);
        if max_degree == 0 {
            return Err(DefinabilityError::InvalidBudget("the degree cap must be at least 1".into()));
        }
        let (rank, unbounded) = match self.rank {
            Rank::Finite(k) => (k, false),
            Rank::Unbounded => (n + 1, true),
        };
        let params_mode = match self.params {
            Params::None => "none",
            Params::All => "all",
            Params::List(_) => "list",
        };
        Ok(ResolvedBudget { rank, unbounded, params_mode, params, max_degree })
    }
}

/// A budget fixed against a concrete universe. For unbounded queries
/// `rank` is `|M| + 1`, the rank at which type classes are certified to
/// coincide with orbits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedBudget {
    pub rank: usize,
    pub unbounded: bool,
    pub params_mode: &'static str,
    pub params: Vec<usize>,
    pub max_degree: usize,
}

impl fmt::Display for ResolvedBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unbounded {
            write!(f, "rank unbounded (k* = {})", self.rank)?;
        } else {
            write!(f, "rank {}", self.rank)?;
        }
        match self.params_mode {
            "none" => write!(f, ", no parameters")?,
            "all" => write!(f, ", all parameters")?,
            _ => {
                let list: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
                write!(f, ", parameters {}", list.join(","))?
            }
        }
        write!(f, ", max degree {}", self.max_degree)
    }
}
