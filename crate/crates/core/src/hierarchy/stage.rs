//! Stages built by iterating the definable and the implicitly definable
//! power-set operators over membership structures.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{vn, vn_size, HFSet};
use crate::aut::automorphisms;
use crate::caps::{CapExceeded, Caps};
use crate::definability::{Budget, DefinabilityError, ResolvedBudget};
use crate::eval::{element_partition, fibers, subset_type_map_with_cap, EvalError};
use crate::structure::{membership_structure, Structure};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error(transparent)]
    Definability(#[from] DefinabilityError),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("not a transitive set of hereditarily finite sets")]
    NotTransitive,
}

impl HierarchyError {
    pub fn is_cap(&self) -> bool {
        match self {
            HierarchyError::Cap(_) => true,
            HierarchyError::Definability(e) => e.is_cap(),
            HierarchyError::NotTransitive => false,
        }
    }
}

impl From<EvalError> for HierarchyError {
    fn from(e: EvalError) -> Self {
        HierarchyError::Definability(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    /// Add the definable subsets.
    Def,
    /// Add the implicitly definable subsets.
    Imp,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::Def => "DEF",
            Operator::Imp => "IMP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StageMode {
    pub op: Operator,
    pub budget: Budget,
}

impl StageMode {
    pub fn new(op: Operator, budget: Budget) -> StageMode {
        StageMode { op, budget }
    }
}

/// A transitive finite set of hereditarily finite sets with its membership
/// structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    extent: Vec<HFSet>,
    structure: Option<Structure>,
    mode: Option<StageMode>,
}

impl Stage {
    /// The empty stage.
    pub fn empty() -> Stage {
        Stage { extent: Vec::new(), structure: None, mode: None }
    }

    /// Stage with the given extent, which must be transitive.
    pub fn from_extent<I: IntoIterator<Item = HFSet>>(items: I) -> Result<Stage, HierarchyError> {
        let extent = HFSet::from_elements(items);
        if !extent.is_transitive() {
            return Err(HierarchyError::NotTransitive);
        }
        Ok(Stage::build(extent.elements().to_vec(), None))
    }

    /// The transitive closure of `{x}`, i.e. the universe of the membership
    /// digraph of `x`.
    pub fn generated_by(x: &HFSet) -> Stage {
        let mut extent = x.transitive_closure();
        extent.push(x.clone());
        extent.sort();
        extent.dedup();
        Stage::build(extent, None)
    }

    /// `V_m` as a stage.
    pub fn von_neumann(m: usize) -> Stage {
        Stage::build(vn(m), None)
    }

    fn build(extent: Vec<HFSet>, mode: Option<StageMode>) -> Stage {
        let structure = if extent.is_empty() {
            None
        } else {
            let codes: Vec<String> = extent.iter().map(code_text).collect();
            let name = format!("stage[{}]", codes.join(","));
            Some(membership_structure(&name, &extent))
        };
        Stage { extent, structure, mode }
    }

    /// Members in Ackermann order.
    pub fn extent(&self) -> &[HFSet] {
        &self.extent
    }

    pub fn len(&self) -> usize {
        self.extent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.extent.is_empty()
    }

    /// The membership structure, absent for the empty stage.
    pub fn structure(&self) -> Option<&Structure> {
        self.structure.as_ref()
    }

    /// The mode of the step that produced this stage.
    pub fn mode(&self) -> Option<&StageMode> {
        self.mode.as_ref()
    }

    /// Ackermann codes in increasing order, `None` for sets too large to
    /// encode.
    pub fn codes(&self) -> Vec<Option<u64>> {
        self.extent.iter().map(|x| x.encode().ok()).collect()
    }

    /// The `m` with extent equal to `V_m`, if any.
    pub fn von_neumann_level(&self) -> Option<usize> {
        let m = (0..).find(|&m| vn_size(m).is_none_or(|size| size >= self.len()))?;
        if vn_size(m) != Some(self.len()) {
            return None;
        }
        let matches = self.extent.iter().enumerate().all(|(i, x)| x.encode() == Ok(i as u64));
        matches.then_some(m)
    }

    /// One line per element: `<code> <braces>`.
    pub fn dump(&self) -> String {
        self.extent.iter().map(|x| format!("{} {}\n", code_text(x), x)).collect()
    }
}

fn code_text(x: &HFSet) -> String {
    match x.encode() {
        Ok(c) => c.to_string(),
        Err(_) => "?".to_string(),
    }
}

/// The subsets of the stage's universe that qualify under the mode, as
/// index sets.
fn qualifying(s: &Structure, mode: &StageMode, b: &ResolvedBudget) -> Result<Vec<Subset>, HierarchyError> {
    let n = s.size();
    let caps = Caps::current();
    if b.unbounded {
        // Without a rank bound both operators pick out exactly the subsets
        // fixed by every automorphism over the parameters.
        Caps::check("stage subsets", n, caps.subset_enum)?;
        let g = automorphisms(s, &b.params);
        return Ok((0..1u64 << n).map(Subset::from_mask).filter(|a| g.fixes_setwise(a)).collect());
    }
    match mode.op {
        Operator::Def => {
            let blocks = element_partition(s, b.rank, &b.params)?;
            Caps::check("stage subsets", blocks.len(), caps.subset_enum)?;
            let mut out: Vec<Subset> = (0..1u64 << blocks.len())
                .map(|mask| {
                    blocks
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .fold(Subset::empty(), |acc, (_, blk)| acc.union(blk))
                })
                .collect();
            out.sort();
            Ok(out)
        }
        Operator::Imp => {
            Caps::check("stage for an IMP step", n, caps.hierarchy_imp)?;
            let map = subset_type_map_with_cap(s, b.rank, &b.params, caps.hierarchy_imp)?;
            let mut out: Vec<Subset> = fibers(&map).into_iter().filter(|f| f.len() == 1).flatten().collect();
            out.sort();
            Ok(out)
        }
    }
}

/// Add to the stage every subset of it that qualifies under `mode`.
pub fn step(st: &Stage, mode: &StageMode) -> Result<Stage, HierarchyError> {
    let Some(s) = st.structure() else {
        // The empty set is the only subset of the empty stage, and it is
        // definable in every sense.
        return Ok(Stage::build(vec![HFSet::empty()], Some(mode.clone())));
    };
    let b = mode.budget.resolve(s.size())?;
    let new = qualifying(s, mode, &b)?;
    let mut extent = st.extent.clone();
    extent.extend(new.iter().map(|a| HFSet::from_elements(a.iter().map(|i| st.extent[i].clone()))));
    extent.sort();
    extent.dedup();
    Caps::check("stage extent", extent.len(), Caps::current().stage_extent)?;
    Ok(Stage::build(extent, Some(mode.clone())))
}

/// Stages of an iteration with a comparison against the von Neumann
/// levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iteration {
    pub stages: Vec<Stage>,
    /// Set when a step failed; the stages computed before it are kept.
    pub stopped: Option<HierarchyError>,
}

impl Iteration {
    pub fn sizes(&self) -> Vec<usize> {
        self.stages.iter().map(Stage::len).collect()
    }

    /// Index of the first stage that is not some `V_m`, with the levels
    /// increasing by one from stage to stage.
    pub fn first_divergence_from_vn(&self) -> Option<usize> {
        let levels: Vec<Option<usize>> = self.stages.iter().map(Stage::von_neumann_level).collect();
        let start = levels.first().copied().flatten();
        levels.iter().enumerate().position(|(i, l)| match (start, l) {
            (Some(s), Some(l)) => *l != s + i,
            _ => true,
        })
    }
}

/// Apply `n` steps from `start`.
pub fn iterate(start: &Stage, mode: &StageMode, n: usize) -> Iteration {
    let mut stages = vec![start.clone()];
    for _ in 0..n {
        match step(stages.last().unwrap(), mode) {
            Ok(next) => stages.push(next),
            Err(e) => return Iteration { stages, stopped: Some(e) },
        }
    }
    Iteration { stages, stopped: None }
}

/// First index where the two iterations have different extents, including
/// the point where one of them stops early.
pub fn first_divergence(a: &Iteration, b: &Iteration) -> Option<usize> {
    let common = a.stages.len().min(b.stages.len());
    (0..common)
        .find(|&i| a.stages[i].extent != b.stages[i].extent)
        .or_else(|| (a.stages.len() != b.stages.len()).then_some(common))
}
